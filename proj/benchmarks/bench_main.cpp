#include <benchmark/benchmark.h>

#include "sassseg/imaging.hpp"
#include "sassseg/losses.hpp"
#include "sassseg/pipeline.hpp"
#include "sassseg/segmenter.hpp"
#include "sassseg/thresholding.hpp"

namespace {

using namespace sass;

GrayImage sample_image(int side) { return synth_blob(1, 0, side, side).image; }

void BM_Otsu(benchmark::State& state) {
    const Histogram h = compute_histogram(sample_image(224));
    for (auto _ : state) benchmark::DoNotOptimize(otsu_threshold(h));
}
BENCHMARK(BM_Otsu);

void BM_Ght(benchmark::State& state) {
    const Histogram h = compute_histogram(sample_image(224));
    for (auto _ : state) benchmark::DoNotOptimize(ght_threshold(h, 1.0, 40.0, 0.0, 0.5));
}
BENCHMARK(BM_Ght);

void BM_AdaptiveMean(benchmark::State& state) {
    const GrayImage img = sample_image(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(adaptive_threshold(img, AdaptiveKind::Mean, 11, 0.0, 2.0));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.size()));
}
BENCHMARK(BM_AdaptiveMean)->Arg(64)->Arg(224);

void BM_AdaptiveGaussian(benchmark::State& state) {
    const GrayImage img = sample_image(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(adaptive_threshold(img, AdaptiveKind::Gaussian, 11, 11.0 / 6.0, 2.0));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.size()));
}
BENCHMARK(BM_AdaptiveGaussian)->Arg(64)->Arg(224);

void BM_Forward(benchmark::State& state) {
    const SegmenterParams params = init_params(1);
    const FeatureMap x = normalize(sample_image(static_cast<int>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(forward_sample(params, x));
}
BENCHMARK(BM_Forward)->Arg(64)->Arg(224)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
    const SegmenterParams params = init_params(1);
    const GrayImage img = sample_image(static_cast<int>(state.range(0)));
    const FeatureMap x = normalize(img);
    const BinaryMask y = generate_pseudo_mask(img, ThresholdMethod{}).mask;
    for (auto _ : state) {
        const SampleCache cache = forward_sample(params, x);
        const LossValue l = compute_loss(LossSpec{}, cache.prob, y);
        benchmark::DoNotOptimize(backward_sample(params, cache, l.grad));
    }
}
BENCHMARK(BM_ForwardBackward)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
