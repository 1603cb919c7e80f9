#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sassseg/raster.hpp"

namespace sass {

/// Channel-major (C x H x W) real tensor for one sample.
struct FeatureMap {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(int c, int h, int w)
        : channels(c), height(h), width(w),
          data(static_cast<std::size_t>(c) * static_cast<std::size_t>(h) * static_cast<std::size_t>(w), 0.0) {}

    [[nodiscard]] std::size_t plane() const noexcept {
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    }
    double* channel(int c) noexcept { return data.data() + static_cast<std::size_t>(c) * plane(); }
    [[nodiscard]] const double* channel(int c) const noexcept {
        return data.data() + static_cast<std::size_t>(c) * plane();
    }
};

/// Single-channel input scaled to [0,1] (intensity / 255).
FeatureMap normalize(const GrayImage& img);

struct ConvLayer {
    int in_ch = 0;
    int out_ch = 0;
    int kernel = 1;
    std::vector<double> weight;  ///< [out][in][ky][kx]
    std::vector<double> bias;    ///< [out]

    ConvLayer() = default;
    ConvLayer(int in, int out, int k);
    [[nodiscard]] std::size_t param_count() const noexcept { return weight.size() + bias.size(); }
    [[nodiscard]] int fan_in() const noexcept { return in_ch * kernel * kernel; }
};

/// Micro U-Net:
///   conv3x3(1->8)+ReLU -> maxpool2 -> conv3x3(8->16)+ReLU -> bilinear up x2
///   -> concat with the pre-pool features (8+16) -> conv3x3(24->8)+ReLU
///   -> conv1x1(8->1) -> sigmoid
/// Flat order: conv1.w, conv1.b, conv2.w, conv2.b, conv3.w, conv3.b, conv4.w, conv4.b.
struct SegmenterParams {
    static constexpr std::size_t kParamCount = 2993;

    ConvLayer conv1{1, 8, 3};
    ConvLayer conv2{8, 16, 3};
    ConvLayer conv3{24, 8, 3};
    ConvLayer conv4{8, 1, 1};

    [[nodiscard]] std::array<const ConvLayer*, 4> layers() const { return {&conv1, &conv2, &conv3, &conv4}; }
    std::array<ConvLayer*, 4> layers() { return {&conv1, &conv2, &conv3, &conv4}; }

    [[nodiscard]] std::size_t size() const noexcept;
    [[nodiscard]] std::vector<double> flatten() const;
    /// Throws std::invalid_argument when the length is not kParamCount.
    void unflatten(std::span<const double> flat);
    static SegmenterParams from_flat(std::span<const double> flat);

    SegmenterParams& operator+=(const SegmenterParams& other);
    friend bool operator==(const SegmenterParams& a, const SegmenterParams& b) { return a.flatten() == b.flatten(); }
};

/// He initialisation: weights ~ N(0, 2/fan_in) drawn in flat order from
/// Rng(derive_seed({seed})), biases zero.
SegmenterParams init_params(std::uint64_t seed);

/// Everything the backward pass needs for one sample.
struct SampleCache {
    FeatureMap input;
    FeatureMap concat;                  ///< [relu(conv1) | upsampled relu(conv2)], 24 channels
    FeatureMap pooled;                  ///< maxpool(relu(conv1))
    std::vector<std::uint32_t> argmax;  ///< pooled cell -> in-plane index of its max
    FeatureMap act2;                    ///< relu(conv2)
    FeatureMap act3;                    ///< relu(conv3)
    ProbMask prob;
};

struct ForwardCache {
    std::vector<SampleCache> samples;
};

struct ForwardResult {
    std::vector<ProbMask> probs;
    ForwardCache cache;
};

/// Input height and width must be even; throws std::invalid_argument otherwise.
SampleCache forward_sample(const SegmenterParams& params, const FeatureMap& input);
ForwardResult forward(const SegmenterParams& params, std::span<const FeatureMap> batch);
ProbMask predict(const SegmenterParams& params, const FeatureMap& input);

/// Gradient of the loss w.r.t. all parameters for one sample, given dL/dp.
SegmenterParams backward_sample(const SegmenterParams& params, const SampleCache& cache,
                                std::span<const double> dloss_dprob);

/// Sum over the batch of per-sample gradients, in flat order. Callers that
/// average the loss over the batch pass dL/dp already scaled by 1/B.
std::vector<double> backward(const SegmenterParams& params, const ForwardCache& cache,
                             std::span<const std::vector<double>> dloss_dprob);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction over the flat parameter view.
class AdamOptimizer {
public:
    explicit AdamOptimizer(AdamConfig cfg = {}, std::size_t n = SegmenterParams::kParamCount);

    void step(SegmenterParams& params, std::span<const double> grad);
    void step(std::span<double> params, std::span<const double> grad);

    [[nodiscard]] const AdamConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] std::uint64_t steps() const noexcept { return t_; }
    [[nodiscard]] std::span<const double> first_moment() const noexcept { return m_; }
    [[nodiscard]] std::span<const double> second_moment() const noexcept { return v_; }

private:
    AdamConfig cfg_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::uint64_t t_ = 0;
};

}  // namespace sass
