#include "sassseg/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sassseg/checkpoint.hpp"
#include "sassseg/parallel.hpp"
#include "sassseg/rng.hpp"

namespace sass {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kShuffleTag = 0x5eedf00dULL;

void check_size(const Dataset& d, const TrainConfig& cfg, const char* what) {
    for (const auto& img : d.images) {
        if (img.width != cfg.width || img.height != cfg.height) {
            throw std::invalid_argument(std::string(what) + " images must be resized to the configured size");
        }
    }
}

void require_masks(const Dataset& d, const char* what) {
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!d.masks[i]) {
            throw std::invalid_argument(std::string(what) + " entry '" + d.names[i] +
                                        "' has no mask but supervised mode requires ground truth");
        }
    }
}

AugmentSpec resolved_augment(const TrainConfig& cfg) {
    AugmentSpec spec = cfg.augment;
    spec.resize_w = cfg.width;
    spec.resize_h = cfg.height;
    spec.seed = cfg.seed;
    return spec;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    return out;
}

}  // namespace

BinaryMask pseudo_label(const GrayImage& img, const ThresholdMethod& method, bool entry_invert) {
    BinaryMask m = generate_pseudo_mask(img, method).mask;
    return entry_invert ? invert_mask(m) : m;
}

double validation_loss(const SegmenterParams& params, const Dataset& data, const TrainConfig& cfg) {
    if (data.size() == 0) throw std::invalid_argument("empty validation split");
    std::vector<double> losses(data.size());
    parallel_for(data.size(), [&](std::size_t i) {
        const BinaryMask y = cfg.mode == TrainMode::Supervised
                                 ? *data.masks[i]
                                 : pseudo_label(data.images[i], cfg.threshold_method, data.invert[i]);
        const ProbMask p = predict(params, normalize(data.images[i]));
        losses[i] = compute_loss(cfg.loss, p, y).value;
    });
    return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(data.size());
}

TrainResult train(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.size() == 0) throw std::invalid_argument("empty train split");
    if (val_set.size() == 0) throw std::invalid_argument("empty val split");
    check_size(train_set, cfg, "train");
    check_size(val_set, cfg, "val");
    const bool supervised = cfg.mode == TrainMode::Supervised;
    if (supervised) {
        require_masks(train_set, "train");
        require_masks(val_set, "val");
    }

    const AugmentSpec aug = resolved_augment(cfg);
    const std::size_t n = train_set.size();
    const auto batch = static_cast<std::size_t>(cfg.batch_size);

    TrainResult result{init_params(cfg.seed), {}};
    result.record.config_hash = config_hash(cfg);
    result.record.seed = cfg.seed;
    SegmenterParams params = result.params;
    AdamOptimizer opt(cfg.adam());

    double best = std::numeric_limits<double>::infinity();
    int since_best = 0;
    std::vector<double> sample_loss(n);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng shuffle(derive_seed({cfg.seed, static_cast<std::uint64_t>(epoch), kShuffleTag}));
        const auto order = permutation(n, shuffle);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t bsz = std::min(batch, n - start);
            const double scale = 1.0 / static_cast<double>(bsz);
            std::vector<std::vector<double>> grads(bsz);
            parallel_for(bsz, [&](std::size_t k) {
                const std::size_t i = order[start + k];
                const std::uint64_t key = (static_cast<std::uint64_t>(epoch) << 32) | static_cast<std::uint64_t>(i);
                const std::optional<BinaryMask> none;
                Augmented a = augment(train_set.images[i], supervised ? train_set.masks[i] : none, aug, key);
                const BinaryMask y =
                    supervised ? *a.mask : pseudo_label(a.image, cfg.threshold_method, train_set.invert[i]);
                const SampleCache cache = forward_sample(params, normalize(a.image));
                LossValue lv = compute_loss(cfg.loss, cache.prob, y);
                for (double& g : lv.grad) g *= scale;
                sample_loss[i] = lv.value;
                grads[k] = backward_sample(params, cache, lv.grad).flatten();
            });
            std::vector<double> total(params.size(), 0.0);
            for (const auto& g : grads) {
                for (std::size_t j = 0; j < total.size(); ++j) total[j] += g[j];
            }
            opt.step(params, total);
        }
        // Summed in dataset order so the epoch loss does not depend on the shuffle.
        const double train_loss = std::accumulate(sample_loss.begin(), sample_loss.end(), 0.0) / static_cast<double>(n);
        const double val_loss = validation_loss(params, val_set, cfg);
        result.record.train_loss.push_back(train_loss);
        result.record.val_loss.push_back(val_loss);
        if (val_loss < best) {
            best = val_loss;
            result.record.best_epoch = epoch;
            result.params = params;
            since_best = 0;
        } else {
            ++since_best;
        }
        if (cfg.patience > 0 && since_best >= cfg.patience) break;
    }
    return result;
}

TrainResult train(const std::vector<ManifestEntry>& manifest, const TrainConfig& cfg) {
    cfg.validate();
    const MaskPolicy policy = cfg.mode == TrainMode::Supervised ? MaskPolicy::Require : MaskPolicy::Skip;
    const auto train_entries = filter_split(manifest, Split::Train);
    const auto val_entries = filter_split(manifest, Split::Val);
    if (train_entries.empty()) throw std::invalid_argument("empty train split");
    if (val_entries.empty()) throw std::invalid_argument("empty val split");
    const Dataset train_set = load_dataset(train_entries, cfg.width, cfg.height, policy);
    const Dataset val_set = load_dataset(val_entries, cfg.width, cfg.height, policy);
    return train(train_set, val_set, cfg);
}

std::vector<ProbMask> predict_all(const SegmenterParams& params, const Dataset& data) {
    std::vector<ProbMask> out(data.size());
    parallel_for(data.size(), [&](std::size_t i) { out[i] = predict(params, normalize(data.images[i])); });
    return out;
}

EvalReport evaluate(const SegmenterParams& params, const Dataset& data, double cut) {
    if (data.size() == 0) throw std::invalid_argument("empty evaluation split");
    require_masks(data, "evaluation");
    const auto probs = predict_all(params, data);
    std::vector<BinaryMask> preds;
    std::vector<BinaryMask> targets;
    for (std::size_t i = 0; i < data.size(); ++i) {
        preds.push_back(binarize(probs[i], cut));
        targets.push_back(*data.masks[i]);
    }
    return evaluate_masks(preds, targets);
}

EvalReport evaluate_pseudo_masks(const Dataset& data, const ThresholdMethod& method) {
    if (data.size() == 0) throw std::invalid_argument("empty evaluation split");
    require_masks(data, "evaluation");
    std::vector<BinaryMask> preds(data.size());
    parallel_for(data.size(), [&](std::size_t i) { preds[i] = pseudo_label(data.images[i], method, data.invert[i]); });
    std::vector<BinaryMask> targets;
    for (const auto& m : data.masks) targets.push_back(*m);
    return evaluate_masks(preds, targets);
}

MetricSummary summarize(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("no values to summarize");
    MetricSummary s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

MultiSeedResult aggregate_runs(std::vector<SeedRun> runs) {
    if (runs.empty()) throw std::invalid_argument("at least one seed is required");
    std::stable_sort(runs.begin(), runs.end(), [](const SeedRun& a, const SeedRun& b) { return a.seed < b.seed; });
    auto collect = [&](double EvalReport::*field) {
        std::vector<double> v;
        for (const auto& r : runs) v.push_back(r.test.*field);
        return summarize(v);
    };
    MultiSeedResult out;
    out.iou_macro = collect(&EvalReport::iou_macro);
    out.iou_micro = collect(&EvalReport::iou_micro);
    out.recall = collect(&EvalReport::recall);
    out.accuracy = collect(&EvalReport::accuracy);
    out.runs = std::move(runs);
    return out;
}

MultiSeedResult multi_seed_run(const Dataset& train_set, const Dataset& val_set, const Dataset& test_set,
                               const TrainConfig& cfg, std::span<const std::uint64_t> seeds) {
    if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
    std::vector<SeedRun> runs(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t k) {
        TrainConfig c = cfg;
        c.seed = seeds[k];
        TrainResult r = train(train_set, val_set, c);
        runs[k] = {seeds[k], std::move(r.record), evaluate(r.params, test_set)};
    });
    return aggregate_runs(std::move(runs));
}

fs::path run_directory(const fs::path& root, const TrainConfig& cfg) {
    return root / config_hash(cfg) / std::to_string(cfg.seed);
}

void write_history_csv(const fs::path& path, const RunRecord& record) {
    auto out = open_out(path);
    out << "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < record.val_loss.size(); ++e) {
        out << (e + 1) << ',' << format_double(record.train_loss[e]) << ',' << format_double(record.val_loss[e])
            << '\n';
    }
}

std::string metrics_csv_row(const MetricsRow& row) {
    const EvalReport& r = row.report;
    return row.split + ',' + std::to_string(row.seed) + ',' + row.method + ',' + row.loss + ',' +
           format_double(r.iou_macro) + ',' + format_double(r.iou_micro) + ',' + format_double(r.recall) + ',' +
           format_double(r.accuracy) + ',' + to_string(r.collapse);
}

void write_metrics_csv(const fs::path& path, std::span<const MetricsRow> rows) {
    auto out = open_out(path);
    out << kMetricsHeader << '\n';
    for (const auto& row : rows) out << metrics_csv_row(row) << '\n';
}

fs::path write_run_artifacts(const fs::path& root, const TrainConfig& cfg, const TrainResult& result) {
    const fs::path dir = run_directory(root, cfg);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error(dir.string() + ": cannot create run directory");

    save_checkpoint(dir / "checkpoint.bin", result.params);
    save_checkpoint_meta(dir / "checkpoint.meta", {{"seed", std::to_string(cfg.seed)},
                                                   {"config_hash", result.record.config_hash},
                                                   {"epoch", std::to_string(result.record.best_epoch)}});
    write_history_csv(dir / "history.csv", result.record);

    auto meta = open_out(dir / "meta.txt");
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    meta << "created = " << stamp << '\n';
    meta << "config_hash = " << result.record.config_hash << '\n';
    meta << "best_epoch = " << result.record.best_epoch << '\n';
    meta << "epochs_run = " << result.record.epochs_run() << '\n';
    meta << "param_count = " << result.params.size() << '\n';
    meta << "input_normalization = intensity / 255\n";
    meta << "init = he_normal mt19937_64\n";
    meta << "optimizer = adam\n";
    for (const auto& [k, v] : config_to_map(cfg)) meta << k << " = " << v << '\n';
    return dir;
}

}  // namespace sass
