#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sassseg/metrics.hpp"
#include "sassseg/pipeline.hpp"
#include "sassseg/segmenter.hpp"
#include "sassseg/train_config.hpp"

namespace sass {

struct RunRecord {
    std::vector<double> train_loss;  ///< mean per-image loss of each epoch, accumulated while training
    std::vector<double> val_loss;    ///< mean per-image loss on the unaugmented val split after each epoch
    int best_epoch = 0;              ///< 1-based epoch whose val loss is minimal (first on ties)
    std::string config_hash;
    std::uint64_t seed = 0;

    [[nodiscard]] int epochs_run() const noexcept { return static_cast<int>(val_loss.size()); }
    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct TrainResult {
    SegmenterParams params;  ///< parameters from the best epoch
    RunRecord record;
};

/// Label the network is trained against for one (already augmented) image:
/// the pseudo-mask in selfsup mode, honouring the per-entry invert flag.
BinaryMask pseudo_label(const GrayImage& img, const ThresholdMethod& method, bool entry_invert);

/// Mean per-image loss over `data` without augmentation. Labels are
/// pseudo-masks in selfsup mode and ground truth in supervised mode.
double validation_loss(const SegmenterParams& params, const Dataset& data, const TrainConfig& cfg);

/// Images in both datasets must already be cfg.width x cfg.height. Supervised
/// mode requires every train and val mask. Throws std::invalid_argument on an
/// empty train or val split.
TrainResult train(const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg);

/// Loads the train and val splits of a manifest and trains. In selfsup mode
/// mask files are never opened.
TrainResult train(const std::vector<ManifestEntry>& manifest, const TrainConfig& cfg);

std::vector<ProbMask> predict_all(const SegmenterParams& params, const Dataset& data);

/// Forward, binarize at `cut`, and score against ground truth. Throws when a
/// mask is missing.
EvalReport evaluate(const SegmenterParams& params, const Dataset& data, double cut = kDefaultCut);

/// Pseudo-mask quality: generate_pseudo_mask on each image against its ground truth.
EvalReport evaluate_pseudo_masks(const Dataset& data, const ThresholdMethod& method);

struct SeedRun {
    std::uint64_t seed = 0;
    RunRecord record;
    EvalReport test;
};

struct MetricSummary {
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation; 0 for a single run
};

struct MultiSeedResult {
    std::vector<SeedRun> runs;  ///< sorted by seed (stable)
    MetricSummary iou_macro;
    MetricSummary iou_micro;
    MetricSummary recall;
    MetricSummary accuracy;
};

MetricSummary summarize(std::span<const double> values);

/// Aggregates runs after a stable sort by seed, so the result does not depend
/// on the order seeds were supplied.
MultiSeedResult aggregate_runs(std::vector<SeedRun> runs);

/// Trains and evaluates one run per seed (cfg.seed replaced). Seeds run in
/// parallel; each run is independent of the others.
MultiSeedResult multi_seed_run(const Dataset& train_set, const Dataset& val_set, const Dataset& test_set,
                               const TrainConfig& cfg, std::span<const std::uint64_t> seeds);

// Run directory layout: <root>/<config_hash>/<seed>/ with history.csv,
// metrics.csv, checkpoint.bin, checkpoint.meta and meta.txt.
std::filesystem::path run_directory(const std::filesystem::path& root, const TrainConfig& cfg);

void write_history_csv(const std::filesystem::path& path, const RunRecord& record);

struct MetricsRow {
    std::string split;
    std::uint64_t seed = 0;
    std::string method;
    std::string loss;
    EvalReport report;
};

inline constexpr const char* kMetricsHeader = "split,seed,method,loss,iou_macro,iou_micro,recall,accuracy,collapse";
std::string metrics_csv_row(const MetricsRow& row);
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRow> rows);

/// Writes checkpoint, sidecar, history and meta.txt (resolved config plus a
/// timestamp) for one trained run and returns its directory.
std::filesystem::path write_run_artifacts(const std::filesystem::path& root, const TrainConfig& cfg,
                                          const TrainResult& result);

}  // namespace sass
