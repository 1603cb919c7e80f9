#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config_file.hpp"

namespace sass::cli {

struct GlobalOptions {
    std::optional<std::filesystem::path> config;
    std::vector<std::string> set;  ///< section.key=value, applied after the config file
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = "out";
};

/// Config file, then --set, then `extra` (command flags), then --seed.
ResolvedConfig resolve(const GlobalOptions& g, const std::vector<std::string>& extra = {});

struct SynthArgs {
    std::optional<std::size_t> n;  ///< unassigned split
    std::size_t train = 0;
    std::size_t val = 0;
    std::size_t test = 0;
    int width = 64;
    int height = 64;
};
void cmd_synth(const GlobalOptions& g, const SynthArgs& a);

struct PseudoMaskArgs {
    std::optional<std::string> manifest;
    std::optional<std::string> split;  ///< restrict to one split
    std::vector<std::string> method_overrides;  ///< threshold.* settings from flags
    bool dump_scores = false;
};
/// Writes <out>/masks/<stem>.png, <out>/thresholds.csv (image,threshold) and,
/// with dump_scores, <out>/scores/<stem>.csv (cut,score) for histogram methods.
void cmd_pseudo_mask(const GlobalOptions& g, const PseudoMaskArgs& a);

struct TrainArgs {
    std::optional<std::string> manifest;
    std::vector<std::uint64_t> seeds;  ///< empty: the configured seed
    std::vector<std::string> overrides;
};
/// One run directory per seed under <out>/<config_hash>/<seed>/. With more
/// than one seed also writes <out>/<config_hash>/aggregate.csv.
void cmd_train(const GlobalOptions& g, const TrainArgs& a);

struct EvalArgs {
    std::filesystem::path checkpoint;
    std::optional<std::string> manifest;
    std::string split = "test";
    double cut = 0.5;
};
/// Scores a checkpoint on one split and writes <out>/metrics.csv. The config
/// comes from the run's meta.txt when it sits next to the checkpoint.
void cmd_eval(const GlobalOptions& g, const EvalArgs& a);

struct AblateArgs {
    std::string axis;  ///< thresholds | losses | epochs | batch
    std::vector<std::string> values;  ///< empty: the axis defaults
    std::optional<std::string> manifest;
    std::vector<std::uint64_t> seeds;
};
/// Writes <out>/ablate_<axis>.csv (per seed) and ablate_<axis>_summary.csv.
void cmd_ablate(const GlobalOptions& g, const AblateArgs& a);

}  // namespace sass::cli
