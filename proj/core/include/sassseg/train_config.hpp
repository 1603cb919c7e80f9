#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "sassseg/losses.hpp"
#include "sassseg/pipeline.hpp"
#include "sassseg/segmenter.hpp"
#include "sassseg/thresholding.hpp"

namespace sass {

enum class TrainMode { SelfSupervised, Supervised };

std::string to_string(TrainMode m);
TrainMode train_mode_from_string(const std::string& s);

struct TrainConfig {
    TrainMode mode = TrainMode::SelfSupervised;
    ThresholdMethod threshold_method{};
    LossSpec loss{};
    int epochs = 50;
    int batch_size = 16;
    double lr = 1e-3;
    int patience = 5;  ///< 0 disables early stopping
    std::uint64_t seed = 0;
    int width = 64;  ///< training and evaluation resize target
    int height = 64;
    AugmentSpec augment{};  ///< resize and seed fields are overridden by width/height/seed
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const;
    [[nodiscard]] AdamConfig adam() const { return {lr, adam_beta1, adam_beta2, adam_eps}; }
};

// Flat `section.key -> value` view shared by the config file, --set overrides
// and run metadata. Sections: train, threshold, loss, augment, adam. Only the
// parameters relevant to the selected threshold method and loss appear.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap config_to_map(const TrainConfig& cfg);

/// Builds a config from defaults plus `values`. Throws std::invalid_argument
/// for unknown keys, unparsable values, parameters that do not apply to the
/// chosen method or loss, and invalid results.
TrainConfig config_from_map(const ConfigMap& values);

/// config_to_map without train.seed, one `key = value` per line.
std::string canonical_config(const TrainConfig& cfg);

/// 16 hex digits of FNV-1a 64 over canonical_config.
std::string config_hash(const TrainConfig& cfg);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace sass
