#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sassseg/imaging.hpp"
#include "sassseg/raster.hpp"

namespace sass {

/// Number of candidate cuts over 256 bins: cut t splits {0..t} | {t+1..255}.
inline constexpr int kNumCuts = 255;

/// Floor applied to class masses and variances in the GHT objective.
inline constexpr double kGhtFloor = 1e-30;

struct FixedThreshold {
    double t = 127.0;
};
struct OtsuThreshold {};
struct MetThreshold {};
struct GhtThreshold {
    double nu = 1.0;
    std::optional<double> tau;  ///< unset: use the image's intensity std dev
    double kappa = 0.0;
    double omega = 0.5;
};
struct AdaptiveMeanThreshold {
    int window = 11;
    double c = 2.0;
};
struct AdaptiveGaussianThreshold {
    int window = 11;
    std::optional<double> sigma;  ///< unset: window / 6
    double c = 2.0;
};

struct ThresholdMethod {
    using Variant = std::variant<FixedThreshold, OtsuThreshold, MetThreshold, GhtThreshold,
                                 AdaptiveMeanThreshold, AdaptiveGaussianThreshold>;
    Variant variant = OtsuThreshold{};
    bool invert = false;

    [[nodiscard]] bool is_global() const noexcept {
        return !std::holds_alternative<AdaptiveMeanThreshold>(variant) &&
               !std::holds_alternative<AdaptiveGaussianThreshold>(variant);
    }
    /// Short identifier: fixed, otsu, met, ght, amt, agt.
    [[nodiscard]] std::string name() const;
    /// Throws std::invalid_argument when a parameter is out of range.
    void validate() const;
};

/// Parses fixed|otsu|met|ght|amt|agt (also adaptive_mean / adaptive_gaussian)
/// into a method with default parameters.
ThresholdMethod threshold_method_from_name(const std::string& name);

/// Outcome of a global histogram search. `threshold` is the mean of all
/// maximizing cuts, so it may be fractional; masks use strict `>`.
struct ThresholdResult {
    double threshold = 0.0;
    std::vector<double> score_curve;  ///< kNumCuts entries, larger is better
    std::vector<int> argmax_set;
};

/// Between-class variance w0*w1*(mu0-mu1)^2 per cut; empty classes score 0.
ThresholdResult otsu_threshold(const Histogram& h);

/// Generalized histogram thresholding objective f0+f1 per cut.
ThresholdResult ght_threshold(const Histogram& h, double nu, double tau, double kappa, double omega);

/// Minimum error thresholding: ght_threshold with nu=0, kappa=0, omega=0.5.
ThresholdResult met_threshold(const Histogram& h);

/// Builds the result from a score curve: argmax set under exact equality and
/// the mean-of-maximizers tie rule.
ThresholdResult resolve_score_curve(std::vector<double> scores);

enum class AdaptiveKind { Mean, Gaussian };

/// Local threshold T = (window mean | normalized Gaussian-weighted mean) - c
/// with replicate padding; mask = pixel > T.
BinaryMask adaptive_threshold(const GrayImage& img, AdaptiveKind kind, int window, double sigma, double c);

BinaryMask apply_threshold(const GrayImage& img, double threshold);
BinaryMask invert_mask(const BinaryMask& m);

struct PseudoMask {
    BinaryMask mask;
    std::optional<double> threshold;  ///< set for global methods
    std::vector<double> score_curve;  ///< set for histogram-search methods
};

/// Per-image pseudo-label. Global methods compute a fresh threshold from this
/// image's histogram.
PseudoMask generate_pseudo_mask(const GrayImage& img, const ThresholdMethod& m);

}  // namespace sass
