#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>

#include "sassseg/raster.hpp"

namespace sass {

struct HardConfusion {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    [[nodiscard]] std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
    HardConfusion& operator+=(const HardConfusion& o) noexcept {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
    friend bool operator==(const HardConfusion&, const HardConfusion&) = default;
};

enum class Collapse { None, BackgroundCollapse, ForegroundCollapse };

std::string to_string(Collapse c);

/// Heuristic thresholds for the collapse diagnostic.
inline constexpr double kCollapseIouCeiling = 0.01;
inline constexpr double kCollapseAccuracyFactor = 0.9;
inline constexpr double kCollapseMatchTolerance = 0.01;

inline constexpr double kDefaultCut = 0.5;

/// 1 where p > cut (strict).
BinaryMask binarize(const ProbMask& p, double cut = kDefaultCut);

HardConfusion hard_confusion(const BinaryMask& pred, const BinaryMask& target);

/// |pred & target| / |pred | target|; 1.0 when both masks are empty.
double iou(const BinaryMask& pred, const BinaryMask& target);
double iou(const HardConfusion& c);

/// recall = tp/(tp+fn) (1.0 without positives), accuracy = (tp+tn)/N.
std::pair<double, double> recall_accuracy(const HardConfusion& c);

/// BackgroundCollapse: iou < 0.01 and accuracy >= 0.9*(1 - fg_fraction).
/// ForegroundCollapse: accuracy and iou both within 0.01 of fg_fraction, the
/// signature of predicting foreground everywhere.
Collapse collapse_diagnose(double iou, double accuracy, double fg_fraction);

/// Dataset-level report. Macro IoU averages per-image IoU; micro IoU, recall,
/// accuracy and the collapse diagnosis use the pooled confusion.
struct EvalReport {
    std::size_t images = 0;
    double iou_macro = 0.0;
    double iou_micro = 0.0;
    double recall = 0.0;
    double accuracy = 0.0;
    double fg_fraction = 0.0;  ///< pooled target foreground fraction
    HardConfusion pooled;
    Collapse collapse = Collapse::None;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Throws std::invalid_argument on empty input or mismatched lengths/dims.
EvalReport evaluate_masks(std::span<const BinaryMask> preds, std::span<const BinaryMask> targets);

}  // namespace sass
