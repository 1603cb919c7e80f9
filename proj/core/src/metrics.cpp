#include "sassseg/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

namespace sass {

std::string to_string(Collapse c) {
    switch (c) {
        case Collapse::None:
            return "none";
        case Collapse::BackgroundCollapse:
            return "background";
        case Collapse::ForegroundCollapse:
            return "foreground";
    }
    return "none";
}

BinaryMask binarize(const ProbMask& p, double cut) {
    BinaryMask m(p.width, p.height);
    for (std::size_t i = 0; i < p.size(); ++i) m.data[i] = p.data[i] > cut ? 1 : 0;
    return m;
}

HardConfusion hard_confusion(const BinaryMask& pred, const BinaryMask& target) {
    if (!pred.same_shape(target)) throw std::invalid_argument("prediction and target dimensions differ");
    HardConfusion c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred.data[i] != 0;
        const bool t = target.data[i] != 0;
        if (p && t) {
            ++c.tp;
        } else if (p) {
            ++c.fp;
        } else if (t) {
            ++c.fn;
        } else {
            ++c.tn;
        }
    }
    return c;
}

double iou(const HardConfusion& c) {
    const std::uint64_t uni = c.tp + c.fp + c.fn;
    if (uni == 0) return 1.0;
    return static_cast<double>(c.tp) / static_cast<double>(uni);
}

double iou(const BinaryMask& pred, const BinaryMask& target) { return iou(hard_confusion(pred, target)); }

std::pair<double, double> recall_accuracy(const HardConfusion& c) {
    const std::uint64_t n = c.total();
    if (n == 0) throw std::invalid_argument("empty confusion");
    const std::uint64_t pos = c.tp + c.fn;
    const double recall = pos == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(pos);
    const double accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
    return {recall, accuracy};
}

Collapse collapse_diagnose(double iou_value, double accuracy, double fg_fraction) {
    if (iou_value < kCollapseIouCeiling && accuracy >= kCollapseAccuracyFactor * (1.0 - fg_fraction)) {
        return Collapse::BackgroundCollapse;
    }
    if (std::abs(accuracy - fg_fraction) <= kCollapseMatchTolerance &&
        std::abs(iou_value - fg_fraction) <= kCollapseMatchTolerance) {
        return Collapse::ForegroundCollapse;
    }
    return Collapse::None;
}

EvalReport evaluate_masks(std::span<const BinaryMask> preds, std::span<const BinaryMask> targets) {
    if (preds.empty()) throw std::invalid_argument("no masks to evaluate");
    if (preds.size() != targets.size()) throw std::invalid_argument("prediction and target counts differ");
    EvalReport r;
    r.images = preds.size();
    double iou_sum = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const HardConfusion c = hard_confusion(preds[i], targets[i]);
        iou_sum += iou(c);
        r.pooled += c;
    }
    r.iou_macro = iou_sum / static_cast<double>(preds.size());
    r.iou_micro = iou(r.pooled);
    std::tie(r.recall, r.accuracy) = recall_accuracy(r.pooled);
    r.fg_fraction = static_cast<double>(r.pooled.tp + r.pooled.fn) / static_cast<double>(r.pooled.total());
    r.collapse = collapse_diagnose(r.iou_micro, r.accuracy, r.fg_fraction);
    return r;
}

}  // namespace sass
