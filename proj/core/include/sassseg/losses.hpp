#pragma once

#include <string>
#include <variant>
#include <vector>

#include "sassseg/raster.hpp"

namespace sass {

/// Probabilities entering a logarithm are clamped to [kProbClamp, 1-kProbClamp].
inline constexpr double kProbClamp = 1e-7;

struct SoftConfusion {
    double tp = 0.0;
    double fp = 0.0;
    double fn = 0.0;
    double tn = 0.0;
};

/// Loss value and its gradient with respect to each predicted probability.
struct LossValue {
    double value = 0.0;
    std::vector<double> grad;
};

struct BceLoss {};
struct FocalLoss {
    double alpha = 0.25;
    double gamma = 2.0;
};
struct DiceLoss {
    double eps = 1e-6;
};
struct TverskyLoss {
    double alpha = 0.7;  ///< weight on false negatives
    double beta = 0.3;   ///< weight on false positives
    double eps = 1e-6;
};
struct FocalTverskyLoss {
    double alpha = 0.7;
    double beta = 0.3;
    double gamma_exp = 0.75;
    double eps = 1e-6;
};

struct LossSpec {
    std::variant<BceLoss, FocalLoss, DiceLoss, TverskyLoss, FocalTverskyLoss> variant = FocalTverskyLoss{};

    /// bce, focal, dice, tversky, focal_tversky
    [[nodiscard]] std::string name() const;
    void validate() const;
};

LossSpec loss_from_name(const std::string& name);

SoftConfusion soft_confusion(const ProbMask& p, const BinaryMask& y);

LossValue bce_loss(const ProbMask& p, const BinaryMask& y);
LossValue focal_loss(const ProbMask& p, const BinaryMask& y, double alpha, double gamma);
LossValue dice_loss(const ProbMask& p, const BinaryMask& y, double eps);
LossValue tversky_loss(const ProbMask& p, const BinaryMask& y, double alpha, double beta, double eps);
LossValue focal_tversky_loss(const ProbMask& p, const BinaryMask& y, double alpha, double beta,
                             double gamma_exp, double eps);

/// Dispatches on the spec; the loss is per image.
LossValue compute_loss(const LossSpec& spec, const ProbMask& p, const BinaryMask& y);

}  // namespace sass
