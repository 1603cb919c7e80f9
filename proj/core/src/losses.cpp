#include "sassseg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sass {

namespace {

void check_shapes(const ProbMask& p, const BinaryMask& y) {
    if (!p.same_shape(y)) {
        throw std::invalid_argument("prediction " + std::to_string(p.width) + "x" + std::to_string(p.height) +
                                    " does not match target " + std::to_string(y.width) + "x" +
                                    std::to_string(y.height));
    }
    if (p.empty()) throw std::invalid_argument("empty input");
}

bool clamped(double p) { return p < kProbClamp || p > 1.0 - kProbClamp; }

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

// Shared by tversky and focal-tversky: index value and dTI/dp_i.
struct TverskyIndex {
    double index = 0.0;
    std::vector<double> dindex;
};

TverskyIndex tversky_index(const ProbMask& p, const BinaryMask& y, double alpha, double beta, double eps) {
    const SoftConfusion c = soft_confusion(p, y);
    const double num = c.tp + eps;
    const double den = c.tp + alpha * c.fn + beta * c.fp + eps;
    TverskyIndex r;
    r.index = num / den;
    r.dindex.resize(p.size());
    const double den2 = den * den;
    // d(tp)/dp = y, d(fn)/dp = -y, d(fp)/dp = 1 - y
    const double dden_fg = 1.0 - alpha;
    const double dden_bg = beta;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (y.data[i]) {
            r.dindex[i] = (den - num * dden_fg) / den2;
        } else {
            r.dindex[i] = -num * dden_bg / den2;
        }
    }
    return r;
}

}  // namespace

std::string LossSpec::name() const {
    struct Namer {
        std::string operator()(const BceLoss&) const { return "bce"; }
        std::string operator()(const FocalLoss&) const { return "focal"; }
        std::string operator()(const DiceLoss&) const { return "dice"; }
        std::string operator()(const TverskyLoss&) const { return "tversky"; }
        std::string operator()(const FocalTverskyLoss&) const { return "focal_tversky"; }
    };
    return std::visit(Namer{}, variant);
}

void LossSpec::validate() const {
    auto nonneg = [](double v, const char* what) {
        if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument(std::string(what) + " must be >= 0");
    };
    auto positive = [](double v, const char* what) {
        if (!std::isfinite(v) || v <= 0.0) throw std::invalid_argument(std::string(what) + " must be > 0");
    };
    if (const auto* f = std::get_if<FocalLoss>(&variant)) {
        if (!(f->alpha >= 0.0 && f->alpha <= 1.0)) throw std::invalid_argument("focal alpha must lie in [0,1]");
        nonneg(f->gamma, "focal gamma");
    } else if (const auto* d = std::get_if<DiceLoss>(&variant)) {
        positive(d->eps, "dice eps");
    } else if (const auto* t = std::get_if<TverskyLoss>(&variant)) {
        nonneg(t->alpha, "tversky alpha");
        nonneg(t->beta, "tversky beta");
        positive(t->eps, "tversky eps");
    } else if (const auto* ft = std::get_if<FocalTverskyLoss>(&variant)) {
        nonneg(ft->alpha, "focal-tversky alpha");
        nonneg(ft->beta, "focal-tversky beta");
        positive(ft->gamma_exp, "focal-tversky gamma_exp");
        positive(ft->eps, "focal-tversky eps");
    }
}

LossSpec loss_from_name(const std::string& name) {
    LossSpec s;
    if (name == "bce") {
        s.variant = BceLoss{};
    } else if (name == "focal") {
        s.variant = FocalLoss{};
    } else if (name == "dice") {
        s.variant = DiceLoss{};
    } else if (name == "tversky") {
        s.variant = TverskyLoss{};
    } else if (name == "focal_tversky" || name == "focal-tversky" || name == "ftl") {
        s.variant = FocalTverskyLoss{};
    } else {
        throw std::invalid_argument("unknown loss '" + name + "'");
    }
    return s;
}

SoftConfusion soft_confusion(const ProbMask& p, const BinaryMask& y) {
    check_shapes(p, y);
    SoftConfusion c;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = p.data[i];
        if (y.data[i]) {
            c.tp += pi;
            c.fn += 1.0 - pi;
        } else {
            c.fp += pi;
            c.tn += 1.0 - pi;
        }
    }
    return c;
}

LossValue bce_loss(const ProbMask& p, const BinaryMask& y) {
    check_shapes(p, y);
    const double inv_n = 1.0 / static_cast<double>(p.size());
    LossValue out;
    out.grad.assign(p.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pc = clamp_prob(p.data[i]);
        const bool fg = y.data[i] != 0;
        acc -= fg ? std::log(pc) : std::log(1.0 - pc);
        if (!clamped(p.data[i])) out.grad[i] = inv_n * (fg ? -1.0 / pc : 1.0 / (1.0 - pc));
    }
    out.value = acc * inv_n;
    return out;
}

LossValue focal_loss(const ProbMask& p, const BinaryMask& y, double alpha, double gamma) {
    check_shapes(p, y);
    const double inv_n = 1.0 / static_cast<double>(p.size());
    LossValue out;
    out.grad.assign(p.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool fg = y.data[i] != 0;
        const double pc = clamp_prob(p.data[i]);
        const double pt = fg ? pc : 1.0 - pc;
        const double at = fg ? alpha : 1.0 - alpha;
        const double miss = 1.0 - pt;
        const double log_pt = std::log(pt);
        acc += -at * std::pow(miss, gamma) * log_pt;
        if (!clamped(p.data[i])) {
            const double dpt = at * (gamma * std::pow(miss, gamma - 1.0) * log_pt - std::pow(miss, gamma) / pt);
            out.grad[i] = inv_n * (fg ? dpt : -dpt);
        }
    }
    out.value = acc * inv_n;
    return out;
}

LossValue dice_loss(const ProbMask& p, const BinaryMask& y, double eps) {
    const SoftConfusion c = soft_confusion(p, y);
    const double num = 2.0 * c.tp + eps;
    const double den = 2.0 * c.tp + c.fp + c.fn + eps;
    LossValue out;
    out.value = 1.0 - num / den;
    out.grad.resize(p.size());
    // d(num)/dp = 2y; d(den)/dp = 2y + (1-y) - y = 1
    const double den2 = den * den;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double dnum = y.data[i] ? 2.0 : 0.0;
        out.grad[i] = -(dnum * den - num) / den2;
    }
    return out;
}

LossValue tversky_loss(const ProbMask& p, const BinaryMask& y, double alpha, double beta, double eps) {
    TverskyIndex ti = tversky_index(p, y, alpha, beta, eps);
    LossValue out;
    out.value = 1.0 - ti.index;
    out.grad = std::move(ti.dindex);
    for (auto& g : out.grad) g = -g;
    return out;
}

LossValue focal_tversky_loss(const ProbMask& p, const BinaryMask& y, double alpha, double beta, double gamma_exp,
                             double eps) {
    if (!(gamma_exp > 0.0)) throw std::invalid_argument("focal-tversky gamma_exp must be > 0");
    TverskyIndex ti = tversky_index(p, y, alpha, beta, eps);
    const double base = std::max(0.0, 1.0 - ti.index);
    LossValue out;
    out.value = std::pow(base, gamma_exp);
    out.grad.assign(p.size(), 0.0);
    // At base == 0 the derivative is unbounded for gamma_exp < 1; treat the
    // perfect-agreement point like a clamped region.
    if (base > 0.0) {
        const double outer = gamma_exp * std::pow(base, gamma_exp - 1.0);
        for (std::size_t i = 0; i < p.size(); ++i) out.grad[i] = -outer * ti.dindex[i];
    }
    return out;
}

LossValue compute_loss(const LossSpec& spec, const ProbMask& p, const BinaryMask& y) {
    struct Dispatch {
        const ProbMask& p;
        const BinaryMask& y;
        LossValue operator()(const BceLoss&) const { return bce_loss(p, y); }
        LossValue operator()(const FocalLoss& f) const { return focal_loss(p, y, f.alpha, f.gamma); }
        LossValue operator()(const DiceLoss& d) const { return dice_loss(p, y, d.eps); }
        LossValue operator()(const TverskyLoss& t) const { return tversky_loss(p, y, t.alpha, t.beta, t.eps); }
        LossValue operator()(const FocalTverskyLoss& f) const {
            return focal_tversky_loss(p, y, f.alpha, f.beta, f.gamma_exp, f.eps);
        }
    };
    return std::visit(Dispatch{p, y}, spec.variant);
}

}  // namespace sass
