#include "sassseg/thresholding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace sass {

namespace {

__extension__ typedef __int128 int128;

// Class statistics accumulated as exact integers. Keeping the scatter
// numerator w*S2 - S1^2 integral makes scores depend only on
// translation-invariant quantities, so shifted histograms tie identically.
struct ClassSums {
    std::uint64_t mass = 0;
    std::uint64_t s1 = 0;  // sum n_i * i
    std::uint64_t s2 = 0;  // sum n_i * i^2
};

void require_nonempty(const Histogram& h) {
    if (h.total == 0) throw std::invalid_argument("empty histogram");
}

ClassSums total_sums(const Histogram& h) {
    ClassSums t;
    for (std::uint64_t i = 0; i < 256; ++i) {
        const std::uint64_t n = h.counts[i];
        t.mass += n;
        t.s1 += n * i;
        t.s2 += n * i * i;
    }
    return t;
}

ClassSums minus(const ClassSums& a, const ClassSums& b) {
    return {a.mass - b.mass, a.s1 - b.s1, a.s2 - b.s2};
}

// Sum of n_i (x_i - mu)^2 over the class.
double scatter(const ClassSums& c) {
    if (c.mass == 0) return 0.0;
    const int128 num = static_cast<int128>(c.mass) * static_cast<int128>(c.s2) -
                       static_cast<int128>(c.s1) * static_cast<int128>(c.s1);
    return static_cast<double>(num) / static_cast<double>(c.mass);
}

void check_ght_params(double nu, double tau, double kappa, double omega) {
    if (!std::isfinite(nu) || nu < 0.0) throw std::invalid_argument("GHT nu must be finite and >= 0");
    if (!std::isfinite(tau) || tau < 0.0) throw std::invalid_argument("GHT tau must be finite and >= 0");
    if (!std::isfinite(kappa) || kappa < 0.0) throw std::invalid_argument("GHT kappa must be finite and >= 0");
    if (!std::isfinite(omega) || omega < 0.0 || omega > 1.0) {
        throw std::invalid_argument("GHT omega must lie in [0,1]");
    }
}

void check_window(int window) {
    if (window < 3) throw std::invalid_argument("adaptive window must be >= 3");
    if (window % 2 == 0) throw std::invalid_argument("adaptive window must be odd");
}

}  // namespace

std::string ThresholdMethod::name() const {
    struct Namer {
        std::string operator()(const FixedThreshold&) const { return "fixed"; }
        std::string operator()(const OtsuThreshold&) const { return "otsu"; }
        std::string operator()(const MetThreshold&) const { return "met"; }
        std::string operator()(const GhtThreshold&) const { return "ght"; }
        std::string operator()(const AdaptiveMeanThreshold&) const { return "amt"; }
        std::string operator()(const AdaptiveGaussianThreshold&) const { return "agt"; }
    };
    return std::visit(Namer{}, variant);
}

void ThresholdMethod::validate() const {
    if (const auto* f = std::get_if<FixedThreshold>(&variant)) {
        if (!std::isfinite(f->t)) throw std::invalid_argument("fixed threshold must be finite");
    } else if (const auto* g = std::get_if<GhtThreshold>(&variant)) {
        check_ght_params(g->nu, g->tau.value_or(0.0), g->kappa, g->omega);
    } else if (const auto* a = std::get_if<AdaptiveMeanThreshold>(&variant)) {
        check_window(a->window);
    } else if (const auto* ag = std::get_if<AdaptiveGaussianThreshold>(&variant)) {
        check_window(ag->window);
        if (ag->sigma && !(*ag->sigma > 0.0)) throw std::invalid_argument("adaptive gaussian sigma must be > 0");
    }
}

ThresholdMethod threshold_method_from_name(const std::string& name) {
    ThresholdMethod m;
    if (name == "fixed") {
        m.variant = FixedThreshold{};
    } else if (name == "otsu") {
        m.variant = OtsuThreshold{};
    } else if (name == "met") {
        m.variant = MetThreshold{};
    } else if (name == "ght") {
        m.variant = GhtThreshold{};
    } else if (name == "amt" || name == "adaptive_mean" || name == "adaptive-mean") {
        m.variant = AdaptiveMeanThreshold{};
    } else if (name == "agt" || name == "adaptive_gaussian" || name == "adaptive-gaussian") {
        m.variant = AdaptiveGaussianThreshold{};
    } else {
        throw std::invalid_argument("unknown threshold method '" + name + "'");
    }
    return m;
}

ThresholdResult resolve_score_curve(std::vector<double> scores) {
    ThresholdResult r;
    const double best = *std::max_element(scores.begin(), scores.end());
    long long sum = 0;
    for (int t = 0; t < static_cast<int>(scores.size()); ++t) {
        if (scores[static_cast<std::size_t>(t)] == best) {
            r.argmax_set.push_back(t);
            sum += t;
        }
    }
    r.threshold = static_cast<double>(sum) / static_cast<double>(r.argmax_set.size());
    r.score_curve = std::move(scores);
    return r;
}

ThresholdResult otsu_threshold(const Histogram& h) {
    require_nonempty(h);
    const ClassSums all = total_sums(h);
    const double n = static_cast<double>(all.mass);
    std::vector<double> scores(kNumCuts, 0.0);
    ClassSums lo;
    for (int t = 0; t < kNumCuts; ++t) {
        const std::uint64_t c = h.counts[static_cast<std::size_t>(t)];
        lo.mass += c;
        lo.s1 += c * static_cast<std::uint64_t>(t);
        const std::uint64_t hi_mass = all.mass - lo.mass;
        if (lo.mass == 0 || hi_mass == 0) continue;
        const std::uint64_t hi_s1 = all.s1 - lo.s1;
        // w0*w1*(mu0-mu1)^2 == (n1*s0 - n0*s1)^2 / (n0*n1*N^2)
        const double d = static_cast<double>(static_cast<int128>(hi_mass) * lo.s1 -
                                             static_cast<int128>(lo.mass) * hi_s1);
        scores[static_cast<std::size_t>(t)] =
            (d * d) / ((static_cast<double>(lo.mass) * static_cast<double>(hi_mass)) * (n * n));
    }
    return resolve_score_curve(std::move(scores));
}

ThresholdResult ght_threshold(const Histogram& h, double nu, double tau, double kappa, double omega) {
    check_ght_params(nu, tau, kappa, omega);
    require_nonempty(h);
    const ClassSums all = total_sums(h);
    std::vector<double> scores(kNumCuts, 0.0);

    ClassSums lo;
    for (int t = 0; t < kNumCuts; ++t) {
        const std::uint64_t c = h.counts[static_cast<std::size_t>(t)];
        const auto ut = static_cast<std::uint64_t>(t);
        lo.mass += c;
        lo.s1 += c * ut;
        lo.s2 += c * ut * ut;
        const ClassSums hi = minus(all, lo);

        const double w0 = std::max(static_cast<double>(lo.mass), kGhtFloor);
        const double w1 = std::max(static_cast<double>(hi.mass), kGhtFloor);
        const double d0 = scatter(lo);
        const double d1 = scatter(hi);
        const double p0 = w0 / (w0 + w1);
        const double p1 = w1 / (w0 + w1);
        const double v0 = std::max(kGhtFloor, (p0 * nu * tau * tau + d0) / (p0 * nu + w0));
        const double v1 = std::max(kGhtFloor, (p1 * nu * tau * tau + d1) / (p1 * nu + w1));
        const double f0 = -d0 / v0 - w0 * std::log(v0) + 2.0 * (w0 + kappa * omega) * std::log(w0);
        const double f1 = -d1 / v1 - w1 * std::log(v1) + 2.0 * (w1 + kappa * (1.0 - omega)) * std::log(w1);
        scores[static_cast<std::size_t>(t)] = f0 + f1;
    }
    return resolve_score_curve(std::move(scores));
}

ThresholdResult met_threshold(const Histogram& h) { return ght_threshold(h, 0.0, 0.0, 0.0, 0.5); }

BinaryMask adaptive_threshold(const GrayImage& img, AdaptiveKind kind, int window, double sigma, double c) {
    check_window(window);
    if (img.empty()) throw std::invalid_argument("empty input");
    if (kind == AdaptiveKind::Gaussian && !(sigma > 0.0)) {
        throw std::invalid_argument("adaptive gaussian sigma must be > 0");
    }
    const int r = window / 2;
    const int w = img.width;
    const int h = img.height;
    auto clamp_x = [w](int x) { return std::clamp(x, 0, w - 1); };
    auto clamp_y = [h](int y) { return std::clamp(y, 0, h - 1); };
    BinaryMask out(w, h);

    if (kind == AdaptiveKind::Mean) {
        // Integral image over the replicate-padded raster; sums stay exact.
        const int pw = w + 2 * r;
        const int ph = h + 2 * r;
        std::vector<std::int64_t> integral(static_cast<std::size_t>(pw + 1) * static_cast<std::size_t>(ph + 1), 0);
        auto I = [&](int x, int y) -> std::int64_t& {
            return integral[static_cast<std::size_t>(y) * static_cast<std::size_t>(pw + 1) + static_cast<std::size_t>(x)];
        };
        for (int y = 0; y < ph; ++y) {
            std::int64_t row = 0;
            for (int x = 0; x < pw; ++x) {
                row += img.at(clamp_x(x - r), clamp_y(y - r));
                I(x + 1, y + 1) = I(x + 1, y) + row;
            }
        }
        const double area = static_cast<double>(window) * static_cast<double>(window);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                // window centred at (x,y) covers padded [x, x+window) x [y, y+window)
                const std::int64_t s = I(x + window, y + window) - I(x, y + window) - I(x + window, y) + I(x, y);
                const double local = static_cast<double>(s) / area - c;
                out.at(x, y) = img.at(x, y) > local ? 1 : 0;
            }
        }
        return out;
    }

    std::vector<double> kernel(static_cast<std::size_t>(window));
    double ksum = 0.0;
    for (int i = 0; i < window; ++i) {
        const double d = i - r;
        kernel[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * sigma * sigma));
        ksum += kernel[static_cast<std::size_t>(i)];
    }
    for (auto& k : kernel) k /= ksum;

    std::vector<double> horiz(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int j = 0; j < window; ++j) acc += kernel[static_cast<std::size_t>(j)] * img.at(clamp_x(x + j - r), y);
            horiz[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = 0; i < window; ++i) {
                acc += kernel[static_cast<std::size_t>(i)] *
                       horiz[static_cast<std::size_t>(clamp_y(y + i - r)) * static_cast<std::size_t>(w) +
                             static_cast<std::size_t>(x)];
            }
            out.at(x, y) = img.at(x, y) > acc - c ? 1 : 0;
        }
    }
    return out;
}

BinaryMask apply_threshold(const GrayImage& img, double threshold) {
    BinaryMask m(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) m.data[i] = img.data[i] > threshold ? 1 : 0;
    return m;
}

BinaryMask invert_mask(const BinaryMask& m) {
    BinaryMask out = m;
    for (auto& v : out.data) v = static_cast<std::uint8_t>(1 - v);
    return out;
}

PseudoMask generate_pseudo_mask(const GrayImage& img, const ThresholdMethod& m) {
    m.validate();
    if (img.empty()) throw std::invalid_argument("empty input");
    PseudoMask out;

    auto from_result = [&](ThresholdResult r) {
        out.threshold = r.threshold;
        out.mask = apply_threshold(img, r.threshold);
        out.score_curve = std::move(r.score_curve);
    };

    if (const auto* f = std::get_if<FixedThreshold>(&m.variant)) {
        out.threshold = f->t;
        out.mask = apply_threshold(img, f->t);
    } else if (std::holds_alternative<OtsuThreshold>(m.variant)) {
        from_result(otsu_threshold(compute_histogram(img)));
    } else if (std::holds_alternative<MetThreshold>(m.variant)) {
        from_result(met_threshold(compute_histogram(img)));
    } else if (const auto* g = std::get_if<GhtThreshold>(&m.variant)) {
        const Histogram h = compute_histogram(img);
        const double tau = g->tau ? *g->tau : histogram_stddev(h);
        from_result(ght_threshold(h, g->nu, tau, g->kappa, g->omega));
    } else if (const auto* a = std::get_if<AdaptiveMeanThreshold>(&m.variant)) {
        out.mask = adaptive_threshold(img, AdaptiveKind::Mean, a->window, 0.0, a->c);
    } else if (const auto* ag = std::get_if<AdaptiveGaussianThreshold>(&m.variant)) {
        const double sigma = ag->sigma ? *ag->sigma : ag->window / 6.0;
        out.mask = adaptive_threshold(img, AdaptiveKind::Gaussian, ag->window, sigma, ag->c);
    }
    if (m.invert) out.mask = invert_mask(out.mask);
    return out;
}

}  // namespace sass
