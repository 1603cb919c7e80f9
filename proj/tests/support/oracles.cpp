#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace sass::test {

namespace {

struct ClassStats {
    double mass = 0.0;
    double mean = 0.0;
    double scatter = 0.0;  // sum n_i (i - mean)^2
};

ClassStats class_stats(const Histogram& h, int lo, int hi) {
    ClassStats s;
    double sum = 0.0;
    for (int i = lo; i <= hi; ++i) {
        s.mass += static_cast<double>(h.counts[static_cast<std::size_t>(i)]);
        sum += static_cast<double>(h.counts[static_cast<std::size_t>(i)]) * i;
    }
    if (s.mass == 0.0) return s;
    s.mean = sum / s.mass;
    for (int i = lo; i <= hi; ++i) {
        const double d = i - s.mean;
        s.scatter += static_cast<double>(h.counts[static_cast<std::size_t>(i)]) * d * d;
    }
    return s;
}

}  // namespace

std::vector<double> otsu_scores_bruteforce(const Histogram& h) {
    std::vector<double> out(255, 0.0);
    const double n = static_cast<double>(h.total);
    for (int t = 0; t < 255; ++t) {
        const ClassStats a = class_stats(h, 0, t);
        const ClassStats b = class_stats(h, t + 1, 255);
        if (a.mass == 0.0 || b.mass == 0.0) continue;
        const double w0 = a.mass / n;
        const double w1 = b.mass / n;
        out[static_cast<std::size_t>(t)] = w0 * w1 * (a.mean - b.mean) * (a.mean - b.mean);
    }
    return out;
}

std::vector<double> met_scores_bruteforce(const Histogram& h) {
    constexpr double floor = 1e-30;
    std::vector<double> out(255, 0.0);
    for (int t = 0; t < 255; ++t) {
        double f = 0.0;
        for (const auto& s : {class_stats(h, 0, t), class_stats(h, t + 1, 255)}) {
            const double w = std::max(s.mass, floor);
            const double v = std::max(floor, s.scatter / w);
            f += -s.scatter / v - w * std::log(v) + 2.0 * w * std::log(w);
        }
        out[static_cast<std::size_t>(t)] = f;
    }
    return out;
}

std::vector<double> kittler_illingworth_bruteforce(const Histogram& h) {
    constexpr double floor = 1e-30;
    std::vector<double> out(255, 0.0);
    const double n = static_cast<double>(h.total);
    for (int t = 0; t < 255; ++t) {
        double j = 0.0;
        for (const auto& s : {class_stats(h, 0, t), class_stats(h, t + 1, 255)}) {
            const double p = std::max(s.mass, floor) / n;
            const double var = std::max(floor, s.scatter / std::max(s.mass, floor));
            j += p * std::log(var) - 2.0 * p * std::log(p);
        }
        out[static_cast<std::size_t>(t)] = j;
    }
    return out;
}

std::vector<int> argmax_set(std::span<const double> scores) {
    const double best = *std::max_element(scores.begin(), scores.end());
    std::vector<int> out;
    for (std::size_t t = 0; t < scores.size(); ++t) {
        if (scores[t] == best) out.push_back(static_cast<int>(t));
    }
    return out;
}

std::vector<int> argmin_set(std::span<const double> scores) {
    const double best = *std::min_element(scores.begin(), scores.end());
    std::vector<int> out;
    for (std::size_t t = 0; t < scores.size(); ++t) {
        if (scores[t] == best) out.push_back(static_cast<int>(t));
    }
    return out;
}

BinaryMask adaptive_mean_bruteforce(const GrayImage& img, int window, double c) {
    const int r = window / 2;
    BinaryMask out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            long long sum = 0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    sum += img.at(std::clamp(x + dx, 0, img.width - 1), std::clamp(y + dy, 0, img.height - 1));
                }
            }
            const double t = static_cast<double>(sum) / (window * window) - c;
            out.at(x, y) = img.at(x, y) > t ? 1 : 0;
        }
    }
    return out;
}

BinaryMask adaptive_gaussian_bruteforce(const GrayImage& img, int window, double sigma, double c,
                                        std::vector<double>* local) {
    const int r = window / 2;
    std::vector<double> w2(static_cast<std::size_t>(window * window));
    double total = 0.0;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            w2[static_cast<std::size_t>((dy + r) * window + (dx + r))] = v;
            total += v;
        }
    }
    BinaryMask out(img.width, img.height);
    if (local) local->assign(img.size(), 0.0);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    acc += w2[static_cast<std::size_t>((dy + r) * window + (dx + r))] *
                           img.at(std::clamp(x + dx, 0, img.width - 1), std::clamp(y + dy, 0, img.height - 1));
                }
            }
            const double t = acc / total - c;
            if (local) (*local)[static_cast<std::size_t>(y * img.width + x)] = t;
            out.at(x, y) = img.at(x, y) > t ? 1 : 0;
        }
    }
    return out;
}

double central_difference(const std::function<double(std::span<const double>)>& f, std::vector<double> x,
                          std::size_t i, double step) {
    const double x0 = x[i];
    x[i] = x0 + step;
    const double up = f(x);
    x[i] = x0 - step;
    const double down = f(x);
    return (up - down) / (2.0 * step);
}

double rel_err(double a, double b, double floor) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace sass::test
