#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace sass {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Folds a list of keys into one seed, e.g. derive_seed({seed, epoch, index}).
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> keys) noexcept;

/// Portable deterministic generator: std::mt19937_64 (fully specified by the
/// standard) plus our own conversions, because the standard distributions are
/// implementation-defined.
///   uniform01: top 53 bits / 2^53
///   normal:    Box-Muller, both outputs used in order
///   below(n):  rejection sampling on the top bits
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }
    double normal(double mean, double stddev) noexcept;
    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) noexcept;
    bool bernoulli(double p) noexcept { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Fisher-Yates permutation of [0, n) driven by Rng::below.
std::vector<std::size_t> permutation(std::size_t n, Rng& rng);

}  // namespace sass
