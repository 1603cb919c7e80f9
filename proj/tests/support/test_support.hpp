#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sassseg/imaging.hpp"
#include "sassseg/pipeline.hpp"
#include "sassseg/raster.hpp"
#include "sassseg/rng.hpp"

namespace sass::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "sassseg");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Hand-rolled generators for property tests.
Histogram random_histogram(Rng& rng, std::uint64_t max_count = 1000);
/// Histogram with mass only on [lo, hi].
Histogram random_histogram_in(Rng& rng, int lo, int hi, std::uint64_t max_count = 1000);
GrayImage random_gray(Rng& rng, int w, int h);
BinaryMask random_mask(Rng& rng, int w, int h, double p_fg = 0.3);
/// Probabilities in [lo, hi].
ProbMask random_prob(Rng& rng, int w, int h, double lo = 0.02, double hi = 0.98);

Histogram histogram_from_counts(const std::vector<std::pair<int, std::uint64_t>>& bins);

Dataset dataset_from(const std::vector<SynthSample>& samples, bool with_masks = true);

std::string read_file(const std::filesystem::path& p);

}  // namespace sass::test
