#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sassseg/raster.hpp"

namespace sass {

enum class Split { Unassigned, Train, Val, Test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct ManifestEntry {
    std::filesystem::path image_path;
    std::optional<std::filesystem::path> mask_path;
    Split split = Split::Unassigned;
    bool invert = false;  ///< per-entry foreground polarity override for pseudo-labels

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

// Manifest CSV: header `image,mask,split` with an optional fourth `invert`
// column (0/1). Relative paths resolve against the manifest's directory. An
// empty mask field marks an unlabeled entry; an empty split field leaves the
// entry unassigned. No quoting: paths must not contain commas.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

std::vector<ManifestEntry> filter_split(const std::vector<ManifestEntry>& entries, Split split);

struct SplitRatios {
    double train = 0.7;
    double val = 0.1;
    double test = 0.2;
};

/// Seeded shuffle, then floor(train*n), floor(val*n), remainder to test.
/// Entries keep their original order; only `split` is assigned.
std::vector<ManifestEntry> make_splits(std::vector<ManifestEntry> entries, SplitRatios ratios, std::uint64_t seed);

struct AugmentSpec {
    int resize_w = 0;  ///< 0 keeps the input size
    int resize_h = 0;
    double hflip_p = 0.5;
    double vflip_p = 0.5;
    double brightness_delta = 10.0;  ///< brightness offset ~ U[-delta, delta]
    double contrast_lo = 0.9;        ///< contrast gain ~ U[lo, hi], about mid-gray 128
    double contrast_hi = 1.1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// v' = clamp(round((v - 128) * contrast + 128 + brightness), 0, 255)
GrayImage apply_photometric(const GrayImage& img, double brightness, double contrast);

struct Augmented {
    GrayImage image;
    std::optional<BinaryMask> mask;
};

/// resize (bilinear image / nearest mask) -> hflip -> vflip -> photometric
/// (image only). Draws come from Rng(derive_seed({spec.seed, sample_key})) in a
/// fixed order, so results do not depend on call order or threading.
Augmented augment(const GrayImage& img, const std::optional<BinaryMask>& mask, const AugmentSpec& spec,
                  std::uint64_t sample_key);

struct SynthOptions {
    int min_blobs = 1;
    int max_blobs = 4;
    double min_radius_frac = 0.08;  ///< semi-axis bounds as a fraction of min(w,h)
    double max_radius_frac = 0.20;
    double bg_mean = 70.0;
    double bg_sd = 10.0;
    double fg_mean = 180.0;
    double fg_sd = 10.0;
    double noise_sd = 8.0;

    void validate() const;
};

struct SynthSample {
    GrayImage image;
    BinaryMask mask;
};

/// One synthetic image: background level ~ N(bg_mean, bg_sd), 1-4 rotated
/// ellipses each at a level ~ N(fg_mean, fg_sd), per-pixel N(0, noise_sd)
/// noise, clamped to [0,255]. The mask marks ellipse pixels. Fully determined
/// by (seed, index).
SynthSample synth_blob(std::uint64_t seed, std::uint64_t index, int w, int h, const SynthOptions& opts = {});
std::vector<SynthSample> synth_blobs(std::size_t n, int w, int h, std::uint64_t seed, const SynthOptions& opts = {});

/// Writes img_%05d.png / msk_%05d.png and manifest.csv into `dir`; returns the
/// manifest path. `splits` must be empty or parallel to `samples`.
std::filesystem::path write_synth_dataset(const std::filesystem::path& dir, const std::vector<SynthSample>& samples,
                                          const std::vector<Split>& splits);

/// Images (and optionally masks) loaded and resized to a common size.
struct Dataset {
    std::vector<std::string> names;
    std::vector<GrayImage> images;
    std::vector<std::optional<BinaryMask>> masks;
    std::vector<bool> invert;

    [[nodiscard]] std::size_t size() const noexcept { return images.size(); }
    [[nodiscard]] bool has_all_masks() const noexcept;
};

enum class MaskPolicy { Skip, IfPresent, Require };

/// Loads entries to grayscale at (w, h). With MaskPolicy::Require a missing
/// mask throws, naming the first maskless entry.
Dataset load_dataset(const std::vector<ManifestEntry>& entries, int w, int h, MaskPolicy masks);

}  // namespace sass
