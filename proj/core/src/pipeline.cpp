#include "sassseg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "sassseg/image_io.hpp"
#include "sassseg/imaging.hpp"
#include "sassseg/rng.hpp"

namespace sass {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) fields.push_back(trim(cur));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string relative_to(const fs::path& p, const fs::path& base) {
    std::error_code ec;
    const fs::path rel = fs::relative(p, base, ec);
    if (ec || rel.empty()) return p.generic_string();
    return rel.generic_string();
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

std::string to_string(Split s) {
    switch (s) {
        case Split::Train:
            return "train";
        case Split::Val:
            return "val";
        case Split::Test:
            return "test";
        case Split::Unassigned:
            return "";
    }
    return "";
}

Split split_from_string(const std::string& s) {
    if (s.empty()) return Split::Unassigned;
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw std::invalid_argument("unknown split '" + s + "' (expected train, val, test or empty)");
}

std::vector<ManifestEntry> load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": manifest not found or unreadable");
    const fs::path base = path.parent_path();

    std::vector<ManifestEntry> entries;
    std::string line;
    bool header_seen = false;
    bool has_invert = false;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_csv(trim(line));
        if (!header_seen) {
            header_seen = true;
            if (fields.size() < 3 || fields[0] != "image" || fields[1] != "mask" || fields[2] != "split" ||
                (fields.size() == 4 && fields[3] != "invert") || fields.size() > 4) {
                throw std::runtime_error(path.string() + ": header must be 'image,mask,split[,invert]'");
            }
            has_invert = fields.size() == 4;
            continue;
        }
        ++row;
        auto fail = [&](const std::string& what) {
            throw std::runtime_error(path.string() + ": row " + std::to_string(row) + ": " + what);
        };
        const std::size_t want = has_invert ? 4 : 3;
        if (fields.size() != want) {
            fail("expected " + std::to_string(want) + " fields, got " + std::to_string(fields.size()));
        }
        if (fields[0].empty()) fail("empty image path");
        ManifestEntry e;
        e.image_path = resolve(base, fields[0]);
        if (!fs::exists(e.image_path)) fail("image '" + fields[0] + "' does not exist");
        if (!fields[1].empty()) {
            e.mask_path = resolve(base, fields[1]);
            if (!fs::exists(*e.mask_path)) fail("mask '" + fields[1] + "' does not exist");
        }
        try {
            e.split = split_from_string(fields[2]);
        } catch (const std::invalid_argument& ex) {
            fail(ex.what());
        }
        if (has_invert) {
            if (fields[3] == "1" || fields[3] == "true") {
                e.invert = true;
            } else if (fields[3] == "0" || fields[3] == "false" || fields[3].empty()) {
                e.invert = false;
            } else {
                fail("invert must be 0 or 1");
            }
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
    const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    const bool any_invert = std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.invert; });
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << "image,mask,split" << (any_invert ? ",invert" : "") << '\n';
    for (const auto& e : entries) {
        out << relative_to(e.image_path, base) << ',' << (e.mask_path ? relative_to(*e.mask_path, base) : "") << ','
            << to_string(e.split);
        if (any_invert) out << ',' << (e.invert ? 1 : 0);
        out << '\n';
    }
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::vector<ManifestEntry> filter_split(const std::vector<ManifestEntry>& entries, Split split) {
    std::vector<ManifestEntry> out;
    std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
                 [split](const ManifestEntry& e) { return e.split == split; });
    return out;
}

std::vector<ManifestEntry> make_splits(std::vector<ManifestEntry> entries, SplitRatios ratios, std::uint64_t seed) {
    if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
        std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
        throw std::invalid_argument("split ratios must be non-negative and sum to 1");
    }
    const std::size_t n = entries.size();
    // The small epsilon keeps products like 0.7*10 from flooring to 6.
    const auto n_train = static_cast<std::size_t>(std::floor(ratios.train * static_cast<double>(n) + 1e-9));
    const auto n_val = static_cast<std::size_t>(std::floor(ratios.val * static_cast<double>(n) + 1e-9));
    Rng rng(derive_seed({seed, 0x5b1175ULL}));
    const auto order = permutation(n, rng);
    for (std::size_t k = 0; k < n; ++k) {
        Split s = Split::Test;
        if (k < n_train) {
            s = Split::Train;
        } else if (k < n_train + n_val) {
            s = Split::Val;
        }
        entries[order[k]].split = s;
    }
    return entries;
}

void AugmentSpec::validate() const {
    if (resize_w < 0 || resize_h < 0) throw std::invalid_argument("augment resize dimensions must be >= 0");
    if (!(hflip_p >= 0.0 && hflip_p <= 1.0) || !(vflip_p >= 0.0 && vflip_p <= 1.0)) {
        throw std::invalid_argument("flip probabilities must lie in [0,1]");
    }
    if (!(brightness_delta >= 0.0)) throw std::invalid_argument("brightness_delta must be >= 0");
    if (!(contrast_lo > 0.0) || !(contrast_hi >= contrast_lo)) {
        throw std::invalid_argument("contrast bounds must be positive with lo <= hi");
    }
}

GrayImage apply_photometric(const GrayImage& img, double brightness, double contrast) {
    GrayImage out = img;
    for (auto& v : out.data) v = to_byte((v - 128.0) * contrast + 128.0 + brightness);
    return out;
}

Augmented augment(const GrayImage& img, const std::optional<BinaryMask>& mask, const AugmentSpec& spec,
                  std::uint64_t sample_key) {
    spec.validate();
    if (mask && !mask->same_shape(img)) throw std::invalid_argument("mask dimensions differ from image");
    Rng rng(derive_seed({spec.seed, sample_key}));
    const bool hflip = rng.bernoulli(spec.hflip_p);
    const bool vflip = rng.bernoulli(spec.vflip_p);
    const double brightness = rng.uniform(-spec.brightness_delta, spec.brightness_delta);
    const double contrast = rng.uniform(spec.contrast_lo, spec.contrast_hi);

    const int w = spec.resize_w > 0 ? spec.resize_w : img.width;
    const int h = spec.resize_h > 0 ? spec.resize_h : img.height;
    Augmented out;
    out.image = resize_bilinear(img, w, h);
    if (mask) out.mask = resize_nearest(*mask, w, h);
    if (hflip) {
        out.image = flip_horizontal(out.image);
        if (out.mask) out.mask = flip_horizontal(*out.mask);
    }
    if (vflip) {
        out.image = flip_vertical(out.image);
        if (out.mask) out.mask = flip_vertical(*out.mask);
    }
    if (brightness != 0.0 || contrast != 1.0) out.image = apply_photometric(out.image, brightness, contrast);
    return out;
}

void SynthOptions::validate() const {
    if (min_blobs < 1 || max_blobs < min_blobs) throw std::invalid_argument("blob count bounds must satisfy 1 <= min <= max");
    if (!(min_radius_frac > 0.0) || !(max_radius_frac >= min_radius_frac) || max_radius_frac >= 0.5) {
        throw std::invalid_argument("radius fractions must satisfy 0 < min <= max < 0.5");
    }
    if (bg_sd < 0 || fg_sd < 0 || noise_sd < 0) throw std::invalid_argument("standard deviations must be >= 0");
}

SynthSample synth_blob(std::uint64_t seed, std::uint64_t index, int w, int h, const SynthOptions& opts) {
    if (w < 16 || h < 16) throw std::invalid_argument("synthetic images must be at least 16x16");
    opts.validate();
    Rng rng(derive_seed({seed, index, 0xb10bULL}));
    const double side = std::min(w, h);

    SynthSample s{GrayImage(w, h), BinaryMask(w, h)};
    std::vector<double> level(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), rng.normal(opts.bg_mean, opts.bg_sd));

    const int span = opts.max_blobs - opts.min_blobs + 1;
    const int blobs = opts.min_blobs + static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));
    for (int b = 0; b < blobs; ++b) {
        const double a = rng.uniform(opts.min_radius_frac, opts.max_radius_frac) * side;
        const double c = rng.uniform(opts.min_radius_frac, opts.max_radius_frac) * side;
        const double theta = rng.uniform(0.0, std::numbers::pi);
        const double margin = std::max(a, c);
        const double cx = rng.uniform(margin, w - margin);
        const double cy = rng.uniform(margin, h - margin);
        const double fg = rng.normal(opts.fg_mean, opts.fg_sd);
        const double ct = std::cos(theta);
        const double st = std::sin(theta);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double dx = x + 0.5 - cx;
                const double dy = y + 0.5 - cy;
                const double u = (dx * ct + dy * st) / a;
                const double v = (-dx * st + dy * ct) / c;
                if (u * u + v * v <= 1.0) {
                    const auto k = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
                    level[k] = fg;
                    s.mask.data[k] = 1;
                }
            }
        }
    }
    for (std::size_t k = 0; k < level.size(); ++k) s.image.data[k] = to_byte(level[k] + rng.normal(0.0, opts.noise_sd));
    return s;
}

std::vector<SynthSample> synth_blobs(std::size_t n, int w, int h, std::uint64_t seed, const SynthOptions& opts) {
    std::vector<SynthSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(synth_blob(seed, i, w, h, opts));
    return out;
}

fs::path write_synth_dataset(const fs::path& dir, const std::vector<SynthSample>& samples,
                             const std::vector<Split>& splits) {
    if (!splits.empty() && splits.size() != samples.size()) {
        throw std::invalid_argument("split list must be empty or match the sample count");
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error(dir.string() + ": cannot create output directory");

    std::vector<ManifestEntry> entries;
    entries.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        char img_name[32];
        char msk_name[32];
        std::snprintf(img_name, sizeof img_name, "img_%05zu.png", i);
        std::snprintf(msk_name, sizeof msk_name, "msk_%05zu.png", i);
        write_gray(dir / img_name, samples[i].image);
        write_mask(dir / msk_name, samples[i].mask);
        entries.push_back({dir / img_name, dir / msk_name, splits.empty() ? Split::Unassigned : splits[i], false});
    }
    const fs::path manifest = dir / "manifest.csv";
    write_manifest(manifest, entries);
    return manifest;
}

bool Dataset::has_all_masks() const noexcept {
    return std::all_of(masks.begin(), masks.end(), [](const auto& m) { return m.has_value(); });
}

Dataset load_dataset(const std::vector<ManifestEntry>& entries, int w, int h, MaskPolicy policy) {
    Dataset d;
    for (const auto& e : entries) {
        if (policy == MaskPolicy::Require && !e.mask_path) {
            throw std::runtime_error("entry '" + e.image_path.string() + "' has no mask but ground truth is required");
        }
    }
    for (const auto& e : entries) {
        GrayImage img = read_gray(e.image_path);
        std::optional<BinaryMask> mask;
        if (policy != MaskPolicy::Skip && e.mask_path) {
            BinaryMask m = read_mask(*e.mask_path);
            if (!m.same_shape(img)) {
                throw std::runtime_error("mask '" + e.mask_path->string() + "' dimensions differ from its image");
            }
            mask = resize_nearest(m, w, h);
        }
        d.names.push_back(e.image_path.filename().string());
        d.images.push_back(resize_bilinear(img, w, h));
        d.masks.push_back(std::move(mask));
        d.invert.push_back(e.invert);
    }
    return d;
}

}  // namespace sass
