#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sassseg/raster.hpp"

namespace sass {

struct Histogram {
    std::array<std::uint64_t, 256> counts{};
    std::uint64_t total = 0;

    friend bool operator==(const Histogram&, const Histogram&) = default;
};

/// BT.601 luma: round(0.299 R + 0.587 G + 0.114 B).
GrayImage to_grayscale(const RgbImage& img);

/// Throws std::invalid_argument("empty input") on an empty image.
Histogram compute_histogram(const GrayImage& img);

/// Bilinear resampling with half-pixel-center alignment and edge clamping.
/// Output is rounded to nearest and clamped to [0,255].
GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h);

/// Nearest-neighbour resampling (half-pixel centers). Used for masks.
template <typename R>
R resize_nearest(const R& img, int out_w, int out_h);

/// Non-overlapping row-major tiles; partial right/bottom tiles are dropped.
std::vector<GrayImage> tile_image(const GrayImage& img, int tile_w, int tile_h);

GrayImage crop(const GrayImage& img, int x0, int y0, int w, int h);

template <typename R>
R flip_horizontal(const R& img) {
    R out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) out.at(x, y) = img.at(img.width - 1 - x, y);
    return out;
}

template <typename R>
R flip_vertical(const R& img) {
    R out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) out.at(x, y) = img.at(x, img.height - 1 - y);
    return out;
}

/// Intensity mean and population standard deviation of a histogram.
double histogram_mean(const Histogram& h);
double histogram_stddev(const Histogram& h);

}  // namespace sass
