#pragma once

#include <filesystem>

#include "sassseg/raster.hpp"

namespace sass {

// Supported inputs: 8-bit PNG (gray, gray+alpha, RGB, RGBA) and binary PGM (P5,
// maxval <= 255). Colour inputs are reduced with to_grayscale(); alpha is
// ignored. Anything else throws std::runtime_error with the reason.
GrayImage read_gray(const std::filesystem::path& path);
RgbImage read_rgb(const std::filesystem::path& path);

/// Format chosen by extension: ".pgm" writes P5, anything else writes PNG.
void write_gray(const std::filesystem::path& path, const GrayImage& img);

/// Masks are stored as {0,255}; on read any value > 127 is foreground.
BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

}  // namespace sass
