#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sass {

// Row-major single-plane raster. Concrete image kinds derive from it so that a
// GrayImage cannot be passed where a BinaryMask is expected.
template <typename T>
struct Raster {
    using value_type = T;

    int width = 0;
    int height = 0;
    std::vector<T> data;

    Raster() = default;
    Raster(int w, int h, T fill = T{}) : width(w), height(h) {
        if (w < 0 || h < 0) {
            throw std::invalid_argument("raster dimensions must be non-negative");
        }
        data.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
    }
    Raster(int w, int h, std::vector<T> values) : width(w), height(h), data(std::move(values)) {
        if (w < 0 || h < 0 ||
            data.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
            throw std::invalid_argument("raster data length does not match width*height");
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return data.size(); }
    [[nodiscard]] bool empty() const noexcept { return data.empty(); }

    [[nodiscard]] T at(int x, int y) const {
        return data[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                    static_cast<std::size_t>(x)];
    }
    T& at(int x, int y) {
        return data[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                    static_cast<std::size_t>(x)];
    }

    [[nodiscard]] bool same_shape(const Raster& other) const noexcept {
        return width == other.width && height == other.height;
    }
    template <typename U>
    [[nodiscard]] bool same_shape(const Raster<U>& other) const noexcept {
        return width == other.width && height == other.height;
    }

    friend bool operator==(const Raster&, const Raster&) = default;
};

/// 8-bit single-channel intensities.
struct GrayImage : Raster<std::uint8_t> {
    using Raster::Raster;
    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// Hard {0,1} mask: pseudo-label or ground truth.
struct BinaryMask : Raster<std::uint8_t> {
    using Raster::Raster;
    [[nodiscard]] std::size_t count_foreground() const noexcept {
        std::size_t n = 0;
        for (auto v : data) n += v;
        return n;
    }
    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

/// Per-pixel foreground probability in [0,1].
struct ProbMask : Raster<double> {
    using Raster::Raster;
    friend bool operator==(const ProbMask&, const ProbMask&) = default;
};

/// Interleaved 8-bit RGB triples, row-major.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h) {
        if (w < 1 || h < 1) throw std::invalid_argument("RGB image must be at least 1x1");
        data.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0);
    }
    RgbImage(int w, int h, std::vector<std::uint8_t> values)
        : width(w), height(h), data(std::move(values)) {
        if (w < 1 || h < 1 ||
            data.size() != 3 * static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
            throw std::invalid_argument("RGB data length must equal 3*width*height");
        }
    }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

}  // namespace sass
