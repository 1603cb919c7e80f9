#include "sassseg/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sass {

namespace {

std::uint8_t round_to_byte(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Half-pixel-center source coordinate, clamped to the valid sample range.
struct Tap {
    int lo;
    int hi;
    double frac;
};

std::vector<Tap> bilinear_taps(int in_size, int out_size) {
    std::vector<Tap> taps(static_cast<std::size_t>(out_size));
    const double scale = static_cast<double>(in_size) / static_cast<double>(out_size);
    for (int o = 0; o < out_size; ++o) {
        double src = (o + 0.5) * scale - 0.5;
        src = std::clamp(src, 0.0, static_cast<double>(in_size - 1));
        const int lo = static_cast<int>(std::floor(src));
        const int hi = std::min(lo + 1, in_size - 1);
        taps[static_cast<std::size_t>(o)] = {lo, hi, src - lo};
    }
    return taps;
}

}  // namespace

GrayImage to_grayscale(const RgbImage& img) {
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const double r = img.data[3 * i];
        const double g = img.data[3 * i + 1];
        const double b = img.data[3 * i + 2];
        out.data[i] = round_to_byte(0.299 * r + 0.587 * g + 0.114 * b);
    }
    return out;
}

Histogram compute_histogram(const GrayImage& img) {
    if (img.empty()) throw std::invalid_argument("empty input");
    Histogram h;
    for (auto v : img.data) ++h.counts[v];
    h.total = img.data.size();
    return h;
}

GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw std::invalid_argument("resize target dimensions must be >= 1");
    if (img.empty()) throw std::invalid_argument("empty input");
    if (out_w == img.width && out_h == img.height) return img;

    const auto xs = bilinear_taps(img.width, out_w);
    const auto ys = bilinear_taps(img.height, out_h);
    GrayImage out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        const Tap& ty = ys[static_cast<std::size_t>(y)];
        for (int x = 0; x < out_w; ++x) {
            const Tap& tx = xs[static_cast<std::size_t>(x)];
            const double top = img.at(tx.lo, ty.lo) * (1.0 - tx.frac) + img.at(tx.hi, ty.lo) * tx.frac;
            const double bot = img.at(tx.lo, ty.hi) * (1.0 - tx.frac) + img.at(tx.hi, ty.hi) * tx.frac;
            out.at(x, y) = round_to_byte(top * (1.0 - ty.frac) + bot * ty.frac);
        }
    }
    return out;
}

template <typename R>
R resize_nearest(const R& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw std::invalid_argument("resize target dimensions must be >= 1");
    if (img.empty()) throw std::invalid_argument("empty input");
    if (out_w == img.width && out_h == img.height) return img;
    R out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        const int sy = std::min(img.height - 1,
                                static_cast<int>((y + 0.5) * img.height / static_cast<double>(out_h)));
        for (int x = 0; x < out_w; ++x) {
            const int sx = std::min(img.width - 1,
                                    static_cast<int>((x + 0.5) * img.width / static_cast<double>(out_w)));
            out.at(x, y) = img.at(sx, sy);
        }
    }
    return out;
}

template GrayImage resize_nearest<GrayImage>(const GrayImage&, int, int);
template BinaryMask resize_nearest<BinaryMask>(const BinaryMask&, int, int);

GrayImage crop(const GrayImage& img, int x0, int y0, int w, int h) {
    if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > img.width || y0 + h > img.height) {
        throw std::invalid_argument("crop rectangle outside image");
    }
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(x, y) = img.at(x0 + x, y0 + y);
    return out;
}

std::vector<GrayImage> tile_image(const GrayImage& img, int tile_w, int tile_h) {
    if (tile_w < 1 || tile_h < 1) throw std::invalid_argument("tile dimensions must be >= 1");
    if (tile_w > img.width || tile_h > img.height) {
        throw std::invalid_argument("tile larger than image");
    }
    const int nx = img.width / tile_w;
    const int ny = img.height / tile_h;
    std::vector<GrayImage> tiles;
    tiles.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    for (int ty = 0; ty < ny; ++ty)
        for (int tx = 0; tx < nx; ++tx) tiles.push_back(crop(img, tx * tile_w, ty * tile_h, tile_w, tile_h));
    return tiles;
}

double histogram_mean(const Histogram& h) {
    if (h.total == 0) throw std::invalid_argument("empty histogram");
    std::uint64_t sum = 0;
    for (int i = 0; i < 256; ++i) sum += static_cast<std::uint64_t>(i) * h.counts[static_cast<std::size_t>(i)];
    return static_cast<double>(sum) / static_cast<double>(h.total);
}

double histogram_stddev(const Histogram& h) {
    const double mean = histogram_mean(h);
    double acc = 0.0;
    for (int i = 0; i < 256; ++i) {
        const double d = i - mean;
        acc += d * d * static_cast<double>(h.counts[static_cast<std::size_t>(i)]);
    }
    return std::sqrt(acc / static_cast<double>(h.total));
}

}  // namespace sass
