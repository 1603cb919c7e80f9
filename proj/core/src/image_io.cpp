#include "sassseg/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sassseg/imaging.hpp"

namespace sass {

namespace {

namespace fs = std::filesystem;

std::string lower_ext(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

std::runtime_error io_error(const fs::path& p, const std::string& what) {
    return std::runtime_error(p.string() + ": " + what);
}

// ---- PNG ------------------------------------------------------------------

constexpr std::array<unsigned char, 8> kPngSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

struct PngHeader {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    int bit_depth = 0;
    int color_type = 0;
};

// Reads IHDR directly so that bit depth can be validated before decoding; the
// simplified libpng API silently converts 16-bit and sub-byte data.
PngHeader read_png_header(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(path, "cannot open file");
    std::array<unsigned char, 33> buf{};
    in.read(reinterpret_cast<char*>(buf.data()), buf.size());
    if (in.gcount() != static_cast<std::streamsize>(buf.size()) ||
        !std::equal(kPngSignature.begin(), kPngSignature.end(), buf.begin())) {
        throw io_error(path, "not a PNG file");
    }
    if (std::memcmp(buf.data() + 12, "IHDR", 4) != 0) throw io_error(path, "PNG missing IHDR chunk");
    auto be32 = [&](std::size_t off) {
        return (std::uint32_t{buf[off]} << 24) | (std::uint32_t{buf[off + 1]} << 16) |
               (std::uint32_t{buf[off + 2]} << 8) | std::uint32_t{buf[off + 3]};
    };
    PngHeader h;
    h.width = be32(16);
    h.height = be32(20);
    h.bit_depth = buf[24];
    h.color_type = buf[25];
    return h;
}

enum class Channels { Gray, Rgb };

std::vector<std::uint8_t> decode_png(const fs::path& path, Channels want, int& w, int& h) {
    const PngHeader hdr = read_png_header(path);
    if (hdr.bit_depth != 8) {
        throw io_error(path, "unsupported PNG bit depth " + std::to_string(hdr.bit_depth) +
                                 " (only 8-bit images are accepted)");
    }
    if (hdr.color_type == 3) throw io_error(path, "palette PNG images are not supported");
    if (hdr.color_type != 0 && hdr.color_type != 2 && hdr.color_type != 4 && hdr.color_type != 6) {
        throw io_error(path, "unsupported PNG colour type " + std::to_string(hdr.color_type));
    }

    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw io_error(path, std::string("PNG decode failed: ") + image.message);
    }
    const bool source_gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
    // Decode to the source's own channel layout; gray conversion is done with
    // our own BT.601 weights rather than libpng's.
    image.format = source_gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw io_error(path, "PNG decode failed: " + msg);
    }
    w = static_cast<int>(image.width);
    h = static_cast<int>(image.height);

    if (want == Channels::Gray && !source_gray) {
        return to_grayscale(RgbImage(w, h, std::move(pixels))).data;
    }
    if (want == Channels::Rgb && source_gray) {
        std::vector<std::uint8_t> rgb(pixels.size() * 3);
        for (std::size_t i = 0; i < pixels.size(); ++i) rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = pixels[i];
        return rgb;
    }
    return pixels;
}

void encode_png_gray(const fs::path& path, const GrayImage& img) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.c_str(), 0, img.data.data(), 0, nullptr)) {
        throw io_error(path, std::string("PNG write failed: ") + image.message);
    }
}

// ---- PGM ------------------------------------------------------------------

void skip_ws_and_comments(std::istream& in) {
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            return;
        }
    }
}

GrayImage decode_pgm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(path, "cannot open file");
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P5") throw io_error(path, "only binary PGM (P5) is supported");
    int w = 0, h = 0, maxval = 0;
    skip_ws_and_comments(in);
    in >> w;
    skip_ws_and_comments(in);
    in >> h;
    skip_ws_and_comments(in);
    in >> maxval;
    if (!in || w < 1 || h < 1) throw io_error(path, "malformed PGM header");
    if (maxval < 1 || maxval > 255) {
        throw io_error(path, "unsupported PGM maxval " + std::to_string(maxval) + " (only 8-bit images are accepted)");
    }
    in.get();  // single whitespace before raster
    GrayImage img(w, h);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size())) throw io_error(path, "truncated PGM raster");
    return img;
}

void encode_pgm(const fs::path& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(path, "cannot open file for writing");
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (!out) throw io_error(path, "write failed");
}

}  // namespace

GrayImage read_gray(const fs::path& path) {
    if (!fs::exists(path)) throw io_error(path, "file does not exist");
    if (lower_ext(path) == ".pgm") return decode_pgm(path);
    int w = 0, h = 0;
    auto px = decode_png(path, Channels::Gray, w, h);
    return GrayImage(w, h, std::move(px));
}

RgbImage read_rgb(const fs::path& path) {
    if (!fs::exists(path)) throw io_error(path, "file does not exist");
    if (lower_ext(path) == ".pgm") {
        GrayImage g = decode_pgm(path);
        std::vector<std::uint8_t> rgb(g.data.size() * 3);
        for (std::size_t i = 0; i < g.data.size(); ++i) rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = g.data[i];
        return RgbImage(g.width, g.height, std::move(rgb));
    }
    int w = 0, h = 0;
    auto px = decode_png(path, Channels::Rgb, w, h);
    return RgbImage(w, h, std::move(px));
}

void write_gray(const fs::path& path, const GrayImage& img) {
    if (img.empty()) throw io_error(path, "refusing to write an empty image");
    if (lower_ext(path) == ".pgm") {
        encode_pgm(path, img);
    } else {
        encode_png_gray(path, img);
    }
}

BinaryMask read_mask(const fs::path& path) {
    GrayImage g = read_gray(path);
    BinaryMask m(g.width, g.height);
    for (std::size_t i = 0; i < g.data.size(); ++i) m.data[i] = g.data[i] > 127 ? 1 : 0;
    return m;
}

void write_mask(const fs::path& path, const BinaryMask& mask) {
    GrayImage g(mask.width, mask.height);
    for (std::size_t i = 0; i < mask.data.size(); ++i) g.data[i] = mask.data[i] ? 255 : 0;
    write_gray(path, g);
}

}  // namespace sass
