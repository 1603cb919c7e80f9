#include "sassseg/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace sass {

namespace {

constexpr std::array<char, 8> kMagic = {'S', 'A', 'S', 'S', 'S', 'E', 'G', '\0'};

template <typename U>
void put_le(std::vector<unsigned char>& buf, U v) {
    for (std::size_t b = 0; b < sizeof(U); ++b) buf.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xffu));
}

class Reader {
public:
    Reader(std::vector<unsigned char> bytes, std::filesystem::path path)
        : bytes_(std::move(bytes)), path_(std::move(path)) {}

    template <typename U>
    U get_le() {
        need(sizeof(U));
        U v = 0;
        for (std::size_t b = 0; b < sizeof(U); ++b) v |= static_cast<U>(bytes_[pos_ + b]) << (8 * b);
        pos_ += sizeof(U);
        return v;
    }
    void get_raw(char* dst, std::size_t n) {
        need(n);
        std::memcpy(dst, bytes_.data() + pos_, n);
        pos_ += n;
    }
    [[nodiscard]] bool at_end() const { return pos_ == bytes_.size(); }

    [[noreturn]] void fail(const std::string& what) const {
        throw std::runtime_error(path_.string() + ": " + what);
    }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) fail("truncated checkpoint");
    }
    std::vector<unsigned char> bytes_;
    std::filesystem::path path_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const SegmenterParams& params) {
    std::vector<unsigned char> buf(kMagic.begin(), kMagic.end());
    put_le<std::uint32_t>(buf, kCheckpointVersion);
    const auto layers = params.layers();
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(layers.size()));
    for (const auto* l : layers) {
        put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(l->in_ch));
        put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(l->out_ch));
        put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(l->kernel));
    }
    const std::vector<double> flat = params.flatten();
    put_le<std::uint64_t>(buf, flat.size());
    for (double v : flat) put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(v));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

SegmenterParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path.string() + ": cannot open checkpoint");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r(std::move(bytes), path);

    std::array<char, 8> magic{};
    r.get_raw(magic.data(), magic.size());
    if (magic != kMagic) r.fail("not a segmenter checkpoint (bad magic)");
    const auto version = r.get_le<std::uint32_t>();
    if (version != kCheckpointVersion) r.fail("unsupported checkpoint version " + std::to_string(version));

    SegmenterParams params;
    const auto layers = params.layers();
    const auto n_layers = r.get_le<std::uint32_t>();
    if (n_layers != layers.size()) r.fail("layer count mismatch");
    for (const auto* l : layers) {
        const auto in_ch = r.get_le<std::uint32_t>();
        const auto out_ch = r.get_le<std::uint32_t>();
        const auto kernel = r.get_le<std::uint32_t>();
        if (in_ch != static_cast<std::uint32_t>(l->in_ch) || out_ch != static_cast<std::uint32_t>(l->out_ch) ||
            kernel != static_cast<std::uint32_t>(l->kernel)) {
            r.fail("layer dimensions do not match this segmenter architecture");
        }
    }
    const auto count = r.get_le<std::uint64_t>();
    if (count != params.size()) r.fail("parameter count mismatch");
    std::vector<double> flat(count);
    for (auto& v : flat) v = std::bit_cast<double>(r.get_le<std::uint64_t>());
    if (!r.at_end()) r.fail("trailing bytes after parameter block");
    params.unflatten(flat);
    return params;
}

void save_checkpoint_meta(const std::filesystem::path& path, const std::map<std::string, std::string>& meta) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    for (const auto& [k, v] : meta) out << k << " = " << v << '\n';
}

std::map<std::string, std::string> load_checkpoint_meta(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open checkpoint metadata");
    std::map<std::string, std::string> meta;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        meta[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return meta;
}

}  // namespace sass
