#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "sassseg/segmenter.hpp"

namespace sass {

// Binary layout, all integers and doubles little-endian:
//   8 bytes   magic "SASSSEG\0"
//   u32       format version (kCheckpointVersion)
//   u32       layer count L
//   L x (u32 in_ch, u32 out_ch, u32 kernel)
//   u64       parameter count P
//   P x f64   flat parameter vector (SegmenterParams::flatten order)
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const SegmenterParams& params);

/// Throws std::runtime_error on bad magic, version, layer dims or truncation.
SegmenterParams load_checkpoint(const std::filesystem::path& path);

/// Sidecar "key = value" text written next to a checkpoint (seed, config
/// hash, epoch).
void save_checkpoint_meta(const std::filesystem::path& path, const std::map<std::string, std::string>& meta);
std::map<std::string, std::string> load_checkpoint_meta(const std::filesystem::path& path);

}  // namespace sass
