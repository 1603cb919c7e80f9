#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sassseg/train_config.hpp"

namespace sass::cli {

// Config file grammar:
//
//   # comment            ; comment
//   [section]
//   key = value
//
// Keys are addressed as section.key. Sections train, threshold, loss, augment
// and adam map onto TrainConfig; [data] holds CLI-only settings (manifest).
// Whitespace around keys and values is trimmed; values may not be empty.

struct Setting {
    std::string key;  ///< section.key
    std::string value;
    std::string origin;  ///< "file:line" or "--set"
};

/// Throws std::invalid_argument naming `origin:line` on syntax errors and
/// duplicate keys.
std::vector<Setting> parse_config_text(std::string_view text, const std::string& origin);

std::vector<Setting> parse_config_file(const std::filesystem::path& path);

/// Parses `section.key=value`.
Setting parse_override(const std::string& text);

struct ResolvedConfig {
    TrainConfig train;
    std::map<std::string, std::string> data;  ///< [data] keys without the prefix
};

/// Applies settings in order over the defaults (later wins). Each key is
/// checked on its own first so errors point at the offending line.
ResolvedConfig resolve_config(const std::vector<Setting>& settings);

/// Reads the config entries of a run's meta.txt, ignoring bookkeeping lines.
TrainConfig config_from_meta(const std::filesystem::path& meta_txt);

}  // namespace sass::cli
