#include "config_file.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sass::cli {
namespace {

const std::set<std::string> kConfigSections = {"train", "threshold", "loss", "augment", "adam"};
const std::set<std::string> kDataKeys = {"manifest"};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string section_of(const std::string& key) {
    const auto dot = key.find('.');
    return dot == std::string::npos ? std::string{} : key.substr(0, dot);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path.string() + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::vector<Setting> parse_config_text(std::string_view text, const std::string& origin) {
    std::vector<Setting> out;
    std::set<std::string> seen;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no);
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw std::invalid_argument(where + ": malformed section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!kConfigSections.contains(section) && section != "data") {
                throw std::invalid_argument(where + ": unknown section '" + section + "'");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument(where + ": expected key = value");
        if (section.empty()) throw std::invalid_argument(where + ": key outside of a [section]");
        const std::string key = section + "." + trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (value.empty()) throw std::invalid_argument(where + ": empty value for '" + key + "'");
        if (!seen.insert(key).second) throw std::invalid_argument(where + ": duplicate key '" + key + "'");
        out.push_back({key, value, where});
    }
    return out;
}

std::vector<Setting> parse_config_file(const std::filesystem::path& path) {
    return parse_config_text(read_text(path), path.string());
}

Setting parse_override(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set " + text + ": expected section.key=value");
    Setting s{trim(std::string_view(text).substr(0, eq)), trim(std::string_view(text).substr(eq + 1)), "--set"};
    if (section_of(s.key).empty()) throw std::invalid_argument("--set " + text + ": key must be section.key");
    return s;
}

ResolvedConfig resolve_config(const std::vector<Setting>& settings) {
    ResolvedConfig out;
    ConfigMap merged;
    std::map<std::string, std::string> origin;
    for (const auto& s : settings) {
        const std::string sec = section_of(s.key);
        if (sec == "data") {
            const std::string name = s.key.substr(5);
            if (!kDataKeys.contains(name)) throw std::invalid_argument(s.origin + ": unknown key '" + s.key + "'");
            out.data[name] = s.value;
            continue;
        }
        if (!kConfigSections.contains(sec)) throw std::invalid_argument(s.origin + ": unknown key '" + s.key + "'");
        merged[s.key] = s.value;
        origin[s.key] = s.origin;
    }
    // Per-key check in the context of the final method and loss.
    ConfigMap context;
    for (const char* k : {"threshold.method", "loss.name"}) {
        if (auto it = merged.find(k); it != merged.end()) context[k] = it->second;
    }
    for (const auto& [key, value] : merged) {
        ConfigMap one = context;
        one[key] = value;
        try {
            (void)config_from_map(one);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(origin[key] + ": " + e.what());
        }
    }
    out.train = config_from_map(merged);
    return out;
}

TrainConfig config_from_meta(const std::filesystem::path& meta_txt) {
    const std::string text = read_text(meta_txt);
    ConfigMap values;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        if (kConfigSections.contains(section_of(key))) values[key] = line.substr(eq + 3);
    }
    return config_from_map(values);
}

}  // namespace sass::cli
