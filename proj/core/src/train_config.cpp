#include "sassseg/train_config.hpp"

#include <charconv>
#include <cstdio>
#include <set>
#include <stdexcept>
#include <system_error>
#include <type_traits>

namespace sass {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
    throw std::invalid_argument("config key '" + key + "': cannot parse '" + value + "' as " + want);
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "a number");
    return out;
}

template <typename I>
I parse_int(const std::string& key, const std::string& v) {
    I out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true") return true;
    if (v == "0" || v == "false") return false;
    bad_value(key, v, "a boolean (0/1/true/false)");
}

std::string get(const ConfigMap& m, const std::string& key, const std::string& fallback) {
    const auto it = m.find(key);
    return it == m.end() ? fallback : it->second;
}

[[noreturn]] void not_applicable(const std::string& key, const std::string& what) {
    throw std::invalid_argument("config key '" + key + "' does not apply to " + what);
}

void set_threshold_param(ThresholdMethod& m, const std::string& key, const std::string& param,
                         const std::string& v) {
    std::visit(
        [&](auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, FixedThreshold>) {
                if (param == "t") return void(t.t = parse_double(key, v));
            } else if constexpr (std::is_same_v<T, GhtThreshold>) {
                if (param == "nu") return void(t.nu = parse_double(key, v));
                if (param == "tau") return void(t.tau = parse_double(key, v));
                if (param == "kappa") return void(t.kappa = parse_double(key, v));
                if (param == "omega") return void(t.omega = parse_double(key, v));
            } else if constexpr (std::is_same_v<T, AdaptiveMeanThreshold>) {
                if (param == "window") return void(t.window = parse_int<int>(key, v));
                if (param == "c") return void(t.c = parse_double(key, v));
            } else if constexpr (std::is_same_v<T, AdaptiveGaussianThreshold>) {
                if (param == "window") return void(t.window = parse_int<int>(key, v));
                if (param == "sigma") return void(t.sigma = parse_double(key, v));
                if (param == "c") return void(t.c = parse_double(key, v));
            }
            not_applicable(key, "threshold method '" + m.name() + "'");
        },
        m.variant);
}

void set_loss_param(LossSpec& l, const std::string& key, const std::string& param, const std::string& v) {
    std::visit(
        [&](auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FocalLoss>) {
                if (param == "alpha") return void(s.alpha = parse_double(key, v));
                if (param == "gamma") return void(s.gamma = parse_double(key, v));
            } else if constexpr (std::is_same_v<T, DiceLoss>) {
                if (param == "eps") return void(s.eps = parse_double(key, v));
            } else if constexpr (std::is_same_v<T, TverskyLoss>) {
                if (param == "alpha") return void(s.alpha = parse_double(key, v));
                if (param == "beta") return void(s.beta = parse_double(key, v));
                if (param == "eps") return void(s.eps = parse_double(key, v));
            } else if constexpr (std::is_same_v<T, FocalTverskyLoss>) {
                if (param == "alpha") return void(s.alpha = parse_double(key, v));
                if (param == "beta") return void(s.beta = parse_double(key, v));
                if (param == "gamma") return void(s.gamma_exp = parse_double(key, v));
                if (param == "eps") return void(s.eps = parse_double(key, v));
            }
            not_applicable(key, "loss '" + l.name() + "'");
        },
        l.variant);
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

std::string to_string(TrainMode m) { return m == TrainMode::Supervised ? "supervised" : "selfsup"; }

TrainMode train_mode_from_string(const std::string& s) {
    if (s == "selfsup") return TrainMode::SelfSupervised;
    if (s == "supervised") return TrainMode::Supervised;
    throw std::invalid_argument("unknown training mode '" + s + "' (expected selfsup or supervised)");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (patience < 0) throw std::invalid_argument("patience must be >= 0");
    if (!(lr >= 0.0)) throw std::invalid_argument("lr must be >= 0");
    if (width < 2 || height < 2 || width % 2 != 0 || height % 2 != 0) {
        throw std::invalid_argument("width and height must be even and >= 2");
    }
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) || !(adam_eps > 0.0)) {
        throw std::invalid_argument("adam betas must lie in [0,1) and eps must be > 0");
    }
    threshold_method.validate();
    loss.validate();
    augment.validate();
}

ConfigMap config_to_map(const TrainConfig& cfg) {
    ConfigMap m;
    m["train.mode"] = to_string(cfg.mode);
    m["train.epochs"] = std::to_string(cfg.epochs);
    m["train.batch_size"] = std::to_string(cfg.batch_size);
    m["train.lr"] = format_double(cfg.lr);
    m["train.patience"] = std::to_string(cfg.patience);
    m["train.seed"] = std::to_string(cfg.seed);
    m["train.width"] = std::to_string(cfg.width);
    m["train.height"] = std::to_string(cfg.height);

    m["threshold.method"] = cfg.threshold_method.name();
    m["threshold.invert"] = cfg.threshold_method.invert ? "1" : "0";
    std::visit(
        [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, FixedThreshold>) {
                m["threshold.t"] = format_double(t.t);
            } else if constexpr (std::is_same_v<T, GhtThreshold>) {
                m["threshold.nu"] = format_double(t.nu);
                if (t.tau) m["threshold.tau"] = format_double(*t.tau);
                m["threshold.kappa"] = format_double(t.kappa);
                m["threshold.omega"] = format_double(t.omega);
            } else if constexpr (std::is_same_v<T, AdaptiveMeanThreshold>) {
                m["threshold.window"] = std::to_string(t.window);
                m["threshold.c"] = format_double(t.c);
            } else if constexpr (std::is_same_v<T, AdaptiveGaussianThreshold>) {
                m["threshold.window"] = std::to_string(t.window);
                if (t.sigma) m["threshold.sigma"] = format_double(*t.sigma);
                m["threshold.c"] = format_double(t.c);
            }
        },
        cfg.threshold_method.variant);

    m["loss.name"] = cfg.loss.name();
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FocalLoss>) {
                m["loss.alpha"] = format_double(s.alpha);
                m["loss.gamma"] = format_double(s.gamma);
            } else if constexpr (std::is_same_v<T, DiceLoss>) {
                m["loss.eps"] = format_double(s.eps);
            } else if constexpr (std::is_same_v<T, TverskyLoss>) {
                m["loss.alpha"] = format_double(s.alpha);
                m["loss.beta"] = format_double(s.beta);
                m["loss.eps"] = format_double(s.eps);
            } else if constexpr (std::is_same_v<T, FocalTverskyLoss>) {
                m["loss.alpha"] = format_double(s.alpha);
                m["loss.beta"] = format_double(s.beta);
                m["loss.gamma"] = format_double(s.gamma_exp);
                m["loss.eps"] = format_double(s.eps);
            }
        },
        cfg.loss.variant);

    m["augment.hflip_p"] = format_double(cfg.augment.hflip_p);
    m["augment.vflip_p"] = format_double(cfg.augment.vflip_p);
    m["augment.brightness_delta"] = format_double(cfg.augment.brightness_delta);
    m["augment.contrast_lo"] = format_double(cfg.augment.contrast_lo);
    m["augment.contrast_hi"] = format_double(cfg.augment.contrast_hi);

    m["adam.beta1"] = format_double(cfg.adam_beta1);
    m["adam.beta2"] = format_double(cfg.adam_beta2);
    m["adam.eps"] = format_double(cfg.adam_eps);
    return m;
}

TrainConfig config_from_map(const ConfigMap& values) {
    TrainConfig cfg;
    cfg.threshold_method = threshold_method_from_name(get(values, "threshold.method", "otsu"));
    cfg.loss = loss_from_name(get(values, "loss.name", "focal_tversky"));

    for (const auto& [key, v] : values) {
        const auto dot = key.find('.');
        if (dot == std::string::npos) throw std::invalid_argument("config key '" + key + "' has no section");
        const std::string section = key.substr(0, dot);
        const std::string param = key.substr(dot + 1);
        auto unknown = [&]() { throw std::invalid_argument("unknown config key '" + key + "'"); };

        if (section == "train") {
            if (param == "mode") {
                cfg.mode = train_mode_from_string(v);
            } else if (param == "epochs") {
                cfg.epochs = parse_int<int>(key, v);
            } else if (param == "batch_size") {
                cfg.batch_size = parse_int<int>(key, v);
            } else if (param == "lr") {
                cfg.lr = parse_double(key, v);
            } else if (param == "patience") {
                cfg.patience = parse_int<int>(key, v);
            } else if (param == "seed") {
                cfg.seed = parse_int<std::uint64_t>(key, v);
            } else if (param == "width") {
                cfg.width = parse_int<int>(key, v);
            } else if (param == "height") {
                cfg.height = parse_int<int>(key, v);
            } else {
                unknown();
            }
        } else if (section == "threshold") {
            if (param == "method") continue;
            if (param == "invert") {
                cfg.threshold_method.invert = parse_bool(key, v);
            } else if (param == "t" || param == "nu" || param == "tau" || param == "kappa" || param == "omega" ||
                       param == "window" || param == "sigma" || param == "c") {
                set_threshold_param(cfg.threshold_method, key, param, v);
            } else {
                unknown();
            }
        } else if (section == "loss") {
            if (param == "name") continue;
            if (param == "alpha" || param == "beta" || param == "gamma" || param == "eps") {
                set_loss_param(cfg.loss, key, param, v);
            } else {
                unknown();
            }
        } else if (section == "augment") {
            if (param == "hflip_p") {
                cfg.augment.hflip_p = parse_double(key, v);
            } else if (param == "vflip_p") {
                cfg.augment.vflip_p = parse_double(key, v);
            } else if (param == "brightness_delta") {
                cfg.augment.brightness_delta = parse_double(key, v);
            } else if (param == "contrast_lo") {
                cfg.augment.contrast_lo = parse_double(key, v);
            } else if (param == "contrast_hi") {
                cfg.augment.contrast_hi = parse_double(key, v);
            } else {
                unknown();
            }
        } else if (section == "adam") {
            if (param == "beta1") {
                cfg.adam_beta1 = parse_double(key, v);
            } else if (param == "beta2") {
                cfg.adam_beta2 = parse_double(key, v);
            } else if (param == "eps") {
                cfg.adam_eps = parse_double(key, v);
            } else {
                unknown();
            }
        } else {
            unknown();
        }
    }
    cfg.validate();
    return cfg;
}

std::string canonical_config(const TrainConfig& cfg) {
    ConfigMap m = config_to_map(cfg);
    m.erase("train.seed");
    std::string out;
    for (const auto& [k, v] : m) out += k + " = " + v + "\n";
    return out;
}

std::string config_hash(const TrainConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : canonical_config(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace sass
