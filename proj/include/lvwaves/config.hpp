#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lvwaves/error.hpp"
#include "lvwaves/model.hpp"

namespace lvw::config {

/// Everything a subcommand needs. Defaults apply only to absent keys.
struct RunConfig {
    model::PhysicalParams physical;
    double L = 40.0;
    double h = 0.05;
    double dt = 0.01;
    double T = 20.0;
    double sigma1 = 0.1;
    double sigma2 = 1.0;
    double tol = 1e-10;
    std::uint64_t max_iters = 200000;
    std::uint64_t seed = 20240601;
    std::string out = "lvwaves-out";

    std::map<std::string, std::string> given;  ///< keys present in the file, last value wins
    std::vector<std::string> warnings;
};

inline const std::vector<std::string>& physical_keys() {
    static const std::vector<std::string> k{"d", "a1", "a2", "b1", "b2", "c1", "c2"};
    return k;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string where(const std::string& source, int line) { return source + ":" + std::to_string(line) + ": "; }

inline double parse_real(std::string_view v, const std::string& key, const std::string& at) {
    double x = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x)) {
        throw ConfigError(at + "value '" + std::string(v) + "' for '" + key + "' is not a finite real");
    }
    return x;
}

inline std::uint64_t parse_count(std::string_view v, const std::string& key, const std::string& at) {
    std::uint64_t x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw ConfigError(at + "value '" + std::string(v) + "' for '" + key + "' is not a nonnegative integer");
    }
    return x;
}

}  // namespace detail

/// Parses `key = value` lines; `#` starts a comment. `source` labels error messages.
inline RunConfig parse_config_text(const std::string& text, const std::string& source = "<config>") {
    RunConfig cfg;
    std::map<std::string, double*> reals{{"d", &cfg.physical.d},   {"a1", &cfg.physical.a1},
                                         {"a2", &cfg.physical.a2}, {"b1", &cfg.physical.b1},
                                         {"b2", &cfg.physical.b2}, {"c1", &cfg.physical.c1},
                                         {"c2", &cfg.physical.c2}, {"q", &cfg.physical.q},
                                         {"L", &cfg.L},            {"h", &cfg.h},
                                         {"dt", &cfg.dt},          {"T", &cfg.T},
                                         {"sigma1", &cfg.sigma1},  {"sigma2", &cfg.sigma2},
                                         {"tol", &cfg.tol}};
    std::map<std::string, std::uint64_t*> counts{{"max_iters", &cfg.max_iters}, {"seed", &cfg.seed}};

    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view s(raw);
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        const std::string at = detail::where(source, line);
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) throw ConfigError(at + "expected 'key = value', got '" + std::string(s) + "'");
        const std::string key(detail::trim(s.substr(0, eq)));
        const std::string_view value = detail::trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError(at + "missing key before '='");
        if (value.empty()) throw ConfigError(at + "missing value for '" + key + "'");
        if (cfg.given.count(key)) {
            cfg.warnings.push_back(at + "duplicate key '" + key + "', last value wins");
        }
        if (auto r = reals.find(key); r != reals.end()) {
            *r->second = detail::parse_real(value, key, at);
        } else if (auto c = counts.find(key); c != counts.end()) {
            *c->second = detail::parse_count(value, key, at);
        } else if (key == "out") {
            cfg.out = std::string(value);
        } else {
            throw ConfigError(at + "unknown key '" + key + "'");
        }
        cfg.given[key] = std::string(value);
    }

    std::string missing;
    for (const std::string& k : physical_keys()) {
        if (!cfg.given.count(k)) missing += (missing.empty() ? "" : ", ") + k;
    }
    if (!missing.empty()) throw ConfigError(source + ": missing required physical parameters: " + missing);

    try {
        const model::HypothesisReport hr = model::validate_hypotheses(cfg.physical);
        if (!hr.all()) throw ConfigError(source + ": hypotheses violated: " + hr.failed());
        (void)model::derive_scaled(cfg.physical);
    } catch (const PreconditionError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    for (auto [name, v] : {std::pair{"L", cfg.L}, std::pair{"h", cfg.h}, std::pair{"dt", cfg.dt},
                           std::pair{"T", cfg.T}, std::pair{"tol", cfg.tol}}) {
        if (!(v > 0.0)) throw ConfigError(source + ": '" + name + "' must be positive");
    }
    if (cfg.sigma1 < 0.0 || cfg.sigma2 < 0.0) throw ConfigError(source + ": weight exponents must be nonnegative");
    return cfg;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

}  // namespace lvw::config
