#include "hjlab/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hjlab {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for '" + key + "': " + value);
    }
    if (pos != value.size())
        throw ConfigError("config: trailing junk in value for '" + key + "': " + value);
    return v;
}

int parse_int(const std::string& key, const std::string& value) {
    const double v = parse_double(key, value);
    if (v != std::floor(v) || std::abs(v) > 1e15)
        throw ConfigError("config: expected integer for '" + key + "': " + value);
    return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw ConfigError("config: empty entry in list '" + key + "'");
        out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw ConfigError("config: empty list for '" + key + "'");
    return out;
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) +
                              " is not 'key = value': " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config: line " + std::to_string(lineno) +
                              " has an empty key or value");
        kv[key] = value;
    }
    return kv;
}

void apply_overrides(std::map<std::string, std::string>& kv,
                     const std::vector<std::pair<std::string, std::string>>& overrides) {
    for (const auto& [key, value] : overrides) {
        if (key.empty() || value.empty())
            throw ConfigError("config: empty override for '" + key + "'");
        kv[key] = value;
    }
}

ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv) {
    ExperimentConfig cfg;
    for (const auto& [key, value] : kv) {
        if (key == "potential") cfg.potential = value;
        else if (key == "d") cfg.d = parse_int(key, value);
        else if (key == "n") cfg.n = parse_int(key, value);
        else if (key == "a") cfg.a = parse_double(key, value);
        else if (key == "a2") cfg.a2 = parse_double(key, value);
        else if (key == "c") cfg.c = parse_double(key, value);
        else if (key == "nu_list") cfg.nu_list = parse_list(key, value);
        else if (key == "wk_tol") cfg.wk_tol = parse_double(key, value);
        else if (key == "wk_max_iter") cfg.wk_max_iter = parse_int(key, value);
        else if (key == "r_U") cfg.r_U = parse_double(key, value);
        else if (key == "trace_n_max") cfg.trace_n_max = parse_int(key, value);
        else if (key == "lyap_n_max") cfg.lyap_n_max = parse_int(key, value);
        else if (key == "cert_layer") cfg.cert_layer = parse_int(key, value);
        else if (key == "cert_trials") cfg.cert_trials = parse_int(key, value);
        else if (key == "R_mult") cfg.R_mult = parse_double(key, value);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_double(key, value));
        else if (key == "threads") cfg.threads = parse_int(key, value);
        else if (key == "out") cfg.out = value;
        else throw ConfigError("config: unknown key '" + key + "'");
    }
    validate(cfg);
    return cfg;
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.potential != "cosine" && cfg.potential != "free")
        throw ConfigError("config: potential must be 'cosine' or 'free'");
    if (cfg.d != 1 && cfg.d != 2)
        throw ConfigError("config: d must be 1 or 2");
    if (cfg.n < 8) throw ConfigError("config: n must be at least 8");
    if (cfg.potential == "cosine" && !(cfg.a > 0.0))
        throw ConfigError("config: cosine amplitude a must be positive");
    if (cfg.d == 2 && cfg.a2 >= 0.0 && cfg.potential == "cosine" && !(cfg.a2 > 0.0))
        throw ConfigError("config: cosine amplitude a2 must be positive");
    if (cfg.c < 0.0) throw ConfigError("config: coupling c must be nonnegative");
    if (!(cfg.wk_tol > 0.0)) throw ConfigError("config: wk_tol must be positive");
    if (cfg.wk_max_iter < 1) throw ConfigError("config: wk_max_iter must be positive");
    if (!(cfg.r_U > 0.0) || cfg.r_U > 0.5)
        throw ConfigError("config: r_U must lie in (0, 0.5]");
    if (cfg.trace_n_max < 2) throw ConfigError("config: trace_n_max must be >= 2");
    if (cfg.lyap_n_max < 2) throw ConfigError("config: lyap_n_max must be >= 2");
    if (cfg.cert_layer < 0 || cfg.cert_layer + 1 > cfg.trace_n_max)
        throw ConfigError("config: cert_layer must fit inside trace_n_max");
    if (cfg.cert_trials < 1) throw ConfigError("config: cert_trials must be >= 1");
    if (cfg.R_mult < 0.0) throw ConfigError("config: R_mult must be nonnegative");
    if (cfg.threads < 1) throw ConfigError("config: threads must be >= 1");

    if (cfg.nu_list.empty()) throw ConfigError("config: nu_list is empty");
    for (std::size_t i = 0; i < cfg.nu_list.size(); ++i) {
        if (!(cfg.nu_list[i] > 0.0))
            throw ConfigError("config: viscosities must be positive");
        if (i > 0 && !(cfg.nu_list[i] < cfg.nu_list[i - 1]))
            throw ConfigError("config: nu_list must be strictly decreasing");
    }
    const double h = 1.0 / static_cast<double>(cfg.n);
    for (double nu : cfg.nu_list) {
        if (std::sqrt(2.0 * nu) < 3.0 * h)
            throw ConfigError(
                "config: grid too coarse to resolve the kernel width at nu = " +
                std::to_string(nu) + " (need sqrt(2 nu) >= 3/n)");
    }
}

}  // namespace hjlab
