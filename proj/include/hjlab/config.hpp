#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Flat key = value experiment configuration.  Files use one pair per line,
// '#' starts a comment, blank lines are skipped.  Command-line overrides
// arrive as (key, value) pairs and win over the file.

namespace hjlab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string potential = "cosine";  // "cosine" or "free"
    int d = 1;
    int n = 1024;
    double a = 1.0;       // cosine amplitude, axis 0
    double a2 = -1.0;     // axis 1; negative means copy a
    double c = 0.0;       // cosine coupling term, d = 2 only

    std::vector<double> nu_list = {0.1, 0.05, 0.02, 0.01, 0.005, 0.002};

    double wk_tol = 1e-9;
    int wk_max_iter = 5000;

    double r_U = 0.1;       // core-domain radius around the minimizing set
    int trace_n_max = 20;
    int lyap_n_max = 400;
    int cert_layer = 1;     // which transition layer carries the certificates
    int cert_trials = 100;
    double R_mult = 0.0;    // small-set level multiplier; 0 picks it from the drift bound

    std::uint64_t seed = 2026;
    int threads = 1;
    std::string out = "out";
};

std::map<std::string, std::string> parse_config_file(const std::string& path);

// tokens after the subcommand: --key value pairs; throws ConfigError on
// stray tokens or missing values
void apply_overrides(std::map<std::string, std::string>& kv,
                     const std::vector<std::pair<std::string, std::string>>& overrides);

// strict: unknown keys and malformed values raise ConfigError
ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv);

// cross-field checks (grid resolves every viscosity scale, nu_list sorted
// descending, dimensions supported); throws ConfigError
void validate(const ExperimentConfig& cfg);

}  // namespace hjlab
