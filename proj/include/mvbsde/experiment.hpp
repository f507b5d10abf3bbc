#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvbsde/bsde.hpp"
#include "mvbsde/model.hpp"
#include "mvbsde/simulate.hpp"

namespace mvbsde {

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds = {"validate", "simulate", "solve-bsde", "policy",
                                                    "evaluate", "compare",  "discount-study", "statedep"};
    return kinds;
}

// Constant-coefficient state-dependent problem; gamma, rho and lambda come from the preference.
struct StateDepSettings {
    double beta = 0.0;
    double sigma = 0.2;
    double r0 = 0.0;
    std::size_t n_grid = 200;
    double tolerance = 1e-12;
    std::size_t max_iter = 10000;
    double omega = 0.5;
};

struct ExperimentConfig {
    std::string kind;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    MarketModel model;
    std::size_t n_steps = 10;
    std::size_t n_paths = 10000;
    SolverConfig solver;
    FactorScheme scheme = FactorScheme::full_truncation_euler;
    // Experiment block.
    std::size_t trajectory = 0;
    double w0 = 1.0;
    std::string policy = "numerical";
    std::vector<double> lambda_coefs = {0.2, 0.5, 0.8};
    StateDepSettings statedep;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parses a JSON document. Missing blocks required by the kind, a missing seed, unknown keys
// and invariant violations raise ConfigError. A seed override replaces the document's seed.
ExperimentConfig parse_config(const std::string& text, const std::string& kind,
                              std::optional<std::uint64_t> seed_override = std::nullopt);

// Fully resolved configuration as canonical JSON; parse_config of the result is a fixed point.
std::string canonical_json(const ExperimentConfig& config);

// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& text);

struct RunOptions {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
};

struct RunResult {
    int exit_code = 0;  // 0 success, 1 invalid configuration or model, 2 non-convergence
    std::string output_dir;
    std::vector<std::string> files;
    std::string message;
};

// Runs one experiment into <out>/<kind>-<hash of canonical config>/ and writes manifest.json.
RunResult run_experiment(const std::string& kind, const std::string& config_path, const RunOptions& options);

}  // namespace mvbsde
