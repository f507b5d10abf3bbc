#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvbsde/bsde.hpp"
#include "mvbsde/model.hpp"
#include "mvbsde/simulate.hpp"

namespace mvbsde {

struct ObjectiveEstimate {
    std::vector<double> times;
    std::vector<double> j_hat;
    std::vector<double> stderr_;
    std::vector<std::size_t> n_excluded;
    std::size_t n_paths = 0;
    std::string policy_id;
    std::optional<std::string> warning;
};

// Evaluation steps for s_j = j T / 10, j = 0..10; needs N divisible by 10.
std::vector<std::size_t> decile_steps(const TimeGrid& grid);

// J(s) = mean(W_T / W_s) - (gamma / 2) var(W_T / W_s) at each step, with batch-means standard
// errors. Paths with |W_s| < 1e-12 are excluded and counted.
ObjectiveEstimate estimate_objective(const WealthPath& wealth, double gamma,
                                     const std::vector<std::size_t>& steps, std::size_t batches = 20);
ObjectiveEstimate estimate_objective(const WealthPath& wealth, double gamma);

// Standard error of J_a - J_b from paired batch means on the same paths.
std::vector<double> paired_difference_stderr(const WealthPath& a, const WealthPath& b, double gamma,
                                             const std::vector<std::size_t>& steps,
                                             std::size_t batches = 20);

void write_objective_csv(const std::vector<ObjectiveEstimate>& estimates, const std::string& path);

struct DiscountStudyRow {
    double s = 0.0;
    double lambda_coef = 0.0;
    double avg_rel_diff = 0.0;
    double avg_abs_rel_diff = 0.0;
    std::size_t n_used = 0;
    std::size_t n_excluded = 0;
};

struct DiscountStudyConfig {
    std::size_t n_steps = 10;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 0;
    SolverConfig solver;
};

// Relative hedging differences (H_B - H_c) / H_B between the terminal-only policy and the
// policy with eta = mu = exp(-lambda_coef (T - .)), averaged over the simulated paths.
std::vector<DiscountStudyRow> discount_study(const MarketModel& base, const std::vector<double>& lambda_coefs,
                                             const DiscountStudyConfig& config);

void write_discount_csv(const std::vector<DiscountStudyRow>& rows, const std::string& path);

}  // namespace mvbsde
