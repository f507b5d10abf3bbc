#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "mvbsde/model.hpp"

namespace mvbsde {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class TimeGrid {
public:
    TimeGrid(std::size_t n_steps, double horizon);

    std::size_t n_steps() const { return n_; }
    double horizon() const { return horizon_; }
    double dt() const { return horizon_ / static_cast<double>(n_); }
    double time(std::size_t i) const;
    // Grid index nearest to time s.
    std::size_t index_of(double s) const;

private:
    std::size_t n_;
    double horizon_;
};

enum class FactorScheme { full_truncation_euler, exact_ou };

struct PathEnsemble {
    TimeGrid grid;
    std::size_t n_paths = 0;
    RowMatrix factor;     // M x (N+1)
    RowMatrix db_factor;  // M x N
    RowMatrix db_stock;   // M x N
    std::uint64_t seed = 0;
};

struct WealthPath {
    TimeGrid grid;
    RowMatrix wealth;  // M x (N+1)
    std::string policy_used;
    bool wealth_independent = true;
};

class PolicyField;

// Path m draws from its own generator seeded by (seed, m), so output is independent of the
// thread count and path m does not depend on the ensemble size.
PathEnsemble simulate_factor(const MarketModel& model, const TimeGrid& grid, std::size_t n_paths,
                             std::uint64_t seed, std::size_t threads = 0,
                             FactorScheme scheme = FactorScheme::full_truncation_euler);

WealthPath simulate_wealth(const MarketModel& model, const PathEnsemble& ensemble,
                           const PolicyField& policy, double w0, std::size_t threads = 0);

void write_paths_csv(const PathEnsemble& ensemble, const std::string& path);

}  // namespace mvbsde
