#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mvbsde/bsde.hpp"
#include "mvbsde/model.hpp"
#include "mvbsde/simulate.hpp"
#include "mvbsde/volterra.hpp"

namespace mvbsde {

struct PolicyValue {
    double myopic = 0.0;
    double hedge = 0.0;
    double total() const { return myopic + hedge; }
};

// Amount invested in the stock as a function of (grid step, factor value); never of wealth.
class PolicyField {
public:
    enum class Kind { complete, incomplete, constant, external_table, analytic };
    using Fn = std::function<PolicyValue(std::size_t, double)>;

    PolicyField(Kind kind, std::string id, TimeGrid grid, Fn fn);

    Kind kind() const { return kind_; }
    const std::string& id() const { return id_; }
    const TimeGrid& grid() const { return grid_; }

    PolicyValue components(std::size_t step, double r) const;
    double operator()(std::size_t step, double r) const { return components(step, r).total(); }

private:
    Kind kind_;
    std::string id_;
    TimeGrid grid_;
    Fn fn_;
};

// A(s) / (1 + int_s^T lambda(s,tau) dtau), the factor multiplying the myopic Sharpe term.
class MyopicCoefficient {
public:
    static MyopicCoefficient closed_form(const DiscountPreference& pref, double horizon);
    static MyopicCoefficient from_volterra(VolterraSolution sol, const DiscountPreference& pref,
                                           double horizon);
    double operator()(double s) const { return fn_(s); }

private:
    explicit MyopicCoefficient(std::function<double(double)> fn) : fn_(std::move(fn)) {}
    std::function<double(double)> fn_;
};

// (delta rho(s) / gamma) r^{kappa - 1/(2 alpha)} e^{-r0 (T - s)}.
double myopic_demand(const MarketModel& model, double s, double r);

// -varrho sigma_stock(r)^{-1} (sum_n w_n lambda(s, t_n) Z^n + Z^N) / (1 + sum_n w_n lambda(s, t_n))
// times e^{-r0 (T - s)}, with the trapezoid weights of the solver.
double hedging_demand(const MarketModel& model, const BsdeSolution& sol, std::size_t s_idx, double r);

// Incomplete-market policy: myopic term scaled by the coefficient plus the BSDE hedging term.
PolicyField equilibrium_policy(const MarketModel& model, const MyopicCoefficient& coeff,
                               std::shared_ptr<const BsdeSolution> sol, std::string id = "numerical");

// Complete-market policy (A(s)/D(s) / gamma) (mu - r0) / sigma^2 e^{-r0 (T - s)}, no hedging.
PolicyField complete_market_policy(const MarketModel& model, const MyopicCoefficient& coeff,
                                   const TimeGrid& grid, std::string id = "complete");

PolicyField constant_policy(double amount, const TimeGrid& grid, std::string id = "constant");

// Per-step piecewise-linear table in r; knots must be increasing.
PolicyField table_policy(std::vector<double> knots, std::vector<std::vector<double>> values,
                         const TimeGrid& grid, std::string id = "table");

// Rows (t, R, u_myopic, u_hedge, u_total) along a trajectory with one factor value per step.
void write_policy_curves_csv(const PolicyField& policy, const std::vector<double>& trajectory,
                             const std::string& path);

}  // namespace mvbsde
