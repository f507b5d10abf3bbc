#pragma once

#include "mvbsde/model.hpp"
#include "mvbsde/policy.hpp"
#include "mvbsde/simulate.hpp"

namespace mvbsde {

// Closed-form b^T(s,r) for the square-root (p = 1/2) and Gaussian (p = 0, unit stock volatility)
// factors with rho = 1 and lambda = 0. The correlation term of the generator is absorbed into
// the factor drift, which becomes a - b' R with b' = b + varrho delta sigma.
class AnalyticBaseline {
public:
    enum class Kind { cir, ou };

    // Throws std::invalid_argument when the model is not of the required shape.
    static AnalyticBaseline cir(const MarketModel& model);
    static AnalyticBaseline ou(const MarketModel& model);
    // Chooses the kind from p.
    static AnalyticBaseline for_model(const MarketModel& model);

    Kind kind() const { return kind_; }
    double tilted_speed() const { return b_tilted_; }
    const MarketModel& model() const { return model_; }

    double b_T(double s, double r) const;
    double b_T_r(double s, double r) const;
    // -varrho n(r) / sigma_stock(r) * d/dr b^T * e^{-r0 (T - s)}.
    double hedging(double s, double r) const;
    double myopic(double s, double r) const;

private:
    AnalyticBaseline(Kind kind, const MarketModel& model);
    Kind kind_;
    MarketModel model_;
    double b_tilted_;
};

double cir_bT(const MarketModel& model, double s, double r);
double cir_hedging(const MarketModel& model, double s, double r);
double ou_bT(const MarketModel& model, double s, double r);
double ou_hedging(const MarketModel& model, double s, double r);

// Myopic term plus analytic hedging on the given grid.
PolicyField analytic_policy(const AnalyticBaseline& baseline, const TimeGrid& grid,
                            std::string id = "analytic");

// Rows (t, R, u_analytic) along a trajectory with one factor value per step.
void write_baseline_csv(const AnalyticBaseline& baseline, const TimeGrid& grid,
                        const std::vector<double>& trajectory, const std::string& path);

}  // namespace mvbsde
