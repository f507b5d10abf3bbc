#include "mvbsde/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvbsde/csv.hpp"

namespace mvbsde {

PolicyField::PolicyField(Kind kind, std::string id, TimeGrid grid, Fn fn)
    : kind_(kind), id_(std::move(id)), grid_(grid), fn_(std::move(fn)) {
    if (!fn_) throw std::invalid_argument("policy needs an evaluation function");
}

PolicyValue PolicyField::components(std::size_t step, double r) const {
    if (step > grid_.n_steps()) throw std::out_of_range("policy step outside grid");
    return fn_(step, r);
}

MyopicCoefficient MyopicCoefficient::closed_form(const DiscountPreference& pref, double horizon) {
    return MyopicCoefficient([pref, horizon](double s) {
        return closed_form_A(pref, horizon, s) / (1.0 + pref.lambda_integral(s, s, horizon));
    });
}

MyopicCoefficient MyopicCoefficient::from_volterra(VolterraSolution sol, const DiscountPreference& pref,
                                                   double horizon) {
    return MyopicCoefficient([sol = std::move(sol), pref, horizon](double s) {
        return sol(s) / (1.0 + pref.lambda_integral(s, s, horizon));
    });
}

namespace {

double discount(const MarketModel& model, double s) {
    return std::exp(-model.stock.r0 * (model.horizon - s));
}

double myopic_with(const MarketModel& model, double weight, double s, double r) {
    if (model.stock.delta == 0.0 || weight == 0.0) return 0.0;
    double e = model.ckls.kappa() - vol_exponent(model);
    return model.stock.delta * weight / model.pref.gamma * checked_pow(r, e) * discount(model, s);
}

// Trapezoid lambda-weights per step and the matching denominators.
struct HedgeWeights {
    std::vector<std::vector<double>> w;
    std::vector<double> denom;
};

HedgeWeights hedge_weights(const MarketModel& model, const TimeGrid& grid) {
    const std::size_t N = grid.n_steps();
    HedgeWeights hw{std::vector<std::vector<double>>(N + 1, std::vector<double>(N + 1, 0.0)),
                    std::vector<double>(N + 1, 1.0)};
    for (std::size_t t = 0; t <= N; ++t)
        for (std::size_t n = t; n <= N; ++n) {
            double w = trapezoid_weight(grid, t, n) *
                       model.pref.lambda(grid.time(t), grid.time(n), model.horizon);
            hw.w[t][n] = w;
            hw.denom[t] += w;
        }
    return hw;
}

double hedge_with(const MarketModel& model, const BsdeSolution& sol, const HedgeWeights& hw,
                  std::size_t t, double r) {
    const std::size_t N = sol.grid().n_steps();
    double num = sol.eval_Z(t, N, r);
    for (std::size_t n = t; n <= N; ++n)
        if (hw.w[t][n] != 0.0) num += hw.w[t][n] * sol.eval_Z(t, n, r);
    double inv_vol = checked_pow(r, -vol_exponent(model));
    return -model.stock.rho_corr * inv_vol * num / hw.denom[t] * discount(model, sol.grid().time(t));
}

}  // namespace

double myopic_demand(const MarketModel& model, double s, double r) {
    return myopic_with(model, model.pref.rho(s), s, r);
}

double hedging_demand(const MarketModel& model, const BsdeSolution& sol, std::size_t s_idx, double r) {
    if (s_idx > sol.grid().n_steps()) throw std::out_of_range("step outside the solution grid");
    if (std::abs(sol.grid().horizon() - model.horizon) > 1e-12 * model.horizon)
        throw std::invalid_argument("solution grid does not match the model horizon");
    return hedge_with(model, sol, hedge_weights(model, sol.grid()), s_idx, r);
}

PolicyField equilibrium_policy(const MarketModel& model, const MyopicCoefficient& coeff,
                               std::shared_ptr<const BsdeSolution> sol, std::string id) {
    if (!sol) throw std::invalid_argument("incomplete-market policy needs a BSDE solution");
    if (std::abs(sol->grid().horizon() - model.horizon) > 1e-12 * model.horizon)
        throw std::invalid_argument("solution grid does not match the model horizon");
    const TimeGrid grid = sol->grid();
    auto hw = std::make_shared<HedgeWeights>(hedge_weights(model, grid));
    std::vector<double> weight(grid.n_steps() + 1);
    for (std::size_t i = 0; i <= grid.n_steps(); ++i) weight[i] = coeff(grid.time(i));
    return PolicyField(PolicyField::Kind::incomplete, std::move(id), grid,
                       [model, sol, hw, weight, grid](std::size_t step, double r) {
                           double x = effective_factor(model, r);
                           PolicyValue v;
                           v.myopic = myopic_with(model, weight[step], grid.time(step), x);
                           v.hedge = hedge_with(model, *sol, *hw, step, x);
                           return v;
                       });
}

PolicyField complete_market_policy(const MarketModel& model, const MyopicCoefficient& coeff,
                                   const TimeGrid& grid, std::string id) {
    std::vector<double> weight(grid.n_steps() + 1);
    for (std::size_t i = 0; i <= grid.n_steps(); ++i) weight[i] = coeff(grid.time(i));
    return PolicyField(PolicyField::Kind::complete, std::move(id), grid,
                       [model, weight, grid](std::size_t step, double r) {
                           double s = grid.time(step);
                           Coefficients c = coefficients_at(model, s, effective_factor(model, r));
                           PolicyValue v;
                           v.myopic = weight[step] / model.pref.gamma * c.beta_excess /
                                      (c.sigma_stock * c.sigma_stock) * discount(model, s);
                           return v;
                       });
}

PolicyField constant_policy(double amount, const TimeGrid& grid, std::string id) {
    return PolicyField(PolicyField::Kind::constant, std::move(id), grid,
                       [amount](std::size_t, double) { return PolicyValue{amount, 0.0}; });
}

PolicyField table_policy(std::vector<double> knots, std::vector<std::vector<double>> values,
                         const TimeGrid& grid, std::string id) {
    if (knots.empty()) throw std::invalid_argument("policy table needs knots");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i] > knots[i - 1])) throw std::invalid_argument("policy table knots must increase");
    if (values.size() != grid.n_steps() + 1) throw std::invalid_argument("policy table needs one row per grid node");
    for (const auto& row : values)
        if (row.size() != knots.size()) throw std::invalid_argument("policy table row length mismatch");
    return PolicyField(PolicyField::Kind::external_table, std::move(id), grid,
                       [knots = std::move(knots), values = std::move(values)](std::size_t step, double r) {
                           const auto& row = values[step];
                           double u;
                           if (knots.size() == 1 || r <= knots.front()) {
                               u = row.front();
                           } else if (r >= knots.back()) {
                               u = row.back();
                           } else {
                               auto it = std::upper_bound(knots.begin(), knots.end(), r);
                               std::size_t i = static_cast<std::size_t>(it - knots.begin()) - 1;
                               double w = (r - knots[i]) / (knots[i + 1] - knots[i]);
                               u = (1.0 - w) * row[i] + w * row[i + 1];
                           }
                           return PolicyValue{u, 0.0};
                       });
}

void write_policy_curves_csv(const PolicyField& policy, const std::vector<double>& trajectory,
                             const std::string& path) {
    const TimeGrid& grid = policy.grid();
    if (trajectory.size() != grid.n_steps() + 1)
        throw std::invalid_argument("trajectory needs one factor value per grid node");
    CsvWriter csv(path, {"t", "R", "u_myopic", "u_hedge", "u_total"});
    for (std::size_t i = 0; i <= grid.n_steps(); ++i) {
        PolicyValue v = policy.components(i, trajectory[i]);
        csv.field(grid.time(i)).field(trajectory[i]).field(v.myopic).field(v.hedge).field(v.total()).end_row();
    }
}

}  // namespace mvbsde
