#include "mvbsde/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "mvbsde/csv.hpp"
#include "mvbsde/detail/special.hpp"

namespace mvbsde {

namespace {

void require_degenerate_preferences(const MarketModel& model) {
    if (!model.pref.lambda_is_zero() || !model.pref.rho.is_identically(1.0))
        throw std::invalid_argument("analytic baseline needs rho = 1 and lambda = 0");
}

}  // namespace

AnalyticBaseline::AnalyticBaseline(Kind kind, const MarketModel& model)
    : kind_(kind),
      model_(model),
      b_tilted_(model.ckls.b + model.stock.rho_corr * model.stock.delta * model.ckls.sigma) {}

AnalyticBaseline AnalyticBaseline::cir(const MarketModel& model) {
    check_invariants(model);
    if (model.ckls.p != 0.5) throw std::invalid_argument("square-root baseline needs p = 1/2");
    require_degenerate_preferences(model);
    return AnalyticBaseline(Kind::cir, model);
}

AnalyticBaseline AnalyticBaseline::ou(const MarketModel& model) {
    check_invariants(model);
    if (model.ckls.p != 0.0 || !model.stock.ou_limit)
        throw std::invalid_argument("Gaussian baseline needs p = 0 and unit stock volatility");
    require_degenerate_preferences(model);
    return AnalyticBaseline(Kind::ou, model);
}

AnalyticBaseline AnalyticBaseline::for_model(const MarketModel& model) {
    if (model.ckls.p == 0.5) return cir(model);
    if (model.ckls.p == 0.0) return ou(model);
    throw std::invalid_argument("no analytic baseline for this p");
}

double AnalyticBaseline::b_T(double s, double r) const {
    const double u = model_.horizon - s;
    const double x = b_tilted_ * u;
    const double scale = model_.stock.delta * model_.stock.delta / model_.pref.gamma;
    const double a = model_.ckls.a;
    if (kind_ == Kind::cir) {
        // int_0^u E'[R] = r u phi1(b'u) + a u^2 phi2(b'u).
        return scale * (r * u * detail::phi1(x) + a * u * u * detail::phi2(x));
    }
    // E'[R] = r + c g(v) with c = a - b' r and g(v) = (1 - e^{-b'v}) / b'.
    const double c = a - b_tilted_ * r;
    const double sg = model_.ckls.sigma;
    double mean_sq = r * r * u + 2.0 * r * c * u * u * detail::phi2(x) + c * c * u * u * u * detail::phi3(x);
    double var = sg * sg * u * u * detail::phi2(2.0 * x);
    return scale * (mean_sq + var);
}

double AnalyticBaseline::b_T_r(double s, double r) const {
    const double u = model_.horizon - s;
    const double x = b_tilted_ * u;
    const double scale = model_.stock.delta * model_.stock.delta / model_.pref.gamma;
    if (kind_ == Kind::cir) return scale * u * detail::phi1(x);
    const double c = model_.ckls.a - b_tilted_ * r;
    const double bp = b_tilted_;
    return scale * (2.0 * r * u + 2.0 * (c - bp * r) * u * u * detail::phi2(x) -
                    2.0 * bp * c * u * u * u * detail::phi3(x));
}

double AnalyticBaseline::hedging(double s, double r) const {
    double x = effective_factor(model_, r);
    Coefficients co = coefficients_at(model_, s, x);
    return -model_.stock.rho_corr * co.n_diff / co.sigma_stock * b_T_r(s, x) *
           std::exp(-model_.stock.r0 * (model_.horizon - s));
}

double AnalyticBaseline::myopic(double s, double r) const {
    return myopic_demand(model_, s, effective_factor(model_, r));
}

double cir_bT(const MarketModel& model, double s, double r) { return AnalyticBaseline::cir(model).b_T(s, r); }
double cir_hedging(const MarketModel& model, double s, double r) {
    return AnalyticBaseline::cir(model).hedging(s, r);
}
double ou_bT(const MarketModel& model, double s, double r) { return AnalyticBaseline::ou(model).b_T(s, r); }
double ou_hedging(const MarketModel& model, double s, double r) {
    return AnalyticBaseline::ou(model).hedging(s, r);
}

PolicyField analytic_policy(const AnalyticBaseline& baseline, const TimeGrid& grid, std::string id) {
    return PolicyField(PolicyField::Kind::analytic, std::move(id), grid,
                       [baseline, grid](std::size_t step, double r) {
                           double s = grid.time(step);
                           return PolicyValue{baseline.myopic(s, r), baseline.hedging(s, r)};
                       });
}

void write_baseline_csv(const AnalyticBaseline& baseline, const TimeGrid& grid,
                        const std::vector<double>& trajectory, const std::string& path) {
    if (trajectory.size() != grid.n_steps() + 1)
        throw std::invalid_argument("trajectory needs one factor value per grid node");
    CsvWriter csv(path, {"t", "R", "u_analytic"});
    for (std::size_t i = 0; i <= grid.n_steps(); ++i) {
        double s = grid.time(i);
        double r = trajectory[i];
        csv.field(s).field(r).field(baseline.myopic(s, r) + baseline.hedging(s, r)).end_row();
    }
}

}  // namespace mvbsde
