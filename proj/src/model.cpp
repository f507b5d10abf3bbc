#include "mvbsde/model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mvbsde/detail/special.hpp"

namespace mvbsde {

namespace {

std::size_t segment_of(const std::vector<double>& xs, double x) {
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
    return std::min(i, xs.size() - 2);
}

double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    std::size_t i = segment_of(xs, x);
    double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return (1.0 - w) * ys[i] + w * ys[i + 1];
}

}  // namespace

RhoWeight RhoWeight::constant(double v) {
    RhoWeight w;
    w.kind = Kind::constant;
    w.value = v;
    return w;
}

RhoWeight RhoWeight::exponential(double scale, double rate) {
    RhoWeight w;
    w.kind = Kind::exponential;
    w.value = scale;
    w.rate = rate;
    return w;
}

RhoWeight RhoWeight::from_grid(std::vector<double> s, std::vector<double> v,
                               std::vector<double> dv) {
    if (s.size() < 2 || s.size() != v.size())
        throw std::invalid_argument("rho grid needs at least two points and matching values");
    if (!dv.empty() && dv.size() != s.size())
        throw std::invalid_argument("rho derivative grid size mismatch");
    for (std::size_t i = 1; i < s.size(); ++i)
        if (!(s[i] > s[i - 1])) throw std::invalid_argument("rho grid must be increasing");
    RhoWeight w;
    w.kind = Kind::grid;
    w.grid_s = std::move(s);
    w.grid_v = std::move(v);
    w.grid_dv = std::move(dv);
    return w;
}

double RhoWeight::operator()(double s) const {
    switch (kind) {
        case Kind::constant: return value;
        case Kind::exponential: return value * std::exp(rate * s);
        case Kind::grid: return interp(grid_s, grid_v, s);
    }
    return 0.0;
}

double RhoWeight::derivative(double s) const {
    switch (kind) {
        case Kind::constant: return 0.0;
        case Kind::exponential: return rate * value * std::exp(rate * s);
        case Kind::grid: {
            if (!grid_dv.empty()) return interp(grid_s, grid_dv, s);
            std::size_t i = segment_of(grid_s, s);
            return (grid_v[i + 1] - grid_v[i]) / (grid_s[i + 1] - grid_s[i]);
        }
    }
    return 0.0;
}

double RhoWeight::sup_abs(double horizon) const {
    switch (kind) {
        case Kind::constant: return std::abs(value);
        case Kind::exponential:
            return std::abs(value) * std::max(1.0, std::exp(rate * horizon));
        case Kind::grid: {
            double m = 0.0;
            for (double v : grid_v) m = std::max(m, std::abs(v));
            return m;
        }
    }
    return 0.0;
}

bool RhoWeight::is_identically(double v) const {
    switch (kind) {
        case Kind::constant: return value == v;
        case Kind::exponential: return rate == 0.0 && value == v;
        case Kind::grid:
            return std::all_of(grid_v.begin(), grid_v.end(), [v](double x) { return x == v; });
    }
    return false;
}

EtaKernel EtaKernel::zero() { return {}; }

EtaKernel EtaKernel::constant(double c) {
    EtaKernel k;
    k.kind = Kind::constant;
    k.scale = c;
    return k;
}

EtaKernel EtaKernel::exponential(double rate, double scale) {
    EtaKernel k;
    k.kind = Kind::exponential;
    k.scale = scale;
    k.rate = rate;
    return k;
}

MuKernel MuKernel::one() { return {}; }

MuKernel MuKernel::exponential(double rate) {
    MuKernel k;
    k.kind = Kind::exponential;
    k.rate = rate;
    return k;
}

double DiscountPreference::lambda(double s, double tau, double horizon) const {
    if (lambda_is_zero()) return 0.0;
    return eta.scale * std::exp(-eta.rate * (tau - s) + mu.rate * (horizon - s));
}

double DiscountPreference::lambda_t(double s, double tau, double horizon) const {
    return (eta.rate - mu.rate) * lambda(s, tau, horizon);
}

double DiscountPreference::lambda_integral(double s, double from, double horizon) const {
    if (lambda_is_zero()) return 0.0;
    double len = horizon - from;
    return eta.scale * std::exp(mu.rate * (horizon - s) - eta.rate * (from - s)) * len *
           detail::phi1(eta.rate * len);
}

double DiscountPreference::lambda_bound(double horizon) const {
    if (lambda_is_zero()) return 0.0;
    double e = std::max({mu.rate * horizon, (mu.rate - eta.rate) * horizon, 0.0});
    return std::abs(eta.scale) * std::exp(e);
}

bool DiscountPreference::lambda_is_zero() const {
    return eta.kind == EtaKernel::Kind::zero || eta.scale == 0.0;
}

void check_invariants(const MarketModel& model) {
    const auto& c = model.ckls;
    if (!(c.p >= 0.0 && c.p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
    if (!(c.sigma >= 0.0)) throw std::invalid_argument("factor sigma must be non-negative");
    if (!(c.r0_factor > 0.0)) throw std::invalid_argument("initial factor value must be positive");
    if (c.p > 0.0 && c.p < 1.0 && !(c.a > 0.0))
        throw std::invalid_argument("a must be positive for p in (0, 1)");
    if (c.p == 1.0 && !(c.a >= 0.0 && c.b < 0.0))
        throw std::invalid_argument("p = 1 requires a >= 0 and b < 0");
    if (!model.stock.ou_limit && model.stock.alpha == 0.0)
        throw std::invalid_argument("alpha must be nonzero");
    if (!(std::abs(model.stock.rho_corr) < 1.0))
        throw std::invalid_argument("correlation must lie in (-1, 1)");
    if (!(model.horizon > 0.0) || !std::isfinite(model.horizon))
        throw std::invalid_argument("horizon must be finite and positive");
    if (!(model.pref.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
}

double vol_exponent(const MarketModel& model) {
    return model.stock.ou_limit ? 0.0 : 1.0 / (2.0 * model.stock.alpha);
}

double drift_exponent(const MarketModel& model) {
    return vol_exponent(model) + model.ckls.kappa();
}

double checked_pow(double r, double e) {
    if (e == 0.0) return 1.0;
    if (r > 0.0) return std::pow(r, e);
    if (r == 0.0) {
        if (e > 0.0) return 0.0;
        throw std::domain_error("negative power of a zero factor value");
    }
    if (std::trunc(e) == e) return std::pow(r, e);
    throw std::domain_error("fractional power of a negative factor value");
}

double effective_factor(const MarketModel& model, double r) {
    return model.ckls.p > 0.0 ? std::max(r, 0.0) : r;
}

Coefficients coefficients_at(const MarketModel& model, double /*s*/, double r) {
    Coefficients out;
    out.beta_excess = model.stock.delta == 0.0
                          ? 0.0
                          : model.stock.delta * checked_pow(r, drift_exponent(model));
    out.mu = model.stock.r0 + out.beta_excess;
    out.sigma_stock = checked_pow(r, vol_exponent(model));
    out.m_drift = model.ckls.a - model.ckls.b * r;
    out.n_diff = model.ckls.sigma * checked_pow(r, model.ckls.p);
    return out;
}

bool ValidationReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    os << std::setprecision(12);
    os << "beta = " << beta << ", lambda bound = " << lambda_bound << '\n';
    for (const auto& c : checks) {
        os << (c.passed ? "PASS " : "FAIL ") << c.name << ": value = " << c.value
           << ", bound = " << c.bound;
        if (!c.note.empty()) os << " (" << c.note << ')';
        os << '\n';
    }
    return os.str();
}

double min_beta(double c, double horizon) {
    double m = std::max(c * c * horizon * horizon, 1.0);
    // Positive root of beta^2 - 12 m beta - 24 m = 0.
    double root = 6.0 * m + std::sqrt(36.0 * m * m + 24.0 * m);
    return 1.1 * root;
}

double general_moment_bound(double b, double sigma, double kappa, double horizon) {
    if (kappa == 0.0 || sigma == 0.0) return std::numeric_limits<double>::infinity();
    // b / (1 - e^{-x}) with x = 2 b kappa T, written to stay finite as b -> 0.
    double x = 2.0 * b * kappa * horizon;
    double ratio = 1.0 / (2.0 * kappa * horizon * detail::phi1(x));
    return ratio / (sigma * sigma * kappa);
}

double cir_moment_bound(double b, double sigma, double horizon) {
    return 2.0 * b / (-std::expm1(-b * horizon) * sigma * sigma);
}

double ou_moment_bound(double b, double sigma, double horizon) {
    return b / (-std::expm1(-2.0 * b * horizon) * sigma * sigma);
}

double explosion_threshold(double b, double sigma, double horizon) {
    double bt = b * horizon;
    double e = std::exp(bt);
    double denom = sigma * sigma * (2.0 * e - (1.0 + bt) * (1.0 + bt) - 1.0);
    return 2.0 * b * b * b * horizon * horizon * e / denom;
}

ValidationReport validate_model(const MarketModel& model) {
    check_invariants(model);
    const double T = model.horizon;
    ValidationReport rep;
    rep.lambda_bound = model.pref.lambda_bound(T);
    rep.beta = min_beta(rep.lambda_bound, T);

    double m = std::max(rep.lambda_bound * rep.lambda_bound * T * T, 1.0);
    CheckResult beta_check;
    beta_check.name = "beta_condition";
    beta_check.value = 12.0 * m / rep.beta + 24.0 * m / (rep.beta * rep.beta);
    beta_check.bound = 1.0;
    beta_check.passed = beta_check.value < beta_check.bound;
    rep.checks.push_back(beta_check);

    const double rho = model.stock.rho_corr;
    const double delta = model.stock.delta;
    const double lhs = rep.beta * rho * rho * delta * delta * T;

    CheckResult moment;
    moment.name = "moment_bound";
    moment.value = lhs;
    moment.bound = general_moment_bound(model.ckls.b, model.ckls.sigma, model.ckls.kappa(), T);
    moment.passed = lhs < moment.bound;
    rep.checks.push_back(moment);

    if (model.ckls.p == 0.5 && model.ckls.b > 0.0 && model.ckls.sigma > 0.0) {
        CheckResult explode;
        explode.name = "moment_explosion";
        explode.value = lhs;
        explode.bound = explosion_threshold(model.ckls.b, model.ckls.sigma, T);
        explode.passed = lhs < explode.bound;
        if (!explode.passed) explode.note = "moment explosion: exponential moment of R diverges";
        rep.checks.push_back(explode);
    }

    CheckResult bounded;
    bounded.name = "weights_bounded";
    bounded.value = std::max(model.pref.rho.sup_abs(T), rep.lambda_bound);
    bounded.bound = std::numeric_limits<double>::infinity();
    bounded.passed = std::isfinite(bounded.value);
    rep.checks.push_back(bounded);

    if (model.pref.mu.kind == MuKernel::Kind::exponential &&
        model.pref.eta.kind == EtaKernel::Kind::exponential) {
        CheckResult unity;
        unity.name = "terminal_ratio";
        for (int j = 0; j <= 10; ++j) {
            double s = T * j / 10.0;
            unity.value = std::max(unity.value, std::abs(model.pref.lambda(s, T, T) - 1.0));
        }
        unity.bound = 1e-12;
        unity.passed = unity.value <= unity.bound;
        if (!unity.passed) unity.note = "lambda(s, T) must equal 1 for exponential terminal discount";
        rep.checks.push_back(unity);
    }
    return rep;
}

}  // namespace mvbsde
