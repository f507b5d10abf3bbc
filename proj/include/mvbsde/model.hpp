#pragma once

#include <string>
#include <vector>

namespace mvbsde {

// Mean-reverting factor dR = (a - b R) ds + sigma R^p dB^R.
struct CklsParams {
    double a = 0.0;
    double b = 0.0;
    double sigma = 0.0;
    double p = 0.5;
    double r0_factor = 1.0;

    double kappa() const { return 1.0 - p; }
};

// Stock with drift r0 + delta R^{(1+2 kappa alpha)/(2 alpha)} and volatility R^{1/(2 alpha)}.
// ou_limit replaces the finite alpha by its infinite limit: unit volatility, drift exponent kappa.
struct StockSpec {
    double r0 = 0.0;
    double delta = 0.0;
    double alpha = -1.0;
    double rho_corr = 0.0;
    bool ou_limit = false;
};

// Time weight rho(s) on the terminal mean-variance term.
struct RhoWeight {
    enum class Kind { constant, exponential, grid };
    Kind kind = Kind::constant;
    double value = 1.0;  // constant level, or scale of value * exp(rate s)
    double rate = 0.0;
    std::vector<double> grid_s;
    std::vector<double> grid_v;
    std::vector<double> grid_dv;  // optional; finite differences when empty

    static RhoWeight constant(double v);
    static RhoWeight exponential(double scale, double rate);
    static RhoWeight from_grid(std::vector<double> s, std::vector<double> v,
                               std::vector<double> dv = {});

    double operator()(double s) const;
    double derivative(double s) const;
    double sup_abs(double horizon) const;
    bool is_identically(double v) const;
};

// Running discount eta(s,tau) = scale * exp(-rate (tau - s)); zero when scale is 0.
struct EtaKernel {
    enum class Kind { zero, constant, exponential };
    Kind kind = Kind::zero;
    double scale = 0.0;
    double rate = 0.0;

    static EtaKernel zero();
    static EtaKernel constant(double c);
    static EtaKernel exponential(double rate, double scale = 1.0);
};

// Terminal discount mu(s,T) = exp(-rate (T - s)).
struct MuKernel {
    enum class Kind { one, exponential };
    Kind kind = Kind::one;
    double rate = 0.0;

    static MuKernel one();
    static MuKernel exponential(double rate);
};

struct DiscountPreference {
    double gamma = 1.0;
    RhoWeight rho;
    EtaKernel eta;
    MuKernel mu;

    // lambda(s,tau) = eta(s,tau) / mu(s,T).
    double lambda(double s, double tau, double horizon) const;
    // Partial derivative of lambda in its first argument.
    double lambda_t(double s, double tau, double horizon) const;
    // Integral of lambda(s, .) over [from, T].
    double lambda_integral(double s, double from, double horizon) const;
    // Exact supremum of |lambda| over 0 <= s <= tau <= T.
    double lambda_bound(double horizon) const;
    bool lambda_is_zero() const;
};

struct MarketModel {
    CklsParams ckls;
    StockSpec stock;
    DiscountPreference pref;
    double horizon = 1.0;
};

struct Coefficients {
    double mu = 0.0;
    double sigma_stock = 0.0;
    double beta_excess = 0.0;
    double m_drift = 0.0;
    double n_diff = 0.0;
};

// Throws std::invalid_argument when a type invariant is violated.
void check_invariants(const MarketModel& model);

// Exponent of r in the stock volatility, 0 under ou_limit.
double vol_exponent(const MarketModel& model);
// Exponent of r in the excess return.
double drift_exponent(const MarketModel& model);

// r^e with a domain error where the power is undefined.
double checked_pow(double r, double e);

// Factor value fed to fractional powers: the positive part when p > 0.
double effective_factor(const MarketModel& model, double r);

Coefficients coefficients_at(const MarketModel& model, double s, double r);

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double bound = 0.0;
    std::string note;
};

struct ValidationReport {
    double beta = 0.0;
    double lambda_bound = 0.0;
    std::vector<CheckResult> checks;

    bool ok() const;
    const CheckResult* find(const std::string& name) const;
    std::string to_string() const;
};

// Smallest beta with 12 m / beta + 24 m / beta^2 < 1, m = max(c^2 T^2, 1), times 1.1.
double min_beta(double c, double horizon);

// Right-hand side b / (sigma^2 kappa (1 - exp(-2 b kappa T))) of the moment bound.
double general_moment_bound(double b, double sigma, double kappa, double horizon);
// Square-root specialization 2 b / ((1 - exp(-b T)) sigma^2).
double cir_moment_bound(double b, double sigma, double horizon);
// Gaussian specialization b / ((1 - exp(-2 b T)) sigma^2).
double ou_moment_bound(double b, double sigma, double horizon);
// Explosion threshold 2 b^3 T^2 e^{bT} / (sigma^2 (2 e^{bT} - (1 + bT)^2 - 1)) for b > 0.
double explosion_threshold(double b, double sigma, double horizon);

ValidationReport validate_model(const MarketModel& model);

}  // namespace mvbsde
