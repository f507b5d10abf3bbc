#include "mvbsde/statedep.hpp"

#include <cmath>

#include "mvbsde/csv.hpp"

namespace mvbsde {

StateDepError::StateDepError(double res, std::size_t it)
    : std::runtime_error("fixed-point iteration did not converge: residual " + std::to_string(res) +
                         " after " + std::to_string(it) + " iterations"),
      residual(res),
      iterations(it) {}

namespace {

struct Tables {
    Eigen::VectorXd s, beta, sigma2, rho;
    Eigen::MatrixXd lambda;  // lambda(s_i, s_j) for j >= i
    double h;
};

Tables tabulate(const StateDepProblem& p) {
    if (p.n_grid < 1) throw std::invalid_argument("grid needs at least one interval");
    if (!(p.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (!(p.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    const auto n1 = static_cast<Eigen::Index>(p.n_grid + 1);
    Tables t;
    t.h = p.horizon / static_cast<double>(p.n_grid);
    t.s.resize(n1);
    t.beta.resize(n1);
    t.sigma2.resize(n1);
    t.rho.resize(n1);
    t.lambda = Eigen::MatrixXd::Zero(n1, n1);
    for (Eigen::Index i = 0; i < n1; ++i) {
        t.s(i) = i + 1 == n1 ? p.horizon : static_cast<double>(i) * t.h;
    }
    for (Eigen::Index i = 0; i < n1; ++i) {
        t.beta(i) = p.beta(t.s(i));
        double sg = p.sigma(t.s(i));
        if (!(std::abs(sg) > 1e-12)) throw std::invalid_argument("sigma must stay away from zero");
        t.sigma2(i) = sg * sg;
        t.rho(i) = p.rho(t.s(i));
        for (Eigen::Index j = i; j < n1; ++j) t.lambda(i, j) = p.lambda(t.s(i), t.s(j));
    }
    return t;
}

Eigen::VectorXd rhs(const StateDepProblem& p, const Tables& t, const Eigen::VectorXd& phi) {
    const auto n1 = t.s.size();
    // Cumulative trapezoid integrals of r0 + beta phi and r0 + beta phi + sigma^2 phi^2 / 2.
    Eigen::VectorXd g1(n1), g2(n1), G1(n1), G2(n1);
    for (Eigen::Index k = 0; k < n1; ++k) {
        g1(k) = p.r0 + t.beta(k) * phi(k);
        g2(k) = g1(k) + 0.5 * t.sigma2(k) * phi(k) * phi(k);
    }
    G1(0) = 0.0;
    G2(0) = 0.0;
    for (Eigen::Index k = 1; k < n1; ++k) {
        G1(k) = G1(k - 1) + 0.5 * t.h * (g1(k - 1) + g1(k));
        G2(k) = G2(k - 1) + 0.5 * t.h * (g2(k - 1) + g2(k));
    }
    const Eigen::Index n = n1 - 1;
    Eigen::VectorXd out(n1);
    for (Eigen::Index i = 0; i < n1; ++i) {
        double num1 = 0.0, num3 = 0.0, den = 0.0;
        for (Eigen::Index j = i; j <= n && i < n; ++j) {
            double lam = t.lambda(i, j);
            if (lam == 0.0) continue;
            double w = (j == i || j == n) ? 0.5 * t.h : t.h;
            double d1 = G1(j) - G1(i);
            num1 += w * lam * std::exp(d1);
            num3 += w * lam * std::exp(2.0 * d1);
            den += w * lam * std::exp(2.0 * (G2(j) - G2(i)));
        }
        double d1T = G1(n) - G1(i);
        num1 = t.rho(i) * (num1 + std::exp(d1T));
        num3 += std::exp(2.0 * d1T);
        den += std::exp(2.0 * (G2(n) - G2(i)));
        double ratio = t.beta(i) / t.sigma2(i);
        out(i) = ratio / p.gamma * num1 / den + ratio * num3 / den - ratio;
    }
    return out;
}

}  // namespace

Eigen::VectorXd statedep_rhs(const StateDepProblem& problem, const Eigen::VectorXd& phi) {
    Tables t = tabulate(problem);
    if (phi.size() != t.s.size()) throw std::invalid_argument("phi length does not match the grid");
    return rhs(problem, t, phi);
}

StateDepSolution solve_phi(const StateDepProblem& problem, double tol, std::size_t max_iter, double omega) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (!(omega > 0.0 && omega <= 1.0)) throw std::invalid_argument("damping must lie in (0, 1]");
    Tables t = tabulate(problem);
    StateDepSolution sol;
    sol.s = t.s;
    sol.phi = rhs(problem, t, Eigen::VectorXd::Zero(t.s.size()));
    for (std::size_t it = 0; it <= max_iter; ++it) {
        Eigen::VectorXd next = rhs(problem, t, sol.phi);
        sol.residual = (next - sol.phi).cwiseAbs().maxCoeff();
        sol.iterations = it;
        if (!std::isfinite(sol.residual)) throw StateDepError(sol.residual, it);
        if (sol.residual < tol) return sol;
        sol.phi = (1.0 - omega) * sol.phi + omega * next;
    }
    throw StateDepError(sol.residual, max_iter);
}

void write_phi_csv(const StateDepSolution& sol, const std::string& path) {
    CsvWriter csv(path, {"s", "phi"});
    for (Eigen::Index i = 0; i < sol.s.size(); ++i) csv.field(sol.s(i)).field(sol.phi(i)).end_row();
}

}  // namespace mvbsde
