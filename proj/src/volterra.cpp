#include "mvbsde/volterra.hpp"

#include <cmath>
#include <stdexcept>

#include "mvbsde/csv.hpp"

namespace mvbsde {

namespace {

Eigen::VectorXd uniform_nodes(double horizon, std::size_t n) {
    Eigen::VectorXd s(static_cast<Eigen::Index>(n + 1));
    for (std::size_t i = 0; i <= n; ++i)
        s(static_cast<Eigen::Index>(i)) = i == n ? horizon : horizon * static_cast<double>(i) / static_cast<double>(n);
    return s;
}

void check_finite(const VolterraProblem& p) {
    if (!p.theta.allFinite()) throw std::domain_error("Theta is not finite on the grid");
    for (Eigen::Index i = 0; i < p.kernel.rows(); ++i)
        for (Eigen::Index j = i; j < p.kernel.cols(); ++j)
            if (!std::isfinite(p.kernel(i, j))) throw std::domain_error("K is not finite on the grid");
}

}  // namespace

VolterraProblem VolterraProblem::from_functions(const ScalarFn& theta, const KernelFn& kernel,
                                                double horizon, std::size_t n_quad) {
    if (n_quad == 0) throw std::invalid_argument("n_quad must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    VolterraProblem p;
    p.horizon = horizon;
    p.n_quad = n_quad;
    p.nodes = uniform_nodes(horizon, n_quad);
    const auto n1 = p.nodes.size();
    p.theta.resize(n1);
    p.kernel = Eigen::MatrixXd::Zero(n1, n1);
    for (Eigen::Index i = 0; i < n1; ++i) {
        p.theta(i) = theta(p.nodes(i));
        for (Eigen::Index j = i; j < n1; ++j) p.kernel(i, j) = kernel(p.nodes(i), p.nodes(j));
    }
    check_finite(p);
    return p;
}

VolterraProblem build_problem(const DiscountPreference& pref, const ScalarFn& beta,
                              const ScalarFn& sigma, double horizon, std::size_t n_quad,
                              std::size_t refine) {
    if (n_quad == 0 || refine == 0) throw std::invalid_argument("n_quad and refine must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    const std::size_t nf = n_quad * refine;
    const double h = horizon / static_cast<double>(nf);
    const Eigen::VectorXd u = uniform_nodes(horizon, nf);
    const auto F1 = static_cast<Eigen::Index>(nf + 1);

    // lam(k, l) = lambda(u_k, u_l) and lam_t likewise, for l >= k.
    Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(F1, F1);
    Eigen::MatrixXd lam_t = Eigen::MatrixXd::Zero(F1, F1);
    if (!pref.lambda_is_zero()) {
        for (Eigen::Index k = 0; k < F1; ++k)
            for (Eigen::Index l = k; l < F1; ++l) {
                lam(k, l) = pref.lambda(u(k), u(l), horizon);
                lam_t(k, l) = pref.lambda_t(u(k), u(l), horizon);
            }
    }

    // Backward cumulative trapezoid: tail(k, l) = int_{u_l}^T f(u_k, .) for l >= k.
    auto tail_table = [&](const Eigen::MatrixXd& f) {
        Eigen::MatrixXd tail = Eigen::MatrixXd::Zero(F1, F1);
        for (Eigen::Index k = 0; k < F1; ++k)
            for (Eigen::Index l = F1 - 2; l >= k; --l)
                tail(k, l) = tail(k, l + 1) + 0.5 * h * (f(k, l) + f(k, l + 1));
        return tail;
    };
    const Eigen::MatrixXd lam_tail = tail_table(lam);
    const Eigen::MatrixXd lam_t_tail = tail_table(lam_t);
    // Forward cumulative trapezoid: head(k, l) = int_{u_k}^{u_l} lambda_t(u_k, .).
    Eigen::MatrixXd lam_t_head = Eigen::MatrixXd::Zero(F1, F1);
    for (Eigen::Index k = 0; k < F1; ++k)
        for (Eigen::Index l = k + 1; l < F1; ++l)
            lam_t_head(k, l) = lam_t_head(k, l - 1) + 0.5 * h * (lam_t(k, l - 1) + lam_t(k, l));

    // Integrand of Theta at each fine node, then its backward cumulative integral.
    Eigen::VectorXd integrand(F1);
    for (Eigen::Index k = 0; k < F1; ++k) {
        double d = u(k);
        double r = pref.rho(d);
        double dr = pref.rho.derivative(d);
        integrand(k) = dr + r * lam_t_tail(k, k) + dr * lam_tail(k, k) - lam(k, k) * r;
    }
    Eigen::VectorXd integral = Eigen::VectorXd::Zero(F1);
    for (Eigen::Index k = F1 - 2; k >= 0; --k)
        integral(k) = integral(k + 1) + 0.5 * h * (integrand(k) + integrand(k + 1));

    VolterraProblem p;
    p.horizon = horizon;
    p.n_quad = n_quad;
    p.nodes = uniform_nodes(horizon, n_quad);
    const auto n1 = p.nodes.size();
    const auto step = static_cast<Eigen::Index>(refine);
    p.theta.resize(n1);
    const double rho_T = pref.rho(horizon);
    for (Eigen::Index i = 0; i < n1; ++i) p.theta(i) = rho_T - integral(i * step);

    // K(s,tau) = (beta^2/sigma^2)(tau) / D(tau) * int_s^tau [P(d,tau) - Q(d,tau)] dd, where P is
    // the coupling through the terminal coefficient and Q the one through the running term.
    // Both equal int_tau^T lambda_t(d, e) de; P is read from the tail table, Q from the forward
    // table, so K carries only rounding noise.
    p.kernel = Eigen::MatrixXd::Zero(n1, n1);
    if (!pref.lambda_is_zero()) {
        for (Eigen::Index j = 0; j < n1; ++j) {
            const Eigen::Index lj = j * step;
            double tau = p.nodes(j);
            double b = beta(tau);
            double sg = sigma(tau);
            double pref_factor = b * b / (sg * sg) / (lam_tail(lj, lj) + 1.0);
            // diff(k) = P(u_k, tau) - Q(u_k, tau) for k <= lj.
            Eigen::VectorXd diff(lj + 1);
            for (Eigen::Index k = 0; k <= lj; ++k)
                diff(k) = lam_t_tail(k, lj) - (lam_t_head(k, F1 - 1) - lam_t_head(k, lj));
            double acc = 0.0;
            p.kernel(j, j) = 0.0;
            for (Eigen::Index i = j - 1; i >= 0; --i) {
                for (Eigen::Index k = (i + 1) * step; k > i * step; --k)
                    acc += 0.5 * h * (diff(k) + diff(k - 1));
                p.kernel(i, j) = pref_factor * acc;
            }
        }
    }
    check_finite(p);
    return p;
}

VolterraSolution solve_volterra(const VolterraProblem& p) {
    const auto n1 = p.nodes.size();
    if (n1 < 2 || p.theta.size() != n1 || p.kernel.rows() != n1 || p.kernel.cols() != n1)
        throw std::invalid_argument("malformed Volterra problem");
    const double h = p.horizon / static_cast<double>(n1 - 1);
    Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(n1, n1);
    for (Eigen::Index i = 0; i + 1 < n1; ++i)
        for (Eigen::Index j = i; j < n1; ++j) {
            double w = (j == i || j == n1 - 1) ? 0.5 * h : h;
            sys(i, j) -= w * p.kernel(i, j);
        }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys);
    if (!(lu.rcond() > 1e-14)) throw std::runtime_error("singular Volterra system");
    VolterraSolution sol;
    sol.nodes = p.nodes;
    sol.values = lu.solve(p.theta);
    return sol;
}

double VolterraSolution::operator()(double s) const {
    const auto n1 = nodes.size();
    if (s <= nodes(0)) return values(0);
    if (s >= nodes(n1 - 1)) return values(n1 - 1);
    double h = nodes(n1 - 1) / static_cast<double>(n1 - 1);
    auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(s / h), n1 - 2);
    double w = (s - nodes(i)) / (nodes(i + 1) - nodes(i));
    return (1.0 - w) * values(i) + w * values(i + 1);
}

double closed_form_A(const DiscountPreference& pref, double horizon, double s) {
    return pref.rho(s) * (pref.lambda_integral(s, s, horizon) + 1.0);
}

void write_volterra_csv(const VolterraSolution& sol, const DiscountPreference& pref,
                        double horizon, const std::string& path) {
    CsvWriter csv(path, {"s", "A_numeric", "A_closed_form", "abs_err"});
    for (Eigen::Index i = 0; i < sol.nodes.size(); ++i) {
        double s = sol.nodes(i);
        double exact = closed_form_A(pref, horizon, s);
        csv.field(s).field(sol.values(i)).field(exact).field(std::abs(sol.values(i) - exact)).end_row();
    }
}

}  // namespace mvbsde
