#include "mvbsde/bsde.hpp"

#include <cmath>
#include <fstream>

#include "mvbsde/csv.hpp"
#include "mvbsde/parallel.hpp"

namespace mvbsde {

void SolverConfig::validate() const {
    if (picard_iters == 0 || layer_sweeps == 0 || basis_size == 0)
        throw std::invalid_argument("picard_iters, layer_sweeps and basis_size must be positive");
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
}

SolverError::SolverError(const std::string& what, std::size_t t, std::size_t tau, std::size_t m)
    : std::runtime_error(what + " at t_idx=" + std::to_string(t) + ", tau_idx=" +
                         std::to_string(tau) + ", path=" + std::to_string(m)),
      t_idx(t),
      tau_idx(tau),
      path(m) {}

BsdeSolution::BsdeSolution(TimeGrid grid, std::size_t basis_size, TerminalMap terminal)
    : grid_(grid),
      basis_size_(basis_size),
      terminal_(std::move(terminal)),
      bases_(grid.n_steps() + 1, LaguerreBasis(basis_size)),
      coef_y_((grid.n_steps() + 1) * (grid.n_steps() + 1)),
      coef_z_((grid.n_steps() + 1) * (grid.n_steps() + 1)) {}

std::size_t BsdeSolution::slot(std::size_t t, std::size_t tau) const {
    const std::size_t N = grid_.n_steps();
    if (tau > N || t > tau) throw std::out_of_range("index outside the (t, tau) triangle");
    return t * (N + 1) + tau;
}

double BsdeSolution::eval_Y(std::size_t t, std::size_t tau, double r) const {
    std::size_t k = slot(t, tau);
    if (t == tau) return terminal_ ? terminal_(tau, r) : 0.0;
    const auto& c = coef_y_[k];
    if (c.size() == 0) return 0.0;
    return bases_[t].eval(r).dot(c);
}

double BsdeSolution::eval_Z(std::size_t t, std::size_t tau, double r) const {
    std::size_t k = slot(t, tau);
    if (t == tau) return 0.0;
    const auto& c = coef_z_[k];
    if (c.size() == 0) return 0.0;
    return bases_[t].eval(r).dot(c);
}

const Eigen::VectorXd& BsdeSolution::coef_y(std::size_t t, std::size_t tau) const {
    return coef_y_[slot(t, tau)];
}

const Eigen::VectorXd& BsdeSolution::coef_z(std::size_t t, std::size_t tau) const {
    return coef_z_[slot(t, tau)];
}

const LaguerreBasis& BsdeSolution::basis(std::size_t t) const {
    if (t > grid_.n_steps()) throw std::out_of_range("time index outside grid");
    return bases_[t];
}

void BsdeSolution::set_basis(std::size_t t, const LaguerreBasis& basis) {
    if (t > grid_.n_steps()) throw std::out_of_range("time index outside grid");
    if (basis.size() != basis_size_) throw std::invalid_argument("basis size mismatch");
    bases_[t] = basis;
}

void BsdeSolution::set_coefficients(std::size_t t, std::size_t tau, Eigen::VectorXd y,
                                    Eigen::VectorXd z) {
    if (t == tau) throw std::invalid_argument("diagonal entries are fixed by the terminal map");
    if (static_cast<std::size_t>(y.size()) != basis_size_ ||
        static_cast<std::size_t>(z.size()) != basis_size_)
        throw std::invalid_argument("coefficient length mismatch");
    std::size_t k = slot(t, tau);
    coef_y_[k] = std::move(y);
    coef_z_[k] = std::move(z);
}

bool BsdeSolution::converged() const {
    for (const auto& d : diagnostics_)
        if (!d.converged) return false;
    return true;
}

double trapezoid_weight(const TimeGrid& grid, std::size_t t, std::size_t n) {
    const std::size_t N = grid.n_steps();
    if (n < t || n > N) throw std::out_of_range("quadrature node outside [t, N]");
    if (t == N) return 0.0;
    return (n == t || n == N) ? 0.5 * grid.dt() : grid.dt();
}

BsdeSolution solve_bsde(const Generator& gen, const PathEnsemble& ens, const SolverConfig& cfg,
                        const TerminalMap& terminal) {
    cfg.validate();
    if (!gen.h) throw std::invalid_argument("generator has no h");
    const TimeGrid& grid = ens.grid;
    const std::size_t N = grid.n_steps();
    const std::size_t M = ens.n_paths;
    const std::size_t K = cfg.basis_size;
    const auto Ki = static_cast<Eigen::Index>(K);
    if (M < 2 * K) throw std::invalid_argument("need at least 2K paths");
    const double dt = grid.dt();
    const std::size_t threads = resolve_threads(cfg.threads);

    BsdeSolution sol(grid, K, terminal);
    auto xi = [&](std::size_t tau, double r) { return terminal ? terminal(tau, r) : 0.0; };

    // next[tau] and next_z[tau] hold Y^tau_{t+1}, Z^tau_{t+1} at R_{t+1} for tau >= t+1.
    std::vector<Eigen::VectorXd> next(N + 1);
    std::vector<Eigen::VectorXd> next_z(N + 1, Eigen::VectorXd::Zero(M));
    {
        Eigen::VectorXd y(M);
        for (std::size_t m = 0; m < M; ++m) y(m) = xi(N, ens.factor(m, N));
        next[N] = std::move(y);
    }

    for (std::size_t t = N; t-- > 0;) {
        const double s = grid.time(t);
        const Eigen::VectorXd r_t = ens.factor.col(t);
        const Eigen::VectorXd db = ens.db_factor.col(t);
        const LaguerreBasis basis = LaguerreBasis::fit(r_t, K);
        sol.set_basis(t, basis);
        const Eigen::MatrixXd Q = basis.design(r_t);
        Eigen::MatrixXd design(M, 2 * Ki);
        design.leftCols(Ki) = Q;
        design.rightCols(Ki) = Q.array().colwise() * db.array();
        const LsqProjector proj(design);

        // Quadrature weights of the nonlocal sums over n = t..N.
        std::vector<double> wy(N + 1, 0.0), wz(N + 1, 0.0);
        for (std::size_t n = t; n <= N; ++n) {
            double w = trapezoid_weight(grid, t, n);
            if (gen.y_weight) wy[n] = w * gen.y_weight(s, grid.time(n));
            if (gen.z_weight) wz[n] = w * gen.z_weight(s, grid.time(n));
        }

        // Same-layer fields; zero coefficients until estimated.
        std::vector<Eigen::VectorXd> ycur(N + 1, Eigen::VectorXd::Zero(M));
        std::vector<Eigen::VectorXd> zcur(N + 1, Eigen::VectorXd::Zero(M));
        for (std::size_t m = 0; m < M; ++m) ycur[t](m) = xi(t, r_t(m));
        std::vector<Eigen::VectorXd> coef(N + 1, Eigen::VectorXd::Zero(2 * Ki));

        LayerDiagnostic diag;
        diag.t_idx = t;
        diag.rank = proj.rank();
        diag.condition = proj.smallest_retained();
        Eigen::VectorXd target(M);
        if (cfg.generator_point == GeneratorPoint::next) {
            const std::size_t t1 = t + 1;
            const double s1 = grid.time(t1);
            std::vector<double> wy1(N + 1, 0.0), wz1(N + 1, 0.0);
            for (std::size_t n = t1; n <= N; ++n) {
                double w = trapezoid_weight(grid, t1, n);
                if (gen.y_weight) wy1[n] = w * gen.y_weight(s1, grid.time(n));
                if (gen.z_weight) wz1[n] = w * gen.z_weight(s1, grid.time(n));
            }
            for (std::size_t tau = N; tau > t; --tau) {
                parallel_for(M, threads, [&](std::size_t begin, std::size_t end) {
                    for (std::size_t m = begin; m < end; ++m) {
                        GeneratorArgs a;
                        a.y_self = next[tau](m);
                        a.z_self = next_z[tau](m);
                        a.y_terminal = next[N](m);
                        a.z_terminal = next_z[N](m);
                        if (gen.y_weight)
                            for (std::size_t n = t1; n <= N; ++n) a.y_nonlocal += wy1[n] * next[n](m);
                        if (gen.z_weight)
                            for (std::size_t n = t1; n <= N; ++n) a.z_nonlocal += wz1[n] * next_z[n](m);
                        double h = gen.h(tau, t1, ens.factor(m, t1), a);
                        if (!std::isfinite(h)) throw SolverError("non-finite generator value", t, tau, m);
                        target(m) = next[tau](m) + dt * h;
                    }
                });
                coef[tau] = proj.coefficients(target);
                if (!coef[tau].allFinite()) throw SolverError("non-finite regression coefficients", t, tau, 0);
                ycur[tau] = Q * coef[tau].head(Ki);
                zcur[tau] = Q * coef[tau].tail(Ki);
            }
            diag.sweeps = 1;
            diag.converged = true;
        }
        for (std::size_t sweep = 1; sweep <= cfg.layer_sweeps && cfg.generator_point == GeneratorPoint::current;
             ++sweep) {
            double delta = 0.0;
            for (std::size_t tau = N; tau > t; --tau) {
                Eigen::VectorXd p = coef[tau];
                for (std::size_t it = 0; it < cfg.picard_iters; ++it) {
                    parallel_for(M, threads, [&](std::size_t begin, std::size_t end) {
                        for (std::size_t m = begin; m < end; ++m) {
                            GeneratorArgs a;
                            a.y_self = ycur[tau](m);
                            a.z_self = zcur[tau](m);
                            a.y_terminal = ycur[N](m);
                            a.z_terminal = zcur[N](m);
                            if (gen.y_weight)
                                for (std::size_t n = t; n <= N; ++n) a.y_nonlocal += wy[n] * ycur[n](m);
                            if (gen.z_weight)
                                for (std::size_t n = t; n <= N; ++n) a.z_nonlocal += wz[n] * zcur[n](m);
                            double h = gen.h(tau, t, r_t(m), a);
                            if (!std::isfinite(h)) throw SolverError("non-finite generator value", t, tau, m);
                            target(m) = next[tau](m) + dt * h;
                        }
                    });
                    p = proj.coefficients(target);
                    ycur[tau] = Q * p.head(Ki);
                    zcur[tau] = Q * p.tail(Ki);
                }
                if (!p.allFinite()) throw SolverError("non-finite regression coefficients", t, tau, 0);
                delta = std::max(delta, (p - coef[tau]).cwiseAbs().maxCoeff());
                coef[tau] = p;
            }
            diag.sweeps = sweep;
            diag.last_delta = delta;
            if (sweep > 1 && delta < cfg.tolerance) {
                diag.converged = true;
                break;
            }
        }
        // One sweep has no stale inputs when the columns do not couple through nonlocal sums.
        if (cfg.generator_point == GeneratorPoint::current && cfg.layer_sweeps == 1)
            diag.converged = !gen.y_weight && !gen.z_weight;
        sol.add_diagnostic(diag);
        for (std::size_t tau = t + 1; tau <= N; ++tau)
            sol.set_coefficients(t, tau, coef[tau].head(Ki), coef[tau].tail(Ki));

        // Y^tau_t(R_t) for the next (earlier) layer; the diagonal comes from xi.
        for (std::size_t tau = t + 1; tau <= N; ++tau) {
            next[tau] = ycur[tau];
            next_z[tau] = zcur[tau];
        }
        next_z[t].setZero();
        Eigen::VectorXd diag_y(M);
        for (std::size_t m = 0; m < M; ++m) diag_y(m) = xi(t, r_t(m));
        next[t] = std::move(diag_y);
    }
    return sol;
}

Generator mv_generator(const MarketModel& model, const TimeGrid& grid) {
    check_invariants(model);
    if (std::abs(grid.horizon() - model.horizon) > 1e-12 * model.horizon)
        throw std::invalid_argument("grid horizon does not match the model");
    const std::size_t N = grid.n_steps();
    const double T = model.horizon;
    const auto& pref = model.pref;
    std::vector<double> denom(N + 1, 1.0);
    std::vector<double> rho(N + 1);
    for (std::size_t t = 0; t <= N; ++t) {
        rho[t] = pref.rho(grid.time(t));
        for (std::size_t n = t; n <= N; ++n)
            denom[t] += trapezoid_weight(grid, t, n) * pref.lambda(grid.time(t), grid.time(n), T);
    }
    const double delta = model.stock.delta;
    const double corr = model.stock.rho_corr;
    const double kappa = model.ckls.kappa();
    const double running = delta * delta / pref.gamma;

    Generator g;
    g.lipschitz = LipschitzKind::stochastic;
    if (!pref.lambda_is_zero())
        g.z_weight = [pref, T](double s, double tau) { return pref.lambda(s, tau, T); };
    g.h = [=](std::size_t, std::size_t t, double r, const GeneratorArgs& a) {
        double x = effective_factor(model, r);
        double sharpe_unit = checked_pow(x, kappa);
        return running * rho[t] * sharpe_unit * sharpe_unit -
               corr * delta * sharpe_unit * (a.z_nonlocal + a.z_terminal) / denom[t];
    };
    return g;
}

void write_coefficients_csv(const BsdeSolution& sol, const std::string& path) {
    CsvWriter csv(path, {"t_idx", "tau_idx", "k", "coefY", "coefZ"});
    const std::size_t N = sol.grid().n_steps();
    for (std::size_t t = 0; t < N; ++t)
        for (std::size_t tau = t + 1; tau <= N; ++tau) {
            const auto& y = sol.coef_y(t, tau);
            const auto& z = sol.coef_z(t, tau);
            for (Eigen::Index k = 0; k < y.size(); ++k)
                csv.field(static_cast<long long>(t))
                    .field(static_cast<long long>(tau))
                    .field(static_cast<long long>(k))
                    .field(y(k))
                    .field(z(k))
                    .end_row();
        }
}

}  // namespace mvbsde
