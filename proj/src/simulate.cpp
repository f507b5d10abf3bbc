#include "mvbsde/simulate.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "mvbsde/csv.hpp"
#include "mvbsde/detail/special.hpp"
#include "mvbsde/parallel.hpp"
#include "mvbsde/policy.hpp"

namespace mvbsde {

TimeGrid::TimeGrid(std::size_t n_steps, double horizon) : n_(n_steps), horizon_(horizon) {
    if (n_steps == 0) throw std::invalid_argument("time grid needs at least one step");
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("time grid horizon must be finite and positive");
}

double TimeGrid::time(std::size_t i) const {
    if (i > n_) throw std::out_of_range("time index outside grid");
    return i == n_ ? horizon_ : horizon_ * static_cast<double>(i) / static_cast<double>(n_);
}

std::size_t TimeGrid::index_of(double s) const {
    double x = std::round(s / dt());
    if (x < 0.0 || x > static_cast<double>(n_)) throw std::out_of_range("time outside grid");
    return static_cast<std::size_t>(x);
}

namespace {

std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t m) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(m >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

PathEnsemble simulate_factor(const MarketModel& model, const TimeGrid& grid, std::size_t n_paths,
                             std::uint64_t seed, std::size_t threads, FactorScheme scheme) {
    check_invariants(model);
    if (n_paths == 0) throw std::invalid_argument("n_paths must be positive");
    if (scheme == FactorScheme::exact_ou && model.ckls.p != 0.0)
        throw std::invalid_argument("exact transition is only available for p = 0");

    const std::size_t N = grid.n_steps();
    PathEnsemble ens{grid, n_paths, RowMatrix(n_paths, N + 1), RowMatrix(n_paths, N),
                     RowMatrix(n_paths, N), seed};
    const auto& c = model.ckls;
    const double dt = grid.dt();
    const double sqdt = std::sqrt(dt);
    const double rho = model.stock.rho_corr;
    const double rho_perp = std::sqrt(1.0 - rho * rho);
    const double decay = std::exp(-c.b * dt);
    const double exact_sd = c.sigma * std::sqrt(dt * detail::phi1(2.0 * c.b * dt));
    const double exact_pull = c.a * dt * detail::phi1(c.b * dt);

    parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end) {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (std::size_t m = begin; m < end; ++m) {
            auto eng = path_engine(seed, m);
            normal.reset();
            double r = c.r0_factor;
            ens.factor(m, 0) = r;
            for (std::size_t i = 0; i < N; ++i) {
                double z1 = normal(eng);
                double z2 = normal(eng);
                double dbr = sqdt * z1;
                ens.db_factor(m, i) = dbr;
                ens.db_stock(m, i) = rho * dbr + rho_perp * sqdt * z2;
                if (scheme == FactorScheme::exact_ou) {
                    r = r * decay + exact_pull + exact_sd * z1;
                } else if (c.p == 0.0) {
                    r = r + (c.a - c.b * r) * dt + c.sigma * dbr;
                } else {
                    double rp = std::max(r, 0.0);
                    r = r + (c.a - c.b * rp) * dt + c.sigma * std::pow(rp, c.p) * dbr;
                }
                ens.factor(m, i + 1) = r;
            }
        }
    });
    return ens;
}

WealthPath simulate_wealth(const MarketModel& model, const PathEnsemble& ens,
                           const PolicyField& policy, double w0, std::size_t threads) {
    const std::size_t N = ens.grid.n_steps();
    if (policy.grid().n_steps() != N) throw std::invalid_argument("policy grid does not match ensemble");
    WealthPath out{ens.grid, RowMatrix(ens.n_paths, N + 1), policy.id(), true};
    const double dt = ens.grid.dt();
    const double r0 = model.stock.r0;
    parallel_for(ens.n_paths, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
            double w = w0;
            out.wealth(m, 0) = w;
            for (std::size_t i = 0; i < N; ++i) {
                double r = ens.factor(m, i);
                double u = policy(i, r);
                double w_next = w + r0 * w * dt;
                if (u != 0.0) {
                    Coefficients co = coefficients_at(model, ens.grid.time(i), effective_factor(model, r));
                    w_next += u * co.beta_excess * dt + u * co.sigma_stock * ens.db_stock(m, i);
                }
                w = w_next;
                out.wealth(m, i + 1) = w;
            }
        }
    });
    return out;
}

void write_paths_csv(const PathEnsemble& ens, const std::string& path) {
    CsvWriter csv(path, {"path_id", "step", "t", "R", "dB_R", "dB_S"});
    const std::size_t N = ens.grid.n_steps();
    for (std::size_t m = 0; m < ens.n_paths; ++m) {
        for (std::size_t i = 0; i <= N; ++i) {
            csv.field(static_cast<long long>(m))
                .field(static_cast<long long>(i))
                .field(ens.grid.time(i))
                .field(ens.factor(m, i));
            if (i < N) {
                csv.field(ens.db_factor(m, i)).field(ens.db_stock(m, i));
            } else {
                csv.empty().empty();
            }
            csv.end_row();
        }
    }
}

}  // namespace mvbsde
