#include "mvbsde/evaluate.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "mvbsde/csv.hpp"
#include "mvbsde/policy.hpp"

namespace mvbsde {

namespace {

constexpr double kWealthFloor = 1e-12;

double mv_statistic(const std::vector<double>& x, std::size_t begin, std::size_t end, double gamma) {
    double n = static_cast<double>(end - begin);
    double mean = 0.0;
    for (std::size_t i = begin; i < end; ++i) mean += x[i];
    mean /= n;
    double var = 0.0;
    for (std::size_t i = begin; i < end; ++i) var += (x[i] - mean) * (x[i] - mean);
    var /= n;
    return mean - 0.5 * gamma * var;
}

// Batch b covers [b n / B, (b + 1) n / B).
std::vector<double> batch_statistics(const std::vector<double>& x, double gamma, std::size_t batches) {
    std::vector<double> out;
    const std::size_t n = x.size();
    for (std::size_t b = 0; b < batches; ++b) {
        std::size_t begin = b * n / batches;
        std::size_t end = (b + 1) * n / batches;
        out.push_back(mv_statistic(x, begin, end, gamma));
    }
    return out;
}

double standard_error(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

std::vector<std::size_t> decile_steps(const TimeGrid& grid) {
    const std::size_t N = grid.n_steps();
    if (N % 10 != 0) throw std::invalid_argument("decile evaluation needs N divisible by 10");
    std::vector<std::size_t> steps;
    for (std::size_t j = 0; j <= 10; ++j) steps.push_back(j * N / 10);
    return steps;
}

ObjectiveEstimate estimate_objective(const WealthPath& wealth, double gamma,
                                     const std::vector<std::size_t>& steps, std::size_t batches) {
    ObjectiveEstimate est;
    est.policy_id = wealth.policy_used;
    est.n_paths = static_cast<std::size_t>(wealth.wealth.rows());
    if (!wealth.wealth_independent) {
        est.warning = "ratio estimator requires a wealth-independent policy";
        return est;
    }
    if (batches < 2) throw std::invalid_argument("need at least two batches");
    const std::size_t N = wealth.grid.n_steps();
    for (std::size_t step : steps) {
        if (step > N) throw std::out_of_range("evaluation step outside grid");
        std::vector<double> ratio;
        ratio.reserve(est.n_paths);
        std::size_t excluded = 0;
        for (std::size_t m = 0; m < est.n_paths; ++m) {
            double ws = wealth.wealth(m, step);
            if (std::abs(ws) < kWealthFloor) {
                ++excluded;
                continue;
            }
            ratio.push_back(wealth.wealth(m, N) / ws);
        }
        est.times.push_back(wealth.grid.time(step));
        est.n_excluded.push_back(excluded);
        if (ratio.empty()) {
            est.j_hat.push_back(std::numeric_limits<double>::quiet_NaN());
            est.stderr_.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        est.j_hat.push_back(mv_statistic(ratio, 0, ratio.size(), gamma));
        est.stderr_.push_back(ratio.size() >= 2 * batches
                                  ? standard_error(batch_statistics(ratio, gamma, batches))
                                  : std::numeric_limits<double>::quiet_NaN());
    }
    return est;
}

ObjectiveEstimate estimate_objective(const WealthPath& wealth, double gamma) {
    return estimate_objective(wealth, gamma, decile_steps(wealth.grid));
}

std::vector<double> paired_difference_stderr(const WealthPath& a, const WealthPath& b, double gamma,
                                             const std::vector<std::size_t>& steps, std::size_t batches) {
    if (a.wealth.rows() != b.wealth.rows() || a.grid.n_steps() != b.grid.n_steps())
        throw std::invalid_argument("paired estimate needs wealth on the same paths");
    const std::size_t N = a.grid.n_steps();
    const auto M = static_cast<std::size_t>(a.wealth.rows());
    std::vector<double> out;
    for (std::size_t step : steps) {
        std::vector<double> ra, rb;
        for (std::size_t m = 0; m < M; ++m) {
            double wa = a.wealth(m, step), wb = b.wealth(m, step);
            if (std::abs(wa) < kWealthFloor || std::abs(wb) < kWealthFloor) continue;
            ra.push_back(a.wealth(m, N) / wa);
            rb.push_back(b.wealth(m, N) / wb);
        }
        if (ra.size() < 2 * batches) {
            out.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        auto ja = batch_statistics(ra, gamma, batches);
        auto jb = batch_statistics(rb, gamma, batches);
        for (std::size_t i = 0; i < ja.size(); ++i) ja[i] -= jb[i];
        out.push_back(standard_error(ja));
    }
    return out;
}

void write_objective_csv(const std::vector<ObjectiveEstimate>& estimates, const std::string& path) {
    CsvWriter csv(path, {"s", "J_hat", "stderr", "policy_id"});
    for (const auto& e : estimates)
        for (std::size_t j = 0; j < e.times.size(); ++j)
            csv.field(e.times[j]).field(e.j_hat[j]).field(e.stderr_[j]).field(e.policy_id).end_row();
}

std::vector<DiscountStudyRow> discount_study(const MarketModel& base, const std::vector<double>& lambda_coefs,
                                             const DiscountStudyConfig& config) {
    if (lambda_coefs.empty()) throw std::invalid_argument("discount study needs at least one lambda_coef");
    MarketModel model_b = base;
    model_b.pref.eta = EtaKernel::zero();
    model_b.pref.mu = MuKernel::one();
    check_invariants(model_b);

    TimeGrid grid(config.n_steps, base.horizon);
    const PathEnsemble ens = simulate_factor(model_b, grid, config.n_paths, config.seed, config.solver.threads);
    const auto steps = decile_steps(grid);
    const auto coeff_b = MyopicCoefficient::closed_form(model_b.pref, base.horizon);
    auto sol_b = std::make_shared<const BsdeSolution>(solve_bsde(mv_generator(model_b, grid), ens, config.solver));
    const PolicyField policy_b = equilibrium_policy(model_b, coeff_b, sol_b, "no_discount");

    // Hedging of the reference policy on every path and evaluation step.
    std::vector<std::vector<double>> h_b(steps.size(), std::vector<double>(ens.n_paths));
    for (std::size_t j = 0; j < steps.size(); ++j)
        for (std::size_t m = 0; m < ens.n_paths; ++m)
            h_b[j][m] = policy_b.components(steps[j], ens.factor(m, steps[j])).hedge;

    std::vector<DiscountStudyRow> rows;
    for (double c : lambda_coefs) {
        MarketModel model_c = model_b;
        model_c.pref.eta = EtaKernel::exponential(c);
        model_c.pref.mu = MuKernel::exponential(c);
        auto sol_c = std::make_shared<const BsdeSolution>(solve_bsde(mv_generator(model_c, grid), ens, config.solver));
        const PolicyField policy_c =
            equilibrium_policy(model_c, MyopicCoefficient::closed_form(model_c.pref, base.horizon), sol_c);
        for (std::size_t j = 0; j < steps.size(); ++j) {
            DiscountStudyRow row;
            row.s = grid.time(steps[j]);
            row.lambda_coef = c;
            double sum = 0.0, sum_abs = 0.0;
            for (std::size_t m = 0; m < ens.n_paths; ++m) {
                double hb = h_b[j][m];
                if (std::abs(hb) < 1e-10) {
                    ++row.n_excluded;
                    continue;
                }
                double rel = (hb - policy_c.components(steps[j], ens.factor(m, steps[j])).hedge) / hb;
                sum += rel;
                sum_abs += std::abs(rel);
                ++row.n_used;
            }
            double n = static_cast<double>(row.n_used);
            row.avg_rel_diff = row.n_used ? sum / n : std::numeric_limits<double>::quiet_NaN();
            row.avg_abs_rel_diff = row.n_used ? sum_abs / n : std::numeric_limits<double>::quiet_NaN();
            rows.push_back(row);
        }
    }
    return rows;
}

void write_discount_csv(const std::vector<DiscountStudyRow>& rows, const std::string& path) {
    CsvWriter csv(path, {"s", "lambda_coef", "avg_rel_diff", "avg_abs_rel_diff", "n_used", "n_excluded"});
    for (const auto& r : rows)
        csv.field(r.s)
            .field(r.lambda_coef)
            .field(r.avg_rel_diff)
            .field(r.avg_abs_rel_diff)
            .field(static_cast<long long>(r.n_used))
            .field(static_cast<long long>(r.n_excluded))
            .end_row();
}

}  // namespace mvbsde
