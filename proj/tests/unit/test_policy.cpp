#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mvbsde/baselines.hpp"
#include "mvbsde/policy.hpp"
#include "mvbsde/presets.hpp"

using namespace mvbsde;

namespace {

std::shared_ptr<const BsdeSolution> solve(const MarketModel& m, const PathEnsemble& ens,
                                          GeneratorPoint point = GeneratorPoint::current) {
    SolverConfig cfg;
    cfg.generator_point = point;
    return std::make_shared<const BsdeSolution>(solve_bsde(mv_generator(m, ens.grid), ens, cfg));
}

double median_at(const PathEnsemble& ens, std::size_t t) { return fixtures::median(fixtures::column(ens.factor, t)); }

}  // namespace

TEST(Policy, MyopicExamples) {
    MarketModel m = problem_a();
    EXPECT_NEAR(myopic_demand(m, 1.0, 1.0), 0.0811 / 4.0, 1e-15);
    EXPECT_NEAR(myopic_demand(m, 0.5, 2.0), 0.0811 / 4.0 * 2.0 * std::exp(-0.03 * 0.5), 1e-15);
    m.stock.delta = 0.0;
    EXPECT_EQ(myopic_demand(m, 0.5, 2.0), 0.0);
    m = problem_a();
    m.pref.rho = RhoWeight::from_grid({0.0, 0.5, 1.0}, {1.0, 0.0, 1.0});
    EXPECT_EQ(myopic_demand(m, 0.5, 2.0), 0.0);
    EXPECT_THROW(myopic_demand(problem_c(0.3), 0.5, -1.0), std::domain_error);
}

TEST(Policy, ProblemBMyopicIsLinearInFactor) {
    MarketModel m = problem_b();
    for (double r : {-0.05, 0.02, 0.3})
        EXPECT_NEAR(myopic_demand(m, 0.25, r), 1.0 / 4.0 * r * std::exp(-0.0014 * 0.75), 1e-16);
}

TEST(Policy, MyopicIsLinearInRho) {
    MarketModel m = problem_a();
    MarketModel m2 = m;
    m2.pref.rho = RhoWeight::constant(2.0);
    for (double s : {0.0, 0.4, 1.0})
        for (double r : {5.0, 28.0}) EXPECT_EQ(myopic_demand(m2, s, r), 2.0 * myopic_demand(m, s, r));
}

TEST(Policy, ZeroCorrelationHasNoHedging) {
    MarketModel m = problem_a();
    m.stock.rho_corr = 0.0;
    TimeGrid g(10, 1.0);
    auto ens = simulate_factor(m, g, 2000, 1);
    auto sol = solve(m, ens);
    PolicyField pol = equilibrium_policy(m, MyopicCoefficient::closed_form(m.pref, 1.0), sol);
    for (std::size_t t = 0; t <= 10; ++t)
        for (double r : {1.0, 20.0, 28.0, 40.0}) {
            EXPECT_EQ(hedging_demand(m, *sol, t, r), 0.0);
            EXPECT_EQ(pol(t, r), myopic_demand(m, g.time(t), r));
        }
}

TEST(Policy, HedgingVanishesAtHorizon) {
    MarketModel m = problem_a();
    TimeGrid g(10, 1.0);
    auto ens = simulate_factor(m, g, 2000, 2);
    auto sol = solve(m, ens);
    std::vector<double> rt = fixtures::column(ens.factor, 10);
    std::sort(rt.begin(), rt.end());
    for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) EXPECT_EQ(hedging_demand(m, *sol, 10, rt[std::size_t(q * rt.size())]), 0.0);
}

TEST(Policy, HedgingMatchesAnalyticAtMidHorizon) {
    MarketModel m = problem_a();
    TimeGrid g(10, 1.0);
    auto ens = simulate_factor(m, g, 10000, 42);
    auto sol = solve(m, ens, GeneratorPoint::next);
    AnalyticBaseline base = AnalyticBaseline::cir(m);
    for (std::size_t t = 3; t < 10; ++t) {
        const double r = median_at(ens, t);
        const double oracle = base.hedging(g.time(t), r);
        EXPECT_NEAR(hedging_demand(m, *sol, t, r), oracle, 0.05 * std::abs(oracle)) << "t_idx " << t;
    }
}

TEST(Policy, TotalPolicyMatchesAnalyticWithLiteralScheme) {
    MarketModel m = problem_a();
    TimeGrid g(10, 1.0);
    auto ens = simulate_factor(m, g, 10000, 42);
    auto sol = solve(m, ens);
    PolicyField pol = equilibrium_policy(m, MyopicCoefficient::closed_form(m.pref, 1.0), sol);
    PolicyField ana = analytic_policy(AnalyticBaseline::cir(m), g);
    for (std::size_t t = 3; t <= 10; ++t) {
        const double r = median_at(ens, t);
        EXPECT_NEAR(pol(t, r), ana(t, r), 0.05 * std::abs(ana(t, r))) << "t_idx " << t;
    }
}

TEST(Policy, HedgingNearHorizonIsOrderDt) {
    MarketModel m = problem_a();
    TimeGrid g(10, 1.0);
    auto ens = simulate_factor(m, g, 10000, 42);
    auto sol = solve(m, ens);
    const double r = median_at(ens, 9);
    // |varrho| n / sigma_stock times the generator's r-slope delta^2 / gamma.
    const double c = std::abs(m.stock.rho_corr) * m.ckls.sigma * r * m.stock.delta * m.stock.delta / m.pref.gamma;
    EXPECT_LT(std::abs(hedging_demand(m, *sol, 9, r)), 3.0 * g.dt() * c);
}

TEST(Policy, CompleteMarketFormula) {
    MarketModel m;
    m.ckls = CklsParams{0.0, -0.1, 0.2, 1.0, 1.0};
    m.stock = StockSpec{0.02, 0.3, 1.0, 0.0, true};
    m.pref.gamma = 4.0;
    m.horizon = 1.0;
    TimeGrid g(10, 1.0);
    PolicyField pol = complete_market_policy(m, MyopicCoefficient::closed_form(m.pref, 1.0), g);
    for (std::size_t t = 0; t <= 10; ++t) {
        const double s = g.time(t);
        EXPECT_NEAR(pol(t, 1.7), 0.3 / 4.0 * std::exp(-0.02 * (1.0 - s)), 1e-15);
        EXPECT_EQ(pol.components(t, 1.7).hedge, 0.0);
    }
    EXPECT_EQ(pol.kind(), PolicyField::Kind::complete);
}

TEST(Policy, DependsOnDiscountsOnlyThroughRatio) {
    TimeGrid g(10, 1.0);
    auto check_same = [&](MarketModel a, MarketModel b) {
        auto ens = simulate_factor(a, g, 2000, 3);
        auto pa = equilibrium_policy(a, MyopicCoefficient::closed_form(a.pref, 1.0), solve(a, ens));
        auto pb = equilibrium_policy(b, MyopicCoefficient::closed_form(b.pref, 1.0), solve(b, ens));
        for (std::size_t t = 0; t <= 10; ++t)
            for (double r : {20.0, 28.0, 35.0}) EXPECT_EQ(pa(t, r), pb(t, r));
    };
    // Without a running term the terminal discount drops out.
    MarketModel a = problem_a(), b = problem_a();
    b.pref.mu = MuKernel::exponential(0.5);
    check_same(a, b);
    // Equal lambda through different kernel tags.
    a.pref.eta = EtaKernel::constant(0.7);
    b.pref.eta = EtaKernel::exponential(0.0, 0.7);
    b.pref.mu = MuKernel::exponential(0.0);
    check_same(a, b);
}

TEST(Policy, ConstantAndTablePolicies) {
    TimeGrid g(2, 1.0);
    PolicyField c = constant_policy(0.4, g);
    EXPECT_EQ(c(1, 123.0), 0.4);
    PolicyField t = table_policy({1.0, 3.0}, {{0.0, 2.0}, {1.0, 1.0}, {4.0, 0.0}}, g);
    EXPECT_DOUBLE_EQ(t(0, 2.0), 1.0);
    EXPECT_DOUBLE_EQ(t(2, 2.5), 1.0);
    EXPECT_DOUBLE_EQ(t(2, 0.0), 4.0);
    EXPECT_DOUBLE_EQ(t(0, 9.0), 2.0);
    EXPECT_THROW(t(3, 1.0), std::out_of_range);
    EXPECT_THROW(table_policy({1.0, 1.0}, {{0, 0}, {0, 0}, {0, 0}}, g), std::invalid_argument);
    EXPECT_THROW(table_policy({1.0}, {{0}}, g), std::invalid_argument);
}

TEST(Policy, WritesCurves) {
    TimeGrid g(2, 1.0);
    const std::string path = ::testing::TempDir() + "policy_curves.csv";
    write_policy_curves_csv(constant_policy(0.5, g), {1.0, 2.0, 3.0}, path);
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header, "t,R,u_myopic,u_hedge,u_total");
    EXPECT_EQ(row, "0,1,0.5,0,0.5");
    std::remove(path.c_str());
    EXPECT_THROW(write_policy_curves_csv(constant_policy(0.5, g), {1.0}, path), std::invalid_argument);
}
