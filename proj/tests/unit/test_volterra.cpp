#include <chrono>
#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mvbsde/volterra.hpp"

using namespace mvbsde;

namespace {

const ScalarFn kBeta = [](double) { return 0.0811; };
const ScalarFn kSigma = [](double) { return 1.0; };

std::vector<DiscountPreference> preference_corpus() {
    std::vector<DiscountPreference> out;
    for (RhoWeight rho : {RhoWeight::constant(1.0), RhoWeight::exponential(1.0, 0.2)}) {
        DiscountPreference base;
        base.gamma = 4.0;
        base.rho = rho;
        out.push_back(base);
        DiscountPreference c = base;
        c.eta = EtaKernel::constant(1.0);
        out.push_back(c);
        for (double coef : {0.2, 0.5, 0.8}) {
            DiscountPreference e = fixtures::paired_exponential(4.0, coef);
            e.rho = rho;
            out.push_back(e);
        }
    }
    return out;
}

double max_error_vs_closed_form(const DiscountPreference& pref, std::size_t n_quad, std::size_t refine = 4) {
    VolterraSolution sol = solve_volterra(build_problem(pref, kBeta, kSigma, 1.0, n_quad, refine));
    double err = 0.0;
    for (Eigen::Index i = 0; i < sol.nodes.size(); ++i)
        err = std::max(err, std::abs(sol.values(i) - closed_form_A(pref, 1.0, sol.nodes(i))));
    return err;
}

}  // namespace

TEST(Volterra, TrivialPreferenceGivesUnitTheta) {
    DiscountPreference pref;
    VolterraProblem p = build_problem(pref, kBeta, kSigma, 1.0, 50);
    EXPECT_EQ(p.theta.size(), 51);
    for (Eigen::Index i = 0; i < p.theta.size(); ++i) EXPECT_EQ(p.theta(i), 1.0);
    EXPECT_EQ(p.kernel.cwiseAbs().maxCoeff(), 0.0);
    VolterraSolution sol = solve_volterra(p);
    for (Eigen::Index i = 0; i < sol.values.size(); ++i) EXPECT_DOUBLE_EQ(sol.values(i), 1.0);
}

TEST(Volterra, QuadratureMatchesFinerGrid) {
    DiscountPreference pref;
    pref.eta = EtaKernel::exponential(0.5);
    VolterraProblem coarse = build_problem(pref, kBeta, kSigma, 1.0, 100, 4);
    VolterraProblem fine = build_problem(pref, kBeta, kSigma, 1.0, 100, 40);
    EXPECT_LT(fixtures::max_abs_diff(coarse.theta, fine.theta), 1e-6);
    EXPECT_LT((coarse.kernel - fine.kernel).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Volterra, ThetaAtHorizonIsRhoAtHorizon) {
    DiscountPreference pref = fixtures::paired_exponential(4.0, 0.5);
    pref.rho = RhoWeight::exponential(1.0, 0.3);
    VolterraProblem p = build_problem(pref, kBeta, kSigma, 1.0, 40);
    EXPECT_EQ(p.theta(40), std::exp(0.3));
    EXPECT_EQ(solve_volterra(p).values(40), std::exp(0.3));
}

TEST(Volterra, ZeroKernelReturnsTheta) {
    auto theta = [](double s) { return std::cos(3.0 * s); };
    VolterraProblem p = VolterraProblem::from_functions(theta, [](double, double) { return 0.0; }, 2.0, 30);
    VolterraSolution sol = solve_volterra(p);
    for (Eigen::Index i = 0; i < sol.nodes.size(); ++i) EXPECT_DOUBLE_EQ(sol.values(i), theta(sol.nodes(i)));
}

TEST(Volterra, UnitKernelGivesExponential) {
    // A(s) = 1 + int_s^T A solves to e^{T - s}.
    std::vector<double> errs;
    for (std::size_t n : {50u, 100u}) {
        VolterraProblem p = VolterraProblem::from_functions([](double) { return 1.0; },
                                                            [](double, double) { return 1.0; }, 1.0, n);
        VolterraSolution sol = solve_volterra(p);
        double e = 0.0;
        for (Eigen::Index i = 0; i < sol.nodes.size(); ++i)
            e = std::max(e, std::abs(sol.values(i) - std::exp(1.0 - sol.nodes(i))));
        errs.push_back(e);
    }
    EXPECT_LT(errs[1], 1e-4);
    EXPECT_NEAR(errs[0] / errs[1], 4.0, 0.2);
}

TEST(Volterra, ExponentialDiscountMatchesClosedForm) {
    DiscountPreference pref;
    pref.eta = EtaKernel::exponential(0.5);
    VolterraSolution sol = solve_volterra(build_problem(pref, kBeta, kSigma, 1.0, 200));
    for (Eigen::Index i = 0; i < sol.nodes.size(); ++i) {
        const double s = sol.nodes(i);
        EXPECT_NEAR(sol.values(i), 1.0 + (1.0 - std::exp(-0.5 * (1.0 - s))) / 0.5, 1e-6);
    }
}

TEST(Volterra, CorpusMatchesClosedForm) {
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& pref : preference_corpus()) EXPECT_LT(max_error_vs_closed_form(pref, 200), 1e-6);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(secs, 1.0);
}

TEST(Volterra, SecondOrderConvergence) {
    DiscountPreference pref = fixtures::paired_exponential(4.0, 0.5);
    pref.rho = RhoWeight::exponential(1.0, 0.2);
    const double e1 = max_error_vs_closed_form(pref, 20, 1);
    const double e2 = max_error_vs_closed_form(pref, 40, 1);
    EXPECT_GT(e1, 0.0);
    EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.15);
}

TEST(Volterra, ClosedFormExamples) {
    DiscountPreference pref;
    EXPECT_EQ(closed_form_A(pref, 1.0, 0.3), 1.0);
    pref.eta = EtaKernel::constant(1.0);
    EXPECT_DOUBLE_EQ(closed_form_A(pref, 3.0, 1.0), 3.0);
    pref.rho = RhoWeight::constant(2.0);
    pref.eta = EtaKernel::exponential(1.0);
    EXPECT_NEAR(closed_form_A(pref, 1.0, 0.0), 2.0 * (2.0 - std::exp(-1.0)), 1e-14);
    EXPECT_NEAR(closed_form_A(pref, 1.0, 0.0), 3.2642, 1e-4);
}

TEST(Volterra, InterpolationIsPiecewiseLinear) {
    VolterraSolution sol;
    sol.nodes = Eigen::Vector3d(0.0, 0.5, 1.0);
    sol.values = Eigen::Vector3d(1.0, 3.0, 2.0);
    EXPECT_DOUBLE_EQ(sol(0.25), 2.0);
    EXPECT_DOUBLE_EQ(sol(0.75), 2.5);
    EXPECT_DOUBLE_EQ(sol(1.0), 2.0);
}
