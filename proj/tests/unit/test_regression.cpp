#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mvbsde/regression.hpp"

using namespace mvbsde;

namespace {

Eigen::VectorXd random_sample(std::size_t n, double loc, double scale, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> normal(loc, scale);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(eng);
    return v;
}

}  // namespace

TEST(Regression, LaguerreAtZeroIsOne) {
    LaguerreBasis b(6);
    Eigen::VectorXd v = b.eval(0.0);
    for (Eigen::Index k = 0; k < v.size(); ++k) EXPECT_DOUBLE_EQ(v(k), 1.0);
}

TEST(Regression, SingleFunctionBasisIsConstant) {
    LaguerreBasis b(1, 3.0, 2.0);
    EXPECT_EQ(b.eval(-7.0).size(), 1);
    EXPECT_EQ(b.eval(-7.0)(0), 1.0);
    EXPECT_EQ(b.eval(11.0)(0), 1.0);
}

TEST(Regression, LaguerreRecurrenceAtOne) {
    Eigen::VectorXd v = LaguerreBasis(3).eval(1.0);
    EXPECT_DOUBLE_EQ(v(0), 1.0);
    EXPECT_DOUBLE_EQ(v(1), 0.0);
    EXPECT_DOUBLE_EQ(v(2), -0.5);
    // Closed forms L_2 = 1 - 2z + z^2/2, L_3 = 1 - 3z + 3z^2/2 - z^3/6.
    Eigen::VectorXd w = LaguerreBasis(4, 1.0, 2.0).eval(6.0);
    const double z = 2.5;
    EXPECT_NEAR(w(2), 1.0 - 2.0 * z + z * z / 2.0, 1e-14);
    EXPECT_NEAR(w(3), 1.0 - 3.0 * z + 1.5 * z * z - z * z * z / 6.0, 1e-14);
}

TEST(Regression, FitStandardizes) {
    Eigen::VectorXd s(4);
    s << 1.0, 2.0, 3.0, 4.0;
    LaguerreBasis b = LaguerreBasis::fit(s, 3);
    EXPECT_DOUBLE_EQ(b.loc(), 2.5);
    EXPECT_DOUBLE_EQ(b.scale(), std::sqrt(1.25));
    Eigen::VectorXd flat = Eigen::VectorXd::Constant(10, 28.0);
    LaguerreBasis degenerate = LaguerreBasis::fit(flat, 3);
    EXPECT_TRUE(std::isinf(degenerate.scale()));
    EXPECT_EQ(degenerate.eval(5.0), degenerate.eval(28.0));
    EXPECT_THROW(LaguerreBasis(0), std::invalid_argument);
}

TEST(Regression, TargetInSpanHasZeroResidual) {
    Eigen::VectorXd x = random_sample(500, 0.0, 1.0, 1);
    Eigen::MatrixXd q = LaguerreBasis(3).design(x);
    Eigen::VectorXd c(3);
    c << 0.5, -2.0, 1.25;
    Eigen::VectorXd y = q * c;
    LsqFit fit = lsq_solve(q, y);
    EXPECT_LT(fit.residual_norm, 1e-10 * y.norm());
    EXPECT_LT((fit.coefficients - c).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(fit.rank, 3);
}

TEST(Regression, DuplicatedColumnGivesFiniteSolution) {
    Eigen::VectorXd x = random_sample(200, 0.0, 1.0, 2);
    Eigen::MatrixXd q(200, 3);
    q.col(0).setOnes();
    q.col(1) = x;
    q.col(2) = x;
    Eigen::VectorXd y = 1.0 + 2.0 * x.array();
    LsqFit fit = lsq_solve(q, y);
    EXPECT_TRUE(fit.coefficients.allFinite());
    EXPECT_EQ(fit.rank, 2);
    EXPECT_LT(fit.residual_norm, 1e-10 * y.norm());
    // Minimum-norm split of the duplicated direction.
    EXPECT_NEAR(fit.coefficients(1), fit.coefficients(2), 1e-10);
}

TEST(Regression, MatchesNormalEquations) {
    Eigen::VectorXd x = random_sample(1000, 0.0, 1.0, 3);
    Eigen::MatrixXd q = LaguerreBasis(3).design(x);
    Eigen::VectorXd noise = random_sample(1000, 0.0, 0.3, 4);
    Eigen::VectorXd y = (x.array().sin() + noise.array()).matrix();
    Eigen::VectorXd oracle = (q.transpose() * q).ldlt().solve(q.transpose() * y);
    LsqFit fit = lsq_solve(q, y);
    EXPECT_LT((fit.coefficients - oracle).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Regression, ResidualOrthogonalToColumns) {
    Eigen::VectorXd x = random_sample(800, 28.0, 2.0, 5);
    LaguerreBasis b = LaguerreBasis::fit(x, 3);
    Eigen::MatrixXd q = b.design(x);
    Eigen::VectorXd y = (x.array().square() * 0.01 + random_sample(800, 0.0, 1.0, 6).array()).matrix();
    LsqFit fit = lsq_solve(q, y);
    Eigen::VectorXd resid = y - q * fit.coefficients;
    for (Eigen::Index k = 0; k < q.cols(); ++k)
        EXPECT_LT(std::abs(resid.dot(q.col(k))), 1e-8 * y.norm() * q.col(k).norm());
}

TEST(Regression, StandardizationDoesNotChangeFit) {
    Eigen::VectorXd x = random_sample(600, 28.0, 1.5, 7);
    Eigen::VectorXd y = (0.2 * x.array() + 0.05 * (x.array() - 28.0).square() +
                         random_sample(600, 0.0, 0.5, 8).array())
                            .matrix();
    Eigen::MatrixXd qa = LaguerreBasis(3).design(x);
    Eigen::MatrixXd qb = LaguerreBasis::fit(x, 3).design(x);
    Eigen::VectorXd fa = qa * lsq_solve(qa, y).coefficients;
    Eigen::VectorXd fb = qb * lsq_solve(qb, y).coefficients;
    EXPECT_LT((fa - fb).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Regression, ProjectorReusableAcrossTargets) {
    Eigen::VectorXd x = random_sample(300, 0.0, 1.0, 9);
    Eigen::MatrixXd q = LaguerreBasis(4).design(x);
    LsqProjector proj(q);
    for (std::uint64_t s = 10; s < 13; ++s) {
        Eigen::VectorXd y = random_sample(300, 1.0, 1.0, s);
        EXPECT_LT((proj.coefficients(y) - lsq_solve(q, y).coefficients).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Regression, DimensionErrors) {
    Eigen::MatrixXd q = Eigen::MatrixXd::Ones(5, 2);
    EXPECT_THROW(lsq_solve(q, Eigen::VectorXd::Ones(4)), std::invalid_argument);
    EXPECT_THROW(LsqProjector(Eigen::MatrixXd::Ones(2, 3)), std::invalid_argument);
}
