#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace mvbsde {

// Laguerre polynomials L_0..L_{K-1} of the standardized value (x - loc) / scale.
class LaguerreBasis {
public:
    LaguerreBasis(std::size_t size, double loc = 0.0, double scale = 1.0);

    // Standardizes with the sample mean and standard deviation; a degenerate sample gets an
    // infinite scale, making every basis function constant.
    static LaguerreBasis fit(const Eigen::Ref<const Eigen::VectorXd>& sample, std::size_t size);

    std::size_t size() const { return size_; }
    double loc() const { return loc_; }
    double scale() const { return scale_; }

    Eigen::VectorXd eval(double x) const;
    void eval_into(double x, double* out) const;
    // M x K matrix of basis values at each sample point.
    Eigen::MatrixXd design(const Eigen::Ref<const Eigen::VectorXd>& xs) const;

private:
    std::size_t size_;
    double loc_;
    double scale_;
};

struct LsqFit {
    Eigen::VectorXd coefficients;
    double residual_norm = 0.0;
    double condition_diag = 0.0;  // smallest retained singular value
    Eigen::Index rank = 0;
};

// Truncated-SVD pseudo-inverse of a fixed design, reusable across many targets.
class LsqProjector {
public:
    explicit LsqProjector(const Eigen::Ref<const Eigen::MatrixXd>& design, double rel_cutoff = 1e-10);

    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return pinv_.rows(); }
    Eigen::Index rank() const { return rank_; }
    double smallest_retained() const { return smallest_; }

    Eigen::VectorXd coefficients(const Eigen::Ref<const Eigen::VectorXd>& target) const;
    LsqFit solve(const Eigen::Ref<const Eigen::VectorXd>& target) const;

private:
    Eigen::Index rows_;
    Eigen::MatrixXd design_;
    Eigen::MatrixXd pinv_;
    Eigen::Index rank_ = 0;
    double smallest_ = 0.0;
};

LsqFit lsq_solve(const Eigen::Ref<const Eigen::MatrixXd>& design,
                 const Eigen::Ref<const Eigen::VectorXd>& target);

}  // namespace mvbsde
