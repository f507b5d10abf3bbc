#include "mvbsde/regression.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mvbsde {

LaguerreBasis::LaguerreBasis(std::size_t size, double loc, double scale)
    : size_(size), loc_(loc), scale_(scale) {
    if (size == 0) throw std::invalid_argument("basis size must be at least 1");
    if (!(scale > 0.0)) throw std::invalid_argument("basis scale must be positive");
}

LaguerreBasis LaguerreBasis::fit(const Eigen::Ref<const Eigen::VectorXd>& sample, std::size_t size) {
    if (sample.size() == 0) throw std::invalid_argument("empty sample");
    double mean = sample.mean();
    double var = (sample.array() - mean).square().mean();
    double sd = std::sqrt(var);
    // Relative cutoff: a cross-section identical up to rounding counts as degenerate. An infinite
    // scale maps every point to z = 0, so fitted fields are constant in x.
    double tiny = 1e-12 * std::max(1.0, std::abs(mean));
    return LaguerreBasis(size, mean, sd > tiny ? sd : std::numeric_limits<double>::infinity());
}

void LaguerreBasis::eval_into(double x, double* out) const {
    double z = (x - loc_) / scale_;
    out[0] = 1.0;
    if (size_ == 1) return;
    out[1] = 1.0 - z;
    for (std::size_t k = 1; k + 1 < size_; ++k) {
        double kk = static_cast<double>(k);
        out[k + 1] = ((2.0 * kk + 1.0 - z) * out[k] - kk * out[k - 1]) / (kk + 1.0);
    }
}

Eigen::VectorXd LaguerreBasis::eval(double x) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(size_));
    eval_into(x, v.data());
    return v;
}

Eigen::MatrixXd LaguerreBasis::design(const Eigen::Ref<const Eigen::VectorXd>& xs) const {
    const auto K = static_cast<Eigen::Index>(size_);
    Eigen::MatrixXd q(xs.size(), K);
    Eigen::VectorXd row(K);
    for (Eigen::Index m = 0; m < xs.size(); ++m) {
        eval_into(xs(m), row.data());
        q.row(m) = row.transpose();
    }
    return q;
}

LsqProjector::LsqProjector(const Eigen::Ref<const Eigen::MatrixXd>& design, double rel_cutoff)
    : rows_(design.rows()), design_(design) {
    if (design.rows() < design.cols())
        throw std::invalid_argument("least squares needs at least as many rows as columns");
    if (!design.allFinite()) throw std::invalid_argument("design matrix has non-finite entries");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = rel_cutoff * (sv.size() > 0 ? sv(0) : 0.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff && sv(i) > 0.0) {
            inv(i) = 1.0 / sv(i);
            smallest_ = sv(i);
            ++rank_;
        }
    }
    pinv_ = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::VectorXd LsqProjector::coefficients(const Eigen::Ref<const Eigen::VectorXd>& target) const {
    if (target.size() != rows_) throw std::invalid_argument("target length does not match design rows");
    return pinv_ * target;
}

LsqFit LsqProjector::solve(const Eigen::Ref<const Eigen::VectorXd>& target) const {
    LsqFit fit;
    fit.coefficients = coefficients(target);
    fit.residual_norm = (design_ * fit.coefficients - target).norm();
    fit.condition_diag = smallest_;
    fit.rank = rank_;
    return fit;
}

LsqFit lsq_solve(const Eigen::Ref<const Eigen::MatrixXd>& design,
                 const Eigen::Ref<const Eigen::VectorXd>& target) {
    if (design.rows() != target.size())
        throw std::invalid_argument("design rows and target length differ");
    return LsqProjector(design).solve(target);
}

}  // namespace mvbsde
