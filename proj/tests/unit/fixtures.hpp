#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mvbsde/model.hpp"
#include "mvbsde/simulate.hpp"

namespace mvbsde::fixtures {

double median(std::vector<double> v);
double mean(const std::vector<double>& v);
// Standard error of the sample mean.
double stderr_of_mean(const std::vector<double>& v);

std::vector<double> column(const RowMatrix& m, std::size_t col);

// Composite Simpson rule with n (even) panels.
double simpson(const std::function<double(double)>& f, double a, double b, std::size_t n);

// Max |a - b| over two equally sized vectors.
double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Preference with eta = mu = exp(-c (T - .)), so lambda(s,tau) = e^{c (T - tau)}.
DiscountPreference paired_exponential(double gamma, double c);

}  // namespace mvbsde::fixtures
