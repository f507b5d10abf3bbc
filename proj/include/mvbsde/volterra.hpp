#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "mvbsde/model.hpp"

namespace mvbsde {

using ScalarFn = std::function<double(double)>;
using KernelFn = std::function<double(double, double)>;

// A(s) = Theta(s) + int_s^T K(s,tau) A(tau) dtau, sampled on n_quad + 1 uniform nodes.
struct VolterraProblem {
    double horizon = 1.0;
    std::size_t n_quad = 0;
    Eigen::VectorXd nodes;
    Eigen::VectorXd theta;
    Eigen::MatrixXd kernel;  // kernel(i, j) = K(s_i, s_j), used for j >= i

    static VolterraProblem from_functions(const ScalarFn& theta, const KernelFn& kernel,
                                          double horizon, std::size_t n_quad);
};

struct VolterraSolution {
    Eigen::VectorXd nodes;
    Eigen::VectorXd values;

    // Piecewise-linear interpolation between nodes.
    double operator()(double s) const;
};

// Assembles Theta and K from the preference and the deterministic stock coefficients.
// Inner and outer integrals use the trapezoid rule on a grid refined by `refine` per node.
VolterraProblem build_problem(const DiscountPreference& pref, const ScalarFn& beta,
                              const ScalarFn& sigma, double horizon, std::size_t n_quad,
                              std::size_t refine = 4);

// Nystrom discretization with trapezoid weights and a dense LU solve.
VolterraSolution solve_volterra(const VolterraProblem& problem);

// rho(s) (int_s^T lambda(s,tau) dtau + 1).
double closed_form_A(const DiscountPreference& pref, double horizon, double s);

void write_volterra_csv(const VolterraSolution& sol, const DiscountPreference& pref,
                        double horizon, const std::string& path);

}  // namespace mvbsde
