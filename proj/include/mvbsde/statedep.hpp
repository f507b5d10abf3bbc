#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mvbsde {

// Deterministic coefficients for the wealth-proportional policy fraction phi(s).
struct StateDepProblem {
    std::function<double(double)> beta;
    std::function<double(double)> sigma;
    double r0 = 0.0;
    double gamma = 1.0;
    std::function<double(double)> rho = [](double) { return 1.0; };
    std::function<double(double, double)> lambda = [](double, double) { return 0.0; };
    double horizon = 1.0;
    std::size_t n_grid = 200;
};

struct StateDepSolution {
    Eigen::VectorXd s;
    Eigen::VectorXd phi;
    double residual = 0.0;
    std::size_t iterations = 0;
};

class StateDepError : public std::runtime_error {
public:
    StateDepError(double residual, std::size_t iterations);
    double residual;
    std::size_t iterations;
};

// Right-hand side of the fixed-point equation phi = RHS(phi) on the uniform grid.
Eigen::VectorXd statedep_rhs(const StateDepProblem& problem, const Eigen::VectorXd& phi);

// Damped iteration phi <- (1 - omega) phi + omega RHS(phi), started from RHS(0). Returns the first
// iterate whose sup-norm residual |phi - RHS(phi)| is below tol.
StateDepSolution solve_phi(const StateDepProblem& problem, double tol, std::size_t max_iter,
                           double omega = 0.5);

void write_phi_csv(const StateDepSolution& sol, const std::string& path);

}  // namespace mvbsde
