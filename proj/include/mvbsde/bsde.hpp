#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mvbsde/model.hpp"
#include "mvbsde/regression.hpp"
#include "mvbsde/simulate.hpp"

namespace mvbsde {

// Field values handed to the generator on one path. The nonlocal entries are trapezoid
// approximations of int_s^T weight(s,tau) field^tau_s dtau.
struct GeneratorArgs {
    double y_self = 0.0;
    double y_nonlocal = 0.0;
    double y_terminal = 0.0;
    double z_self = 0.0;
    double z_nonlocal = 0.0;
    double z_terminal = 0.0;
};

enum class LipschitzKind { deterministic, stochastic };

struct Generator {
    // h(tau_idx, t_idx, r, args) for dY = -h ds + Z dB^R.
    std::function<double(std::size_t, std::size_t, double, const GeneratorArgs&)> h;
    // Weights phi(s,tau) and varphi(s,tau) of the nonlocal Y and Z sums; empty means unused.
    std::function<double(double, double)> y_weight;
    std::function<double(double, double)> z_weight;
    LipschitzKind lipschitz = LipschitzKind::deterministic;
};

// xi^tau(r), the value of Y^tau on the diagonal.
using TerminalMap = std::function<double(std::size_t, double)>;

// Where the generator is evaluated in the regression target Y_{t+1} + dt h.
// current: h at (t, R_t) with the fields being estimated, iterated by Picard steps.
// next: h at (t+1, R_{t+1}) with the already-known fields of layer t+1; explicit, and the
// Z-fit then also sees the dt h contribution, removing the one-step lag of Z.
enum class GeneratorPoint { current, next };

struct SolverConfig {
    std::size_t picard_iters = 3;
    std::size_t layer_sweeps = 2;
    std::size_t basis_size = 3;
    double tolerance = 1e-6;
    std::size_t threads = 0;
    GeneratorPoint generator_point = GeneratorPoint::current;

    void validate() const;
};

struct LayerDiagnostic {
    std::size_t t_idx = 0;
    std::size_t sweeps = 0;
    double last_delta = 0.0;  // max coefficient change in the final sweep
    bool converged = false;
    Eigen::Index rank = 0;
    double condition = 0.0;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::size_t t_idx, std::size_t tau_idx, std::size_t path);
    std::size_t t_idx;
    std::size_t tau_idx;
    std::size_t path;
};

class BsdeSolution {
public:
    BsdeSolution(TimeGrid grid, std::size_t basis_size, TerminalMap terminal);

    const TimeGrid& grid() const { return grid_; }
    std::size_t basis_size() const { return basis_size_; }

    double eval_Y(std::size_t t_idx, std::size_t tau_idx, double r) const;
    double eval_Z(std::size_t t_idx, std::size_t tau_idx, double r) const;

    const Eigen::VectorXd& coef_y(std::size_t t_idx, std::size_t tau_idx) const;
    const Eigen::VectorXd& coef_z(std::size_t t_idx, std::size_t tau_idx) const;
    const LaguerreBasis& basis(std::size_t t_idx) const;

    const std::vector<LayerDiagnostic>& diagnostics() const { return diagnostics_; }
    bool converged() const;

    // Mutators used by the solver and by tests building synthetic solutions.
    void set_basis(std::size_t t_idx, const LaguerreBasis& basis);
    void set_coefficients(std::size_t t_idx, std::size_t tau_idx, Eigen::VectorXd y, Eigen::VectorXd z);
    void add_diagnostic(const LayerDiagnostic& d) { diagnostics_.push_back(d); }

private:
    std::size_t slot(std::size_t t_idx, std::size_t tau_idx) const;

    TimeGrid grid_;
    std::size_t basis_size_;
    TerminalMap terminal_;
    std::vector<LaguerreBasis> bases_;
    std::vector<Eigen::VectorXd> coef_y_;
    std::vector<Eigen::VectorXd> coef_z_;
    std::vector<LayerDiagnostic> diagnostics_;
};

// Trapezoid weight of node n in int_{t_t}^{T}; the endpoints get dt/2.
double trapezoid_weight(const TimeGrid& grid, std::size_t t_idx, std::size_t n_idx);

// Least-squares backward Euler over the triangle 0 <= t <= tau <= N.
BsdeSolution solve_bsde(const Generator& generator, const PathEnsemble& ensemble,
                        const SolverConfig& config, const TerminalMap& terminal = {});

// Mean-variance generator h = (delta^2 rho(s) / gamma) R^{2 kappa}
//   - varrho delta R^kappa (int_s^T lambda(s,tau) Z^tau dtau + Z^T) / (1 + int_s^T lambda(s,tau) dtau).
Generator mv_generator(const MarketModel& model, const TimeGrid& grid);

void write_coefficients_csv(const BsdeSolution& sol, const std::string& path);

}  // namespace mvbsde
