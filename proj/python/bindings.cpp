#include <memory>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mvbsde/baselines.hpp"
#include "mvbsde/bsde.hpp"
#include "mvbsde/evaluate.hpp"
#include "mvbsde/model.hpp"
#include "mvbsde/policy.hpp"
#include "mvbsde/presets.hpp"
#include "mvbsde/statedep.hpp"
#include "mvbsde/volterra.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace mvbsde;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Equilibrium mean-variance policies under CKLS stochastic volatility";
    m.attr("__version__") = MVBSDE_VERSION;

    py::class_<CklsParams>(m, "CklsParams")
        .def(py::init<>())
        .def_readwrite("a", &CklsParams::a)
        .def_readwrite("b", &CklsParams::b)
        .def_readwrite("sigma", &CklsParams::sigma)
        .def_readwrite("p", &CklsParams::p)
        .def_readwrite("r0_factor", &CklsParams::r0_factor);

    py::class_<StockSpec>(m, "StockSpec")
        .def(py::init<>())
        .def_readwrite("r0", &StockSpec::r0)
        .def_readwrite("delta", &StockSpec::delta)
        .def_readwrite("alpha", &StockSpec::alpha)
        .def_readwrite("rho_corr", &StockSpec::rho_corr)
        .def_readwrite("ou_limit", &StockSpec::ou_limit);

    py::class_<RhoWeight>(m, "RhoWeight")
        .def_static("constant", &RhoWeight::constant)
        .def_static("exponential", &RhoWeight::exponential, "scale"_a, "rate"_a)
        .def("__call__", &RhoWeight::operator());
    py::class_<EtaKernel>(m, "EtaKernel")
        .def_static("zero", &EtaKernel::zero)
        .def_static("constant", &EtaKernel::constant)
        .def_static("exponential", &EtaKernel::exponential, "rate"_a, "scale"_a = 1.0);
    py::class_<MuKernel>(m, "MuKernel")
        .def_static("one", &MuKernel::one)
        .def_static("exponential", &MuKernel::exponential);

    py::class_<DiscountPreference>(m, "DiscountPreference")
        .def(py::init<>())
        .def_readwrite("gamma", &DiscountPreference::gamma)
        .def_readwrite("rho", &DiscountPreference::rho)
        .def_readwrite("eta", &DiscountPreference::eta)
        .def_readwrite("mu", &DiscountPreference::mu)
        .def("lambda_", &DiscountPreference::lambda, "s"_a, "tau"_a, "horizon"_a);

    py::class_<MarketModel>(m, "MarketModel")
        .def(py::init<>())
        .def_readwrite("ckls", &MarketModel::ckls)
        .def_readwrite("stock", &MarketModel::stock)
        .def_readwrite("pref", &MarketModel::pref)
        .def_readwrite("horizon", &MarketModel::horizon);

    m.def("problem_a", &problem_a);
    m.def("problem_b", &problem_b);
    m.def("problem_c", &problem_c, "p"_a);

    py::class_<CheckResult>(m, "CheckResult")
        .def_readonly("name", &CheckResult::name)
        .def_readonly("passed", &CheckResult::passed)
        .def_readonly("value", &CheckResult::value)
        .def_readonly("bound", &CheckResult::bound)
        .def_readonly("note", &CheckResult::note);
    py::class_<ValidationReport>(m, "ValidationReport")
        .def_readonly("beta", &ValidationReport::beta)
        .def_readonly("checks", &ValidationReport::checks)
        .def("ok", &ValidationReport::ok)
        .def("__str__", &ValidationReport::to_string);
    m.def("validate_model", &validate_model);
    m.def("general_moment_bound", &general_moment_bound, "b"_a, "sigma"_a, "kappa"_a, "horizon"_a);
    m.def("cir_moment_bound", &cir_moment_bound, "b"_a, "sigma"_a, "horizon"_a);
    m.def("ou_moment_bound", &ou_moment_bound, "b"_a, "sigma"_a, "horizon"_a);

    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init<std::size_t, double>(), "n_steps"_a, "horizon"_a)
        .def_property_readonly("n_steps", &TimeGrid::n_steps)
        .def_property_readonly("dt", &TimeGrid::dt)
        .def("time", &TimeGrid::time);

    py::class_<PathEnsemble>(m, "PathEnsemble")
        .def_readonly("grid", &PathEnsemble::grid)
        .def_readonly("n_paths", &PathEnsemble::n_paths)
        .def_readonly("factor", &PathEnsemble::factor)
        .def_readonly("db_factor", &PathEnsemble::db_factor)
        .def_readonly("db_stock", &PathEnsemble::db_stock)
        .def_readonly("seed", &PathEnsemble::seed);
    m.def(
        "simulate_factor",
        [](const MarketModel& model, std::size_t n_steps, std::size_t n_paths, std::uint64_t seed,
           std::size_t threads) {
            py::gil_scoped_release release;
            return simulate_factor(model, TimeGrid(n_steps, model.horizon), n_paths, seed, threads);
        },
        "model"_a, "n_steps"_a, "n_paths"_a, "seed"_a, "threads"_a = 0);

    py::enum_<GeneratorPoint>(m, "GeneratorPoint")
        .value("current", GeneratorPoint::current)
        .value("next", GeneratorPoint::next);
    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("picard_iters", &SolverConfig::picard_iters)
        .def_readwrite("layer_sweeps", &SolverConfig::layer_sweeps)
        .def_readwrite("basis_size", &SolverConfig::basis_size)
        .def_readwrite("tolerance", &SolverConfig::tolerance)
        .def_readwrite("threads", &SolverConfig::threads)
        .def_readwrite("generator_point", &SolverConfig::generator_point);

    py::class_<BsdeSolution, std::shared_ptr<BsdeSolution>>(m, "BsdeSolution")
        .def("eval_Y", &BsdeSolution::eval_Y, "t_idx"_a, "tau_idx"_a, "r"_a)
        .def("eval_Z", &BsdeSolution::eval_Z, "t_idx"_a, "tau_idx"_a, "r"_a)
        .def("converged", &BsdeSolution::converged);
    m.def(
        "solve_mv_bsde",
        [](const MarketModel& model, const PathEnsemble& ens, const SolverConfig& cfg) {
            py::gil_scoped_release release;
            return std::make_shared<BsdeSolution>(solve_bsde(mv_generator(model, ens.grid), ens, cfg));
        },
        "model"_a, "ensemble"_a, "config"_a = SolverConfig{});

    py::class_<PolicyValue>(m, "PolicyValue")
        .def_readonly("myopic", &PolicyValue::myopic)
        .def_readonly("hedge", &PolicyValue::hedge)
        .def_property_readonly("total", &PolicyValue::total);
    py::class_<PolicyField>(m, "PolicyField")
        .def_property_readonly("id", &PolicyField::id)
        .def("components", &PolicyField::components, "step"_a, "r"_a)
        .def("__call__", &PolicyField::operator(), "step"_a, "r"_a);
    m.def(
        "equilibrium_policy",
        [](const MarketModel& model, std::shared_ptr<BsdeSolution> sol) {
            return equilibrium_policy(model, MyopicCoefficient::closed_form(model.pref, model.horizon), sol);
        },
        "model"_a, "solution"_a);
    m.def("myopic_demand", &myopic_demand, "model"_a, "s"_a, "r"_a);

    py::class_<AnalyticBaseline>(m, "AnalyticBaseline")
        .def_static("for_model", &AnalyticBaseline::for_model)
        .def("b_T", &AnalyticBaseline::b_T, "s"_a, "r"_a)
        .def("hedging", &AnalyticBaseline::hedging, "s"_a, "r"_a)
        .def("myopic", &AnalyticBaseline::myopic, "s"_a, "r"_a)
        .def("policy", [](const AnalyticBaseline& b, const TimeGrid& g) { return analytic_policy(b, g); });

    m.def(
        "estimate_objective",
        [](const MarketModel& model, const PathEnsemble& ens, const PolicyField& policy, double w0) {
            ObjectiveEstimate e;
            {
                py::gil_scoped_release release;
                e = estimate_objective(simulate_wealth(model, ens, policy, w0), model.pref.gamma);
            }
            return py::dict("s"_a = e.times, "j_hat"_a = e.j_hat, "stderr"_a = e.stderr_,
                            "n_excluded"_a = e.n_excluded, "policy_id"_a = e.policy_id);
        },
        "model"_a, "ensemble"_a, "policy"_a, "w0"_a = 1.0);

    m.def("closed_form_A", &closed_form_A, "pref"_a, "horizon"_a, "s"_a);
    m.def(
        "solve_myopic_coefficient",
        [](const DiscountPreference& pref, const ScalarFn& beta, const ScalarFn& sigma, double horizon,
           std::size_t n_quad) {
            VolterraSolution sol = solve_volterra(build_problem(pref, beta, sigma, horizon, n_quad));
            return py::make_tuple(sol.nodes, sol.values);
        },
        "pref"_a, "beta"_a, "sigma"_a, "horizon"_a, "n_quad"_a = 200);

    py::class_<StateDepProblem>(m, "StateDepProblem")
        .def(py::init<>())
        .def_readwrite("beta", &StateDepProblem::beta)
        .def_readwrite("sigma", &StateDepProblem::sigma)
        .def_readwrite("r0", &StateDepProblem::r0)
        .def_readwrite("gamma", &StateDepProblem::gamma)
        .def_readwrite("rho", &StateDepProblem::rho)
        .def_readwrite("lambda_", &StateDepProblem::lambda)
        .def_readwrite("horizon", &StateDepProblem::horizon)
        .def_readwrite("n_grid", &StateDepProblem::n_grid);
    m.def(
        "solve_phi",
        [](const StateDepProblem& p, double tol, std::size_t max_iter, double omega) {
            StateDepSolution s = solve_phi(p, tol, max_iter, omega);
            return py::dict("s"_a = s.s, "phi"_a = s.phi, "residual"_a = s.residual, "iterations"_a = s.iterations);
        },
        "problem"_a, "tol"_a = 1e-12, "max_iter"_a = 10000, "omega"_a = 0.5);
}
