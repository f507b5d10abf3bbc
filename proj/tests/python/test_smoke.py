import math

import numpy as np
import pytest

import mvbsde


def test_presets_validate():
    assert mvbsde.validate_model(mvbsde.problem_a()).ok()
    assert mvbsde.validate_model(mvbsde.problem_b()).ok()
    bad = mvbsde.problem_a()
    bad.ckls.b, bad.ckls.sigma, bad.stock.delta = 1.0, 2.0, 10.0
    report = mvbsde.validate_model(bad)
    assert not report.ok()
    assert "moment_explosion" in str(report)


def test_moment_bound_specializations():
    for b, sigma, horizon in [(0.3, 0.6, 1.0), (1.2, 0.1, 2.0)]:
        assert mvbsde.general_moment_bound(b, sigma, 0.5, horizon) == pytest.approx(
            mvbsde.cir_moment_bound(b, sigma, horizon), rel=1e-12)
        assert mvbsde.general_moment_bound(b, sigma, 1.0, horizon) == pytest.approx(
            mvbsde.ou_moment_bound(b, sigma, horizon), rel=1e-12)


def test_simulation_shapes_and_determinism():
    model = mvbsde.problem_a()
    a = mvbsde.simulate_factor(model, 10, 500, seed=3, threads=1)
    b = mvbsde.simulate_factor(model, 10, 500, seed=3, threads=4)
    assert a.factor.shape == (500, 11)
    assert a.db_factor.shape == (500, 10)
    np.testing.assert_array_equal(a.factor, b.factor)
    assert np.all(a.factor[:, 0] == model.ckls.r0_factor)


def test_numerical_policy_tracks_analytic_baseline():
    model = mvbsde.problem_a()
    ens = mvbsde.simulate_factor(model, 10, 5000, seed=42)
    sol = mvbsde.solve_mv_bsde(model, ens)
    assert sol.converged()
    numerical = mvbsde.equilibrium_policy(model, sol)
    analytic = mvbsde.AnalyticBaseline.for_model(model).policy(ens.grid)
    for step in range(3, 11):
        r = float(ens.factor[0, step])
        assert numerical(step, r) == pytest.approx(analytic(step, r), rel=0.05)
    assert numerical.components(10, 28.0).hedge == 0.0


def test_objective_estimate():
    model = mvbsde.problem_b()
    ens = mvbsde.simulate_factor(model, 10, 2000, seed=1)
    policy = mvbsde.AnalyticBaseline.for_model(model).policy(ens.grid)
    est = mvbsde.estimate_objective(model, ens, policy)
    assert len(est["s"]) == 11
    assert est["j_hat"][-1] == pytest.approx(1.0)
    assert all(math.isfinite(x) for x in est["j_hat"])


def test_myopic_coefficient_matches_closed_form():
    pref = mvbsde.DiscountPreference()
    pref.gamma = 4.0
    pref.rho = mvbsde.RhoWeight.exponential(1.0, 0.2)
    pref.eta = mvbsde.EtaKernel.exponential(0.5)
    pref.mu = mvbsde.MuKernel.exponential(0.5)
    nodes, values = mvbsde.solve_myopic_coefficient(pref, lambda s: 0.08, lambda s: 1.0, 1.0)
    exact = [mvbsde.closed_form_A(pref, 1.0, s) for s in nodes]
    assert np.max(np.abs(values - exact)) < 1e-6


def test_state_dependent_fraction():
    p = mvbsde.StateDepProblem()
    p.beta = lambda s: 0.1
    p.sigma = lambda s: 0.2
    p.gamma = 3.0
    p.n_grid = 100
    out = mvbsde.solve_phi(p)
    assert out["residual"] < 1e-8
    assert out["phi"][-1] == pytest.approx(0.1 / (3.0 * 0.04), rel=1e-10)
    p.beta = lambda s: 0.0
    assert np.all(mvbsde.solve_phi(p)["phi"] == 0.0)
