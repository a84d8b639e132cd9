import math

import numpy as np
import pytest

from opinion_kinetics.core import DomainError, NumericsError, validate_params
from opinion_kinetics import equilibrium as eq
from opinion_kinetics import kinetic
from opinion_kinetics import meanfield as mf
from opinion_kinetics import metrics


class TestGridDensity:
    def test_needs_three_points(self):
        with pytest.raises(DomainError):
            kinetic.GridDensity(np.array([1.0, 1.0]))

    def test_rejects_negative_values(self):
        with pytest.raises(DomainError):
            kinetic.GridDensity(np.array([0.5, -0.1, 0.5]))

    def test_uniform_mass(self):
        assert kinetic.GridDensity.uniform(101).mass() == pytest.approx(1.0)

    def test_spacing(self):
        rho = kinetic.GridDensity.uniform(20001)
        assert rho.dx == pytest.approx(1e-4)
        assert rho.x[0] == -1.0 and rho.x[-1] == 1.0

    def test_char_fn_uniform(self):
        rho = kinetic.GridDensity.uniform(4001)
        for xi in (1.0, 3.0):
            assert rho.char_fn(xi) == pytest.approx(np.sin(xi) / xi, abs=1e-6)

    def test_quantile_roundtrip(self):
        rho = kinetic.GridDensity.uniform(2001)
        u = np.array([0.0, 0.25, 0.5, 1.0])
        np.testing.assert_allclose(rho.quantile(u), [-1.0, -0.5, 0.0, 1.0],
                                   atol=1e-12)

    def test_deterministic_sample_is_sorted(self):
        s = kinetic.GridDensity.uniform(101).sample(1000)
        assert np.all(np.diff(s.values) >= 0)


class TestMomentsFromGrid:
    def test_uniform(self):
        m, q = kinetic.moments_from_grid(kinetic.GridDensity.uniform(20001))
        assert m == pytest.approx(0.0, abs=1e-12)
        assert q == pytest.approx(1 / 3, abs=1e-8)

    def test_point_like_at_right_edge(self):
        n = 1001
        values = np.zeros(n)
        values[-1] = 2.0 / (2.0 / (n - 1))  # unit trapezoid mass at x = 1
        m, q = kinetic.moments_from_grid(kinetic.GridDensity(values))
        assert m == pytest.approx(1.0)
        assert q == pytest.approx(1.0)

    def test_volcano_moments(self):
        rho = kinetic.GridDensity.from_function(eq.volcano_density, 20001,
                                                normalize=False)
        m, q = rho.moments()
        assert abs(m) < 1e-8
        assert q == pytest.approx(mf.stationary_variance(eq.VOLCANO_MU, 0.0),
                                  abs=1e-6)


class TestApplyQStar:
    def test_uniform_is_stationary_at_half(self):
        rho = kinetic.GridDensity.uniform(2001)
        d = kinetic.apply_q_star(rho, 0.0, validate_params(0.5, 0.5))
        assert np.abs(d).max() < 1e-13

    def test_volcano_residual(self):
        mu = eq.VOLCANO_MU
        rho = kinetic.GridDensity.from_function(eq.volcano_density, 20001,
                                                normalize=False)
        resid = kinetic.apply_q_star(rho, 0.0, validate_params(mu, mu))
        assert np.abs(resid).max() <= 10.0 * rho.dx

    def test_conserves_mass(self):
        bump = kinetic.GridDensity.from_function(
            lambda x: np.exp(-4.0 * x ** 2), 20001)
        for params, m in ((validate_params(0.25, 0.25), 0.0),
                          (validate_params(0.3, 0.6), 0.1)):
            d = kinetic.apply_q_star(bump, m, params)
            assert abs(np.trapezoid(d, dx=bump.dx)) < 1e-8

    def test_rejects_voter_edge(self):
        rho = kinetic.GridDensity.uniform(101)
        with pytest.raises(DomainError):
            kinetic.apply_q_star(rho, 0.0, validate_params(1.0, 0.5))


class TestSolvePde:
    def test_zero_time_identity(self):
        rho0 = kinetic.GridDensity.uniform(101)
        out = kinetic.solve_pde(rho0, 0.0, 0.01, validate_params(0.3, 0.3), 0.0)
        np.testing.assert_allclose(out[0][1].values, rho0.values)

    def test_refuses_fractal_regime(self):
        rho0 = kinetic.GridDensity.uniform(101)
        with pytest.raises(DomainError, match="equilibrium"):
            kinetic.solve_pde(rho0, 1.0, 0.01, validate_params(0.5, 0.5), 0.0)

    def test_time_step_guard(self):
        rho0 = kinetic.GridDensity.uniform(101)
        with pytest.raises(DomainError):
            kinetic.solve_pde(rho0, 1.0, 0.2, validate_params(0.3, 0.3), 0.0)

    def test_initial_mean_consistency(self):
        rho0 = kinetic.GridDensity.uniform(101)
        with pytest.raises(DomainError, match="mean"):
            kinetic.solve_pde(rho0, 1.0, 0.01, validate_params(0.3, 0.3), 0.2)

    def test_mass_drift_raises(self, monkeypatch):
        # a leaking operator must trip the instability guard
        monkeypatch.setattr(kinetic, "_q_star_values",
                            lambda x, v, m, params: np.ones_like(v))
        rho0 = kinetic.GridDensity.uniform(101)
        with pytest.raises(NumericsError):
            kinetic.solve_pde(rho0, 1.0, 0.1, validate_params(0.3, 0.3), 0.0)

    def test_per_step_mass_conservation(self):
        drifts = []
        kinetic.solve_pde(kinetic.GridDensity.uniform(20001), 0.2, 0.01,
                          validate_params(0.3, 0.3), 0.0,
                          step_monitor=lambda t, mass: drifts.append(abs(mass - 1.0)))
        assert len(drifts) == 20
        assert max(drifts) < 1e-8

    def test_mean_fidelity_across_parameters(self):
        cases = [(validate_params(m, m), 0.0) for m in (0.25, 0.3, 0.4)]
        cases.append((validate_params(0.3, 0.6), 0.0))
        for params, m0 in cases:
            out = kinetic.solve_pde(kinetic.GridDensity.uniform(20001), 5.0, 0.01,
                                    params, m0, snapshot_times=(1.0, 5.0))
            for t, rho in out:
                assert abs(rho.moments()[0] - mf.mean_at(t, m0, params)) < 1e-3

    def test_tilted_mean_is_conserved(self):
        rho0 = kinetic.GridDensity.from_function(lambda x: 0.5 + 0.3 * x, 4001,
                                                 normalize=False)
        out = kinetic.solve_pde(rho0, 2.0, 0.01, validate_params(0.3, 0.3), 0.2)
        assert out[0][1].moments()[0] == pytest.approx(0.2, abs=1e-3)

    def test_w1_contraction_along_solver(self):
        # two solutions with common mean contract in W1 at rate >= mu
        params = validate_params(0.3, 0.3)
        rho0 = kinetic.GridDensity.uniform(4001)
        var0 = kinetic.GridDensity.from_function(lambda x: 1.0 - np.abs(x), 4001,
                                                 normalize=False)
        snaps = (1.0, 2.0, 5.0)
        sols_a = kinetic.solve_pde(rho0, 5.0, 0.01, params, 0.0, snapshot_times=snaps)
        sols_b = kinetic.solve_pde(var0, 5.0, 0.01, params, 0.0, snapshot_times=snaps)
        x = rho0.x
        w0 = metrics.wasserstein_1_cdfs(x, rho0.cdf(), var0.cdf())
        for (t, a), (_, b) in zip(sols_a, sols_b):
            wt = metrics.wasserstein_1_cdfs(x, a.cdf(), b.cdf())
            assert wt <= w0 * math.exp(-0.3 * t) * 1.05


class TestSolveSpectral:
    def test_zero_time_identity(self):
        state = kinetic.solve_spectral(0.3, 0.0, 5.0, 20, 0.0)
        np.testing.assert_allclose(state.values, np.ones(21), atol=1e-14)

    def test_uniform_limit_at_half(self):
        state = kinetic.solve_spectral(0.5, 0.0, 5.0, 20, 30.0)
        assert abs(state.values[0] - np.sin(5.0) / 5.0) < 1e-4

    def test_matches_equilibrium_product(self):
        state = kinetic.solve_spectral(0.3, 0.0, 2.0, 30, 30.0)
        cf = eq.char_fn_equilibrium(0.3, 200)
        assert abs(state.values[0] - cf(2.0)) < 1e-4

    def test_depth_guard(self):
        with pytest.raises(DomainError, match="depth"):
            kinetic.solve_spectral(0.1, 0.0, 5.0, 1, 1.0)

    def test_domain_checks(self):
        with pytest.raises(DomainError):
            kinetic.solve_spectral(1.0, 0.0, 5.0, 20, 1.0)
        with pytest.raises(DomainError):
            kinetic.solve_spectral(0.3, 0.0, -5.0, 20, 1.0)

    def test_grid_spectral_agreement(self):
        # the two solvers see the same (mollified vs exact) point-mass init;
        # by t = 10 both are close to equilibrium and to each other
        for mu in (0.25, 0.4):
            params = validate_params(mu, mu)
            rho0 = kinetic.GridDensity.from_function(
                lambda x: np.exp(-0.5 * (x / 0.02) ** 2), 20001)
            rho = kinetic.solve_pde(rho0, 10.0, 0.01, params, 0.0)[-1][1]
            for xi in (1.0, 2.0, 5.0):
                spectral = kinetic.solve_spectral(mu, 0.0, xi, 40, 10.0).values[0]
                assert abs(rho.char_fn(xi) - spectral) < 1e-3
