"""Moment functionals, tracked constants, and their closed-form oracles."""

import numpy as np
import pytest

from chemotaxis_lab.errors import InvalidParameter, ModelError, SingularQuadratureError
from chemotaxis_lab.functionals import (
    FunctionalObserver,
    MassAccumulation,
    MomentConfig,
    admissible_gamma_interval,
    c0_constant,
    sandwich_constant,
    compute_L_bound,
    concavity_check,
    in_S_phi,
    mass_accumulation,
    moment_phi,
    moment_psi,
    production_means,
    signal_mean_gap,
    sphi_threshold,
)
from chemotaxis_lab.grid import RadialGrid
from chemotaxis_lab.regimes import ModelParams, PowerLawProduction
from chemotaxis_lab.solver import StepperConfig, run


def make_params(**overrides):
    base = dict(n=2, m1=1.0, m2=1.0, m3=1.0, chi=1.0, xi=1.0, lam=1.0, mu=1.0,
                k=1.5, alpha=1.2, beta=0.5, R=1.0)
    base.update(overrides)
    return ModelParams(**base)


def make_cfg(params, s0=None, gamma=None, **kw):
    Rn = float(params.R) ** params.n
    s0 = Rn / 6 if s0 is None else s0
    if gamma is None:
        low, high = admissible_gamma_interval(params)
        gamma = 0.5 * (low + high)
    defaults = dict(s0=s0, moment_gamma=gamma, s_star=s0 / 2, eps0=s0 / 4)
    defaults.update(kw)
    return MomentConfig(**defaults)


class TestMassAccumulation:
    def test_constant_density_linear(self):
        grid = RadialGrid.uniform(n=3, R=1.0, N=64)
        acc = mass_accumulation(grid, np.full(grid.N, 2.5))
        s = np.linspace(0, 1, 17)
        assert np.allclose(acc(s), 2.5 * s / 3, rtol=1e-13)

    def test_zero_density(self):
        grid = RadialGrid.uniform(n=2, R=1.0, N=16)
        acc = mass_accumulation(grid, np.zeros(grid.N))
        assert acc.total == 0.0

    def test_indicator_profile_piecewise(self):
        grid = RadialGrid.uniform(n=2, R=1.0, N=64)
        r1 = grid.r_faces[16]
        u = np.where(grid.r_centers < r1, 4.0, 0.0)
        acc = mass_accumulation(grid, u)
        s = np.linspace(0, 1, 33)
        assert np.allclose(acc(s), 4.0 * np.minimum(s, r1 ** 2) / 2, atol=1e-14)

    def test_endpoint_total_mass(self):
        grid = RadialGrid.uniform(n=2, R=1.0, N=64)
        u = np.exp(-3 * grid.r_centers ** 2)
        acc = mass_accumulation(grid, u)
        assert acc.total == pytest.approx(grid.integrate(u) / grid.omega_n, rel=1e-13)
        assert np.all(np.diff(acc.values) >= 0)
        assert acc.values[0] == 0.0

    def test_linearity_in_u(self, rng):
        grid = RadialGrid.uniform(n=2, R=1.0, N=32)
        u = rng.uniform(0, 2, grid.N)
        s = np.linspace(0, 1, 11)
        assert np.allclose(mass_accumulation(grid, 3.0 * u, s),
                           3.0 * mass_accumulation(grid, u, s), rtol=1e-13)


class TestMomentPhi:
    def test_linear_U_closed_form(self):
        params = make_params(n=2)
        grid = RadialGrid.uniform(n=2, R=1.0, N=128)
        u0 = 1.7
        acc = mass_accumulation(grid, np.full(grid.N, u0))
        for gamma in (-1.0, 0.0, 0.4, 0.9):
            cfg = make_cfg(params, gamma=gamma)
            expected = (u0 / grid.n) * cfg.s0 ** (3 - gamma) / ((2 - gamma) * (3 - gamma))
            assert moment_phi(acc, cfg) == pytest.approx(expected, rel=1e-12)

    def test_zero_U(self):
        params = make_params()
        grid = RadialGrid.uniform(n=2, R=1.0, N=16)
        acc = mass_accumulation(grid, np.zeros(grid.N))
        assert moment_phi(acc, make_cfg(params)) == 0.0

    def test_gamma_zero_identity_slope(self):
        # U(s) = s on [0, 6], s0 = 1: phi = s0^3/6
        acc = MassAccumulation(np.linspace(0, 6, 7), np.linspace(0, 6, 7))
        cfg = MomentConfig(s0=1.0, moment_gamma=0.0, s_star=0.5, eps0=0.2)
        assert moment_phi(acc, cfg) == pytest.approx(1.0 / 6.0, rel=1e-14)

    def test_linearity_in_U(self, rng):
        params = make_params()
        grid = RadialGrid.uniform(n=2, R=1.0, N=64)
        u = rng.uniform(0, 3, grid.N)
        cfg = make_cfg(params)
        phi1 = moment_phi(mass_accumulation(grid, u), cfg)
        phi2 = moment_phi(mass_accumulation(grid, 2.0 * u), cfg)
        assert phi2 == pytest.approx(2.0 * phi1, rel=1e-12)

    def test_rejects_gamma_at_one(self):
        acc = MassAccumulation(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
        cfg = MomentConfig(s0=0.1, moment_gamma=0.0, s_star=0.05, eps0=0.01)
        object.__setattr__(cfg, "moment_gamma", 1.0)
        with pytest.raises(SingularQuadratureError):
            moment_phi(acc, cfg)


class TestMomentPsi:
    def test_constant_slope_closed_form(self):
        params = make_params(n=2, m2=1.0, alpha=1.2)
        grid = RadialGrid.uniform(n=2, R=1.0, N=128)
        c = 0.8  # U_s = u/n
        acc = mass_accumulation(grid, np.full(grid.N, c * grid.n))
        exponent = params.m2 + params.alpha
        for gamma in (0.0, 0.5):
            cfg = make_cfg(params, gamma=gamma)
            expected = c ** exponent * cfg.s0 ** (3 - gamma) / ((2 - gamma) * (3 - gamma))
            assert moment_psi(acc, cfg, exponent) == pytest.approx(expected, rel=1e-12)

    def test_zero_slope(self):
        params = make_params()
        grid = RadialGrid.uniform(n=2, R=1.0, N=16)
        acc = mass_accumulation(grid, np.zeros(grid.N))
        assert moment_psi(acc, make_cfg(params), 2.2) == 0.0

    def test_scaling_power(self, rng):
        params = make_params()
        grid = RadialGrid.uniform(n=2, R=1.0, N=64)
        u = rng.uniform(0, 2, grid.N)
        cfg = make_cfg(params)
        exponent = params.m2 + params.alpha
        psi1 = moment_psi(mass_accumulation(grid, u), cfg, exponent)
        psi3 = moment_psi(mass_accumulation(grid, 3.0 * u), cfg, exponent)
        assert psi3 == pytest.approx(3.0 ** exponent * psi1, rel=1e-12)

    def test_holder_interpolation_bound(self, rng):
        # int s^{1-g}(s0-s) U_s^{m2} <= psi^{m2/(m2+a)} ((2-g)(3-g))^{-a/(m2+a)} s0^{(3-g)a/(m2+a)}
        params = make_params(n=2, m2=0.9, alpha=1.3)
        grid = RadialGrid.uniform(n=2, R=1.0, N=96)
        m2, alpha = params.m2, params.alpha
        cfg = make_cfg(params, gamma=0.3)
        g = cfg.moment_gamma
        for _ in range(25):
            u = rng.uniform(0, 5, grid.N)
            acc = mass_accumulation(grid, u)
            lhs = moment_psi(acc, cfg, m2)
            psi = moment_psi(acc, cfg, m2 + alpha)
            rhs = psi ** (m2 / (m2 + alpha)) \
                * ((2 - g) * (3 - g)) ** (-alpha / (m2 + alpha)) \
                * cfg.s0 ** ((3 - g) * alpha / (m2 + alpha))
            assert lhs <= rhs * (1 + 1e-12)


class TestQuadratureRefinement:
    def test_moments_converge_on_smooth_profile(self):
        params = make_params()
        cfg = make_cfg(params, gamma=0.6)
        exponent = params.m2 + params.alpha

        def values(N):
            grid = RadialGrid.uniform(n=2, R=1.0, N=N)
            u = 3.0 * np.exp(-4 * grid.r_centers ** 2)
            acc = mass_accumulation(grid, u)
            return moment_phi(acc, cfg), moment_psi(acc, cfg, exponent)

        phi_256, psi_256 = values(256)
        phi_512, psi_512 = values(512)
        phi_ref, psi_ref = values(4096)
        assert abs(phi_512 - phi_ref) < 0.6 * abs(phi_256 - phi_ref)
        assert abs(psi_512 - psi_ref) < 0.6 * abs(psi_256 - psi_ref)


class TestThreshold:
    def test_degenerate_threshold_zero(self):
        params = make_params(n=1)
        cfg = MomentConfig(s0=1.0 / 6, moment_gamma=0.0, s_star=0.05, eps0=0.05)
        assert sphi_threshold(params, cfg, M=1.0 / 6) == 0.0
        assert in_S_phi(0.0, 0.0)

    def test_worked_example(self):
        # gamma=0, omega_1=2, M=2, s0=1 -> (2-1)*1/((1)(2)*2) = 1/4
        params = make_params(n=1, R=6.5)
        cfg = MomentConfig(s0=1.0, moment_gamma=0.0, s_star=0.5, eps0=0.4)
        assert sphi_threshold(params, cfg, M=2.0) == pytest.approx(0.25, rel=1e-14)

    def test_below_threshold(self):
        assert not in_S_phi(0.2, 0.25)


class TestProductionMeans:
    def test_zero_density_constants(self):
        params = make_params(k2=0.7, k3=2.0, chi=3.0, xi=0.5)
        grid = RadialGrid.uniform(n=2, R=1.0, N=32)
        m1_t, m2_t, m_t = production_means(grid, np.zeros(grid.N),
                                           PowerLawProduction(params), params)
        assert m1_t == pytest.approx(2.0)
        assert m2_t == pytest.approx(0.7)
        assert m_t == pytest.approx(3.0 * 2.0 - 0.5 * 0.7)

    def test_cancellation(self):
        params = make_params(chi=1.0, xi=1.0, alpha=0.9, beta=0.9, k2=1.0, k3=1.0)
        grid = RadialGrid.uniform(n=2, R=1.0, N=32)
        u = np.exp(-grid.r_centers)
        _, _, m_t = production_means(grid, u, PowerLawProduction(params), params)
        assert abs(m_t) < 1e-14

    def test_against_refined_quadrature(self):
        params = make_params(alpha=1.3, beta=0.4)
        production = PowerLawProduction(params)

        def mean_at(N):
            grid = RadialGrid.uniform(n=2, R=1.0, N=N)
            u = 2.0 * np.exp(-5 * grid.r_centers ** 2)
            return production_means(grid, u, production, params)[0]

        coarse, fine = mean_at(128), mean_at(4096)
        assert coarse == pytest.approx(fine, rel=1e-4)


class TestAggregateConstants:
    def test_worked_c0_value(self):
        # chi=xi=k2=k3=1, alpha=2, beta=1, n=1, gamma=0, L=0:
        #   c0 = f1(8/(3*omega_1)) + (1/6) * (1 * (2*1/2)^2)
        params = make_params(n=1, chi=1.0, xi=1.0, k2=1.0, k3=1.0,
                             alpha=2.0, beta=1.0)
        cfg = MomentConfig(s0=1.0 / 6, moment_gamma=0.0, s_star=0.05, eps0=0.05)
        production = PowerLawProduction(params)
        c0, c9 = c0_constant(params, production, cfg, L_bound=0.0)
        argument = 8.0 / (3.0 * 2.0)
        expected = (argument + 1.0) ** 2 + (1.0 / 6.0) * ((2.0 * 1.0 / 2.0) ** 2)
        assert c0 == pytest.approx(expected, rel=1e-13)
        assert expected == pytest.approx(101.0 / 18.0, rel=1e-13)

    def test_requires_alpha_above_beta(self):
        params = make_params(alpha=1.0, beta=1.0)
        cfg = MomentConfig(s0=1.0 / 6, moment_gamma=0.0, s_star=0.05, eps0=0.04)
        with pytest.raises(ModelError):
            c0_constant(params, PowerLawProduction(params), cfg)
        with pytest.raises(ModelError):
            sandwich_constant(params)

    def test_sandwich_c_unit_base(self):
        # chi k3 alpha = 2 xi k2 beta makes the base 1
        params = make_params(chi=1.0, xi=1.0, k2=1.0, k3=1.0, alpha=2.0, beta=1.0)
        assert sandwich_constant(params) == pytest.approx(
            params.chi * params.k3 * (params.alpha - params.beta) / (2 * params.beta))

    def test_L_bound_power_law(self):
        params = make_params(chi=2.0, xi=1.0, alpha=1.5, beta=0.5, k2=1.0, k3=1.0)
        production = PowerLawProduction(params)
        L = compute_L_bound(params, production, K=3.0)
        f1K = production.f1(3.0)
        f2K = production.f2(3.0)
        fmax = np.max(np.abs(2.0 * production.f1(np.linspace(0, 3, 2001))
                             - production.f2(np.linspace(0, 3, 2001))))
        assert L == pytest.approx(max(f1K, f2K, fmax))


class TestConcavity:
    def test_linear_U_zero(self):
        acc = MassAccumulation(np.linspace(0, 1, 33), np.linspace(0, 1, 33))
        assert concavity_check(acc) == pytest.approx(0.0, abs=1e-12)

    def test_sqrt_strictly_concave(self):
        s = np.linspace(0, 1, 65)
        acc = MassAccumulation(s, np.sqrt(s))
        assert concavity_check(acc) < 0.0

    def test_nonincreasing_profile_concave_accumulation(self):
        grid = RadialGrid.uniform(n=2, R=1.0, N=128)
        u = 3.0 * np.exp(-6 * grid.r_centers ** 2)
        acc = mass_accumulation(grid, u)
        assert concavity_check(acc) <= 1e-10 * np.max(np.abs(u))


class TestGammaInterval:
    def test_blowup_scenario_interval(self, blowup_params):
        low, high = admissible_gamma_interval(blowup_params)
        assert low == pytest.approx(2.0 - (2.2 / 1.2), rel=1e-12)
        assert high == 1.0

    def test_negative_m1_upper_bound(self):
        # 2 - 2/n binds only when it is below 1, i.e. n = 1
        params = make_params(n=1, m1=-0.5, m2=1.0, alpha=1.5, k=1.2)
        low, high = admissible_gamma_interval(params)
        assert high == pytest.approx(0.0, abs=1e-14)
        params4 = make_params(n=4, m1=-0.5, m2=1.0, alpha=1.5, k=1.2)
        assert admissible_gamma_interval(params4)[1] == 1.0

    def test_validate_rejects_out_of_interval(self, blowup_params):
        cfg = MomentConfig(s0=1.0 / 6, moment_gamma=0.0, s_star=0.05, eps0=0.04)
        with pytest.raises(InvalidParameter):
            cfg.validate(blowup_params)


class TestSignalMeanGap:
    def test_bound_holds_for_moderate_profile(self, blowup_params):
        params = blowup_params
        grid = RadialGrid.uniform(n=2, R=1.0, N=256)
        cfg = make_cfg(params, s0=1.0 / 6)
        production = PowerLawProduction(params)
        u = 5.0 * np.exp(-10 * grid.r_centers ** 2)
        c0, _ = c0_constant(params, production, cfg)
        assert signal_mean_gap(grid, u, params, production, cfg, c0) <= 0.0


class TestObserver:
    def test_columns_recorded_during_run(self, blowup_params):
        params = blowup_params
        grid = RadialGrid.uniform(n=2, R=1.0, N=96)
        production = PowerLawProduction(params)
        cfg = make_cfg(params, s0=1.0 / 6)
        u0 = 2.0 * np.exp(-4 * grid.r_centers ** 2)
        M = max(grid.integrate(u0),
                (params.lam / params.mu * params.domain_measure ** (params.k - 1))
                ** (1 / (params.k - 1)))
        obs = FunctionalObserver(params, production, p_list=(1.0, 2.0),
                                 p_energy=4.0, moment_cfg=cfg, M=M)
        config = StepperConfig(t_end=0.02, dt_init=1e-5, dt_max=1e-3,
                               blowup_threshold=1e4)
        result = run(u0, grid, params, production, config,
                     observers=[obs], mode="reduced")
        for col in ("lp_1", "lp_2", "phi_p", "moment_phi", "moment_psi", "in_S_phi"):
            assert col in result.series
            assert np.all(np.isfinite(result.series[col]))
        assert obs.constants["c0"] > 0
        # phi stays nonnegative, psi too
        assert np.all(result.series["moment_phi"] >= 0)
        assert np.all(result.series["moment_psi"] >= 0)
