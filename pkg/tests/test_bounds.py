"""Blow-up time bounds: closed forms, high-precision oracle, fitting."""

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chemotaxis_lab.bounds import (
    BoundReport,
    OdiCoefficients,
    bound_report,
    explicit_bound,
    fit_odi_coefficients,
    osgood_integral,
)
from chemotaxis_lab.errors import DivergenceError, InsufficientSamples, InvalidParameter


def coeffs(A=1.0, B=0.0, C=0.0, gamma=2.0, delta=1.5, phi0=1.0, p=2.0,
           domain_measure=1.0):
    return OdiCoefficients(A=A, B=B, C=C, gamma=gamma, delta=delta,
                           phi0=phi0, p=p, domain_measure=domain_measure)


def mp_oracle(c: OdiCoefficients, dps=40):
    """Independent high-precision evaluation on the original infinite interval."""
    with mpmath.workdps(dps):
        A, B, C = mpmath.mpf(c.A), mpmath.mpf(c.B), mpmath.mpf(c.C)
        g, d = mpmath.mpf(c.gamma), mpmath.mpf(c.delta)
        val = mpmath.quad(lambda tau: 1 / (A * tau ** g + B * tau ** d + C),
                          [mpmath.mpf(c.phi0), mpmath.inf])
        return float(val)


class TestOsgoodClosedForms:
    def test_pure_power_gamma_two(self):
        T, err = osgood_integral(coeffs(A=1.0, gamma=2.0, phi0=1.0))
        assert T == pytest.approx(1.0, abs=1e-12)
        assert err < 1e-10

    def test_pure_power_general(self):
        c = coeffs(A=0.7, gamma=2.6, phi0=3.0, p=4.0)
        T, _ = osgood_integral(c)
        exact = c.phi0 ** (1 - c.gamma) / (c.A * (c.gamma - 1))
        assert T == pytest.approx(exact, rel=1e-12)
        # with B = C = 0 the explicit bound is the same integral, exactly
        assert explicit_bound(c) == pytest.approx(exact, rel=1e-14)

    def test_cubic_plus_quadratic_partial_fractions(self):
        # int_1^inf dtau/(tau^3 + tau^2) = 1 - ln 2
        T, _ = osgood_integral(coeffs(A=1.0, B=1.0, gamma=3.0, delta=2.0, phi0=1.0))
        assert T == pytest.approx(1.0 - np.log(2.0), abs=1e-10)

    def test_quartic_plus_cubic_partial_fractions(self):
        # int_1^inf dtau/(tau^4 + tau^3) = ln 2 - 1/2
        T, _ = osgood_integral(coeffs(A=1.0, B=1.0, gamma=4.0, delta=3.0, phi0=1.0))
        assert T == pytest.approx(np.log(2.0) - 0.5, abs=1e-10)

    def test_mixed_coefficients_against_oracle(self):
        c = coeffs(A=1.0, B=2.0, C=3.0, gamma=2.5, delta=1.5, phi0=2.0)
        T, err = osgood_integral(c)
        assert T == pytest.approx(mp_oracle(c), abs=1e-10)
        assert err <= 1e-10 * T


class TestOsgoodProperties:
    def test_random_draws_match_oracle(self, rng):
        for _ in range(25):
            delta = float(rng.uniform(1.05, 3.0))
            gamma = delta + float(rng.uniform(0.05, 2.0))
            c = coeffs(A=float(rng.uniform(0.1, 5.0)), B=float(rng.uniform(0.0, 5.0)),
                       C=float(rng.uniform(0.0, 5.0)), gamma=gamma, delta=delta,
                       phi0=float(rng.uniform(0.6, 10.0)))
            T, _ = osgood_integral(c)
            assert T == pytest.approx(mp_oracle(c), rel=1e-8)
            assert explicit_bound(c) <= T * (1 + 1e-9)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.floats(0.05, 2.0))
    def test_monotone_decreasing_in_coefficients_and_phi0(self, seed, bump):
        rng = np.random.default_rng(seed)
        delta = float(rng.uniform(1.05, 2.5))
        gamma = delta + float(rng.uniform(0.1, 1.5))
        base = coeffs(A=float(rng.uniform(0.2, 3.0)), B=float(rng.uniform(0.0, 3.0)),
                      C=float(rng.uniform(0.0, 3.0)), gamma=gamma, delta=delta,
                      phi0=float(rng.uniform(0.6, 5.0)))
        from dataclasses import replace
        T0, _ = osgood_integral(base)
        assert osgood_integral(replace(base, A=base.A + bump))[0] < T0
        assert osgood_integral(replace(base, B=base.B + bump))[0] < T0
        assert osgood_integral(replace(base, C=base.C + bump))[0] < T0
        assert osgood_integral(replace(base, phi0=base.phi0 + bump))[0] < T0

    def test_quadrature_refinement_within_error_estimate(self):
        c = coeffs(A=0.3, B=1.7, C=0.9, gamma=1.8, delta=1.2, phi0=1.4)
        T, err = osgood_integral(c)
        assert abs(T - mp_oracle(c)) <= max(err, 1e-10 * T)

    def test_divergent_gamma_rejected(self):
        with pytest.raises(DivergenceError):
            osgood_integral(coeffs(gamma=1.0, delta=0.5))

    def test_invalid_phi0_rejected(self):
        with pytest.raises(InvalidParameter):
            osgood_integral(coeffs(phi0=0.1, p=2.0, domain_measure=1.0))


class TestExplicitBound:
    def test_matches_osgood_for_pure_power(self):
        c = coeffs(A=2.0, gamma=3.0, phi0=1.5)
        assert explicit_bound(c) == pytest.approx(osgood_integral(c)[0], rel=1e-10)

    def test_dominates_pointwise(self, rng):
        # D tau^gamma >= A tau^gamma + B tau^delta + C_bar tau for tau >= phi0
        for _ in range(50):
            delta = float(rng.uniform(1.05, 2.5))
            gamma = delta + float(rng.uniform(0.1, 1.5))
            c = coeffs(A=float(rng.uniform(0.2, 3.0)), B=float(rng.uniform(0, 3.0)),
                       C=float(rng.uniform(0, 3.0)), gamma=gamma, delta=delta,
                       phi0=float(rng.uniform(0.6, 5.0)))
            tau = c.phi0 * np.geomspace(1.0, 1e4, 64)
            lhs = c.D * tau ** c.gamma
            rhs = c.A * tau ** c.gamma + c.B * tau ** c.delta + c.C_bar * tau
            assert np.all(lhs >= rhs * (1 - 1e-12))

    def test_report_consistency_flag(self):
        report = bound_report(coeffs(A=1.0, B=2.0, C=3.0, gamma=2.5, delta=1.5,
                                     phi0=2.0))
        assert isinstance(report, BoundReport)
        assert report.consistent
        assert report.T_explicit <= report.T_implicit


class TestFitOdiCoefficients:
    def test_recovers_own_model_class(self):
        # phi' = 2 phi^2: phi(t) = 1/(1/phi0 - 2t)
        phi0 = 1.0
        t = np.linspace(0.0, 0.2, 400)
        phi = 1.0 / (1.0 / phi0 - 2.0 * t)
        c = fit_odi_coefficients(t, phi, gamma=2.0, delta=1.5, p=2.0,
                                 domain_measure=1.0)
        assert c.A == pytest.approx(2.0, rel=0.01)
        assert c.B < 0.05
        assert c.C < 0.05
        T, _ = osgood_integral(c)
        # true blow-up of phi' = 2 phi^2 happens at 1/(2 phi0)
        assert T <= 0.5 / phi0 * (1 + 1e-6)

    def test_constant_series_feasible_with_tiny_coefficients(self):
        t = np.linspace(0.0, 1.0, 50)
        phi = np.full_like(t, 3.0)
        c = fit_odi_coefficients(t, phi, gamma=2.0, delta=1.5, p=2.0,
                                 domain_measure=1.0)
        assert c.B == pytest.approx(0.0, abs=1e-10)
        assert c.C == pytest.approx(0.0, abs=1e-10)

    def test_requires_enough_samples(self):
        t = np.linspace(0.0, 1.0, 10)
        with pytest.raises(InsufficientSamples):
            fit_odi_coefficients(t, t + 1.0, gamma=2.0, delta=1.5, p=2.0,
                                 domain_measure=1.0)

    def test_envelope_covers_noisy_derivative(self, rng):
        t = np.linspace(0.0, 0.2, 300)
        phi = 1.0 / (1.0 - 2.0 * t) + 0.01 * rng.standard_normal(t.size)
        phi = np.maximum.accumulate(np.abs(phi) + 1.0)
        c = fit_odi_coefficients(t, phi, gamma=2.0, delta=1.5, p=2.0,
                                 domain_measure=1.0)
        dphi = (phi[2:] - phi[:-2]) / (t[2:] - t[:-2])
        mid = phi[1:-1]
        env = c.A * mid ** 2 + c.B * mid ** 1.5 + c.C
        assert np.mean(env >= dphi - 1e-9) >= 0.99
