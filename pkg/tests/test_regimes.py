"""Regime classification, derived exponents and the exact rational path."""

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chemotaxis_lab.errors import (
    ExponentInequalityViolation,
    InvalidParameter,
    RegimeError,
)
from chemotaxis_lab.regimes import (
    ModelParams,
    PowerLawProduction,
    TabulatedProduction,
    admissible_value,
    check_assumptions,
    compare_with_linear_sensitivity,
    compute_exponents,
    compute_pbar,
    compute_pbar_detail,
    compute_pfrak,
    validate_params,
)

from conftest import draw_admissible, random_params

# the four published parameter rows with exact infima (pfrak, pbar, binding entry)
FIGURE_ROWS = [
    (
        dict(n=1, m1=F(81, 50), m2=F(-149, 100), m3=F(33, 20),
             alpha=F(587, 100), beta=F(63, 25)),
        F(69, 50), F(99, 10), "m3(n+2)(n+1)",
    ),
    (
        dict(n=5, m1=F(-3, 50), m2=F(6, 5), m3=F(-143, 100),
             alpha=F(163, 100), beta=F(169, 100)),
        F(289, 40), F(252, 5), "m2(n+2)(n+1)",
    ),
    (
        dict(n=4, m1=F(-187, 100), m2=F(-89, 100), m3=F(-181, 100),
             alpha=F(353, 100), beta=F(19, 50)),
        F(451, 50), F(353, 25), "n*alpha",
    ),
    (
        dict(n=4, m1=F(47, 50), m2=F(6, 25), m3=F(-63, 50),
             alpha=F(179, 100), beta=F(119, 50)),
        F(109, 50), F(238, 25), "n*beta",
    ),
]


def figure_params(row):
    base = dict(chi=1, xi=1, lam=1, mu=1, k=F(3, 2), R=1)
    base.update(row)
    return ModelParams(**base)


class TestValidateParams:
    def test_accepts_valid(self):
        p = ModelParams(n=2, m1=1, m2=1, m3=1, chi=1, xi=1, lam=1, mu=1,
                        k=1.5, alpha=1, beta=1)
        assert validate_params(p) is p

    def test_rejects_k_equal_one(self):
        p = ModelParams(n=2, m1=1, m2=1, m3=1, chi=1, xi=1, lam=1, mu=1,
                        k=1.0, alpha=1, beta=1)
        with pytest.raises(InvalidParameter, match="k must exceed 1"):
            validate_params(p)

    def test_rejects_negative_mu(self):
        p = ModelParams(n=2, m1=1, m2=1, m3=1, chi=1, xi=1, lam=1, mu=-1,
                        k=1.5, alpha=1, beta=1)
        with pytest.raises(InvalidParameter, match="mu must be positive"):
            validate_params(p)

    def test_rejects_bad_dimension(self):
        p = ModelParams(n=0, m1=1, m2=1, m3=1, chi=1, xi=1, lam=1, mu=1,
                        k=1.5, alpha=1, beta=1)
        with pytest.raises(InvalidParameter):
            validate_params(p)

    def test_domain_measure_matches_ball_volume(self):
        for n, vol1 in [(1, 2.0), (2, np.pi), (3, 4 * np.pi / 3)]:
            p = ModelParams(n=n, m1=1, m2=1, m3=1, chi=1, xi=1, lam=1, mu=1,
                            k=1.5, alpha=1, beta=1, R=2.0)
            assert p.domain_measure == pytest.approx(vol1 * 2.0 ** n, rel=1e-12)


class TestProductionLaws:
    def test_power_law_passes_validation(self):
        p = ModelParams(n=2, m1=1, m2=1, m3=1, chi=1, xi=1, lam=1, mu=1,
                        k=1.5, alpha=1.2, beta=0.5)
        PowerLawProduction(p).validate(p)

    def test_tabulated_violating_envelope_rejected(self):
        p = ModelParams(n=2, m1=1, m2=1, m3=1, chi=1, xi=1, lam=1, mu=1,
                        k=1.5, alpha=2.0, beta=0.5)
        s = np.linspace(0.0, 10.0, 11)
        law = TabulatedProduction(s, f1=s + 1.0, f2=(s + 1.0) ** 0.4)
        with pytest.raises(InvalidParameter, match="f1 must dominate"):
            law.validate(p, samples=s)


class TestCheckAssumptions:
    def test_blowup_scenario_h5(self, blowup_params):
        report = check_assumptions(blowup_params)
        # m2+alpha = 2.2 > max(m1 + 2k/n, k) = max(2.1, 1.1)
        assert report.h5.holds
        assert report.blowup_predicted

    def test_figure_row1_h1(self):
        p = figure_params(FIGURE_ROWS[0][0])
        report = check_assumptions(p)
        assert report.h1.holds  # 4.38 > 1.62 + 2

    def test_h1_boundary_fails_strictly(self):
        # m2 + alpha == m1 + 2/n exactly, checked with rationals
        p = ModelParams(n=4, m1=F(1, 2), m2=F(1, 2), m3=F(1, 2), chi=1, xi=1,
                        lam=1, mu=1, k=F(3, 2), alpha=F(1, 2), beta=F(1, 4))
        report = check_assumptions(p)
        assert not report.h1.holds

    def test_h3_boundary_equality_holds(self):
        # non-strict m2+alpha >= m3+beta accepted at equality
        p = ModelParams(n=2, m1=F(1, 2), m2=1, m3=1, chi=1, xi=1,
                        lam=1, mu=1, k=F(3, 2), alpha=1, beta=1)
        report = check_assumptions(p)
        assert report.h3.holds

    def test_blowup_prediction_needs_equal_sensitivities(self, blowup_params):
        from dataclasses import replace
        p = replace(blowup_params, m3=0.9)
        report = check_assumptions(p)
        assert report.h5.holds and not report.blowup_predicted

    @settings(max_examples=150, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_h5_with_equal_sensitivities_implies_h1_h2(self, seed):
        rng = np.random.default_rng(seed)
        m2 = float(rng.uniform(0.05, 3))
        p = random_params(rng, m2=m2, m3=m2)
        report = check_assumptions(p)
        if report.h5.holds:
            assert report.h1.holds and report.h2.holds


class TestPfrak:
    @pytest.mark.parametrize("row, pfrak, _pbar, _name", FIGURE_ROWS[:2])
    def test_figure_values_exact(self, row, pfrak, _pbar, _name):
        assert compute_pfrak(figure_params(row)) == pfrak

    def test_m_cancellation(self):
        p = ModelParams(n=2, m1=1, m2=1, m3=1, chi=1, xi=1, lam=1, mu=1,
                        k=1.5, alpha=2, beta=1)
        assert compute_pfrak(p) == 2

    def test_requires_h1(self):
        p = ModelParams(n=1, m1=3, m2=0, m3=0, chi=1, xi=1, lam=1, mu=1,
                        k=1.5, alpha=1, beta=0.5)
        with pytest.raises(RegimeError):
            compute_pfrak(p)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.floats(0.01, 0.5))
    def test_monotonicity(self, seed, bump):
        from dataclasses import replace
        rng = np.random.default_rng(seed)
        p = draw_admissible(rng)
        base = compute_pfrak(p)
        assert compute_pfrak(replace(p, alpha=p.alpha + bump)) > base
        assert compute_pfrak(replace(p, m2=p.m2 + bump)) > base
        higher_m1 = replace(p, m1=p.m1 + bump)
        if check_assumptions(higher_m1).h1.holds:
            assert compute_pfrak(higher_m1) < base
        # linear in n: value scales exactly with the dimension
        assert compute_pfrak(replace(p, n=2 * p.n)) == pytest.approx(2 * base)


class TestPbar:
    @pytest.mark.parametrize("row, pfrak, pbar, name", FIGURE_ROWS)
    def test_figure_values_exact(self, row, pfrak, pbar, name):
        p = figure_params(row)
        choice = admissible_value(compute_pfrak(p))
        value, binding = compute_pbar_detail(p, choice)
        assert value == pbar
        assert binding == name

    def test_rejects_inadmissible_pfrak(self):
        p = figure_params(FIGURE_ROWS[0][0])
        with pytest.raises(RegimeError):
            compute_pbar(p, compute_pfrak(p))


class TestExponents:
    def test_closed_forms(self):
        p = ModelParams(n=2, m1=1, m2=1, m3=1, chi=1, xi=1, lam=1, mu=1,
                        k=1.5, alpha=1, beta=0.5)
        exps = compute_exponents(p, pfrak_choice=1.5, p_choice=2)
        assert exps.sigma == pytest.approx(3.0)
        assert exps.odi_delta == pytest.approx(1.5)
        assert exps.odi_gamma == pytest.approx(2.0)
        assert exps.odi_gamma > exps.odi_delta > 1

    def test_sigma_hat_cancellation_at_m1_one(self, rng):
        # m1 = 1 collapses sigma_hat to exactly 2 for any p
        for _ in range(10):
            p = draw_admissible(rng, m1=1.0)
            choice = admissible_value(compute_pfrak(p))
            pb = compute_pbar(p, choice)
            exps = compute_exponents(p, choice, admissible_value(pb), verify=False)
            assert exps.sigma_hat == pytest.approx(2.0, rel=1e-13)

    def test_figure_row2_all_relations_hold(self):
        p = figure_params(FIGURE_ROWS[1][0])
        choice = admissible_value(compute_pfrak(p))
        pb = compute_pbar(p, choice)
        exps = compute_exponents(p, choice, admissible_value(pb))
        assert all(ok for ok, _ in exps.relations.values())

    def test_violation_raised_with_failed_relations(self):
        p = figure_params(FIGURE_ROWS[1][0])
        choice = admissible_value(compute_pfrak(p))
        with pytest.raises(ExponentInequalityViolation):
            # p far below admissibility violates several relations
            compute_exponents(p, choice, p_choice=1.05)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_odi_ordering_under_h1(self, seed):
        rng = np.random.default_rng(seed)
        p = draw_admissible(rng)
        if p.m2 + p.alpha <= 1:
            return
        choice = admissible_value(compute_pfrak(p))
        pb = compute_pbar(p, choice)
        exps = compute_exponents(p, choice, admissible_value(pb), verify=False)
        assert exps.odi_gamma > exps.odi_delta > 1


class TestWangComparison:
    def test_m1_large_same(self):
        p = ModelParams(n=3, m1=2, m2=1, m3=1, chi=1, xi=1, lam=1, mu=1,
                        k=1.5, alpha=1, beta=0.5)
        assert compare_with_linear_sensitivity(p) == "same"

    def test_low_dimension_strictly_larger(self):
        p = ModelParams(n=2, m1=-1, m2=1, m3=1, chi=1, xi=1, lam=1, mu=1,
                        k=1.5, alpha=1, beta=0.5)
        assert compare_with_linear_sensitivity(p) == "strictly_larger"

    def test_supercritical_k_not_strictly_larger(self):
        p = ModelParams(n=4, m1=-1, m2=1, m3=1, chi=1, xi=1, lam=1, mu=1,
                        k=3.0, alpha=1, beta=0.5)
        assert compare_with_linear_sensitivity(p) == "same"

    def test_requires_unit_sensitivities(self):
        p = ModelParams(n=2, m1=1, m2=2, m3=1, chi=1, xi=1, lam=1, mu=1,
                        k=1.5, alpha=1, beta=0.5)
        with pytest.raises(RegimeError):
            compare_with_linear_sensitivity(p)

    def test_report_marks_not_comparable(self, blowup_params):
        from dataclasses import replace
        report = check_assumptions(replace(blowup_params, m2=2.0, m3=2.0))
        assert report.improvement_over_linear_sensitivity == "not_comparable"
