"""Parameter validation, assumption checking and derived-exponent computation.

All comparisons stay exact when the inputs are `fractions.Fraction` (or int):
structural rationals such as 2/n are built with Fraction so that rational
inputs propagate unchanged.  Float inputs degrade gracefully to float
arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ExponentInequalityViolation,
    InvalidParameter,
    RegimeError,
)

__all__ = [
    "ModelParams",
    "ProductionLaw",
    "PowerLawProduction",
    "TabulatedProduction",
    "RegimeReport",
    "ExponentSet",
    "validate_params",
    "check_assumptions",
    "compute_pfrak",
    "compute_pbar",
    "pbar_entries",
    "compute_exponents",
    "compare_with_linear_sensitivity",
    "admissible_value",
    "unit_ball_volume",
]

#: relative margin turning an infimum into an admissible strict value
DEFAULT_MARGIN = Fraction(1, 1000)

#: comparison slack for float-valued equality checks
EQ_TOL = 1e-12


def unit_ball_volume(n: int) -> float:
    """Lebesgue measure of the unit ball in R^n."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def _frac2(num: int, den) -> Fraction | float:
    """num/den as a Fraction when den is integral, else a float."""
    if isinstance(den, (int, np.integer)):
        return Fraction(num, int(den))
    return num / den


def admissible_value(infimum, margin=DEFAULT_MARGIN):
    """Turn an infimum into a strictly admissible value, preserving exactness.

    The relative margin keeps Fraction inputs rational; infima here are
    always positive (p-type exponents exceed 1).
    """
    return infimum * (1 + margin)


@dataclass(frozen=True)
class ModelParams:
    """Physical and structural constants of the governing system.

    Fields accept float, int or Fraction; Fractions enable the exact
    rational path of the regime checks.
    """

    n: int
    m1: float
    m2: float
    m3: float
    chi: float
    xi: float
    lam: float
    mu: float
    k: float
    alpha: float
    beta: float
    k1: float = 1.0
    k2: float = 1.0
    k3: float = 1.0
    R: float = 1.0

    @property
    def domain_measure(self) -> float:
        """|Omega| = omega_n R^n / n for the ball of radius R."""
        return unit_ball_volume(self.n) * float(self.R) ** self.n

    @property
    def omega_n(self) -> float:
        """omega_n = n |B_1(0)|, the surface factor of radial integrals."""
        return self.n * unit_ball_volume(self.n)

    @property
    def two_over_n(self):
        return _frac2(2, self.n)


def validate_params(raw: ModelParams) -> ModelParams:
    """Return ``raw`` unchanged iff every structural constraint holds.

    Raises InvalidParameter naming the first violated constraint.
    """
    if not isinstance(raw.n, (int, np.integer)) or raw.n < 1:
        raise InvalidParameter("n must be a positive integer")
    for name in ("chi", "xi", "lam", "mu", "alpha", "beta", "k1", "k2", "k3", "R"):
        value = getattr(raw, name)
        if not _finite(value) or value <= 0:
            raise InvalidParameter(f"{name} must be positive")
    if not _finite(raw.k) or raw.k <= 1:
        raise InvalidParameter("k must exceed 1")
    for name in ("m1", "m2", "m3"):
        if not _finite(getattr(raw, name)):
            raise InvalidParameter(f"{name} must be finite")
    measure = raw.domain_measure
    closed_form = math.pi ** (raw.n / 2.0) / math.gamma(raw.n / 2.0 + 1.0) * float(raw.R) ** raw.n
    if not math.isclose(measure, closed_form, rel_tol=EQ_TOL):
        raise InvalidParameter("domain_measure inconsistent with ball volume")
    return raw


def _finite(x) -> bool:
    try:
        return math.isfinite(float(x))
    except (TypeError, OverflowError, ValueError):
        return False


class ProductionLaw:
    """Signal production pair (f1, f2); f1 drives attraction, f2 repulsion."""

    kind = "abstract"

    def f1(self, s):
        raise NotImplementedError

    def f2(self, s):
        raise NotImplementedError

    def validate(self, params: ModelParams, samples: Optional[np.ndarray] = None) -> None:
        """Sample-check nonnegativity, monotonicity and the power-law envelopes."""
        if samples is None:
            samples = np.concatenate([[0.0], np.geomspace(1e-6, 1e6, 121)])
        f1 = np.asarray(self.f1(samples), dtype=float)
        f2 = np.asarray(self.f2(samples), dtype=float)
        if np.any(f1 < 0) or np.any(f2 < 0):
            raise InvalidParameter("production laws must be nonnegative")
        if np.any(np.diff(f1) < -EQ_TOL * np.abs(f1[:-1])) or np.any(
            np.diff(f2) < -EQ_TOL * np.abs(f2[:-1])
        ):
            raise InvalidParameter("production laws must be nondecreasing")
        k2, k3 = float(params.k2), float(params.k3)
        alpha, beta = float(params.alpha), float(params.beta)
        lower = k3 * (samples + 1.0) ** alpha
        upper = k2 * (samples + 1.0) ** beta
        if np.any(f1 < lower * (1.0 - 1e-9)):
            raise InvalidParameter("f1 must dominate k3*(s+1)^alpha")
        if np.any(f2 > upper * (1.0 + 1e-9)):
            raise InvalidParameter("f2 must stay below k2*(s+1)^beta")


class PowerLawProduction(ProductionLaw):
    """Exact power laws f1 = k3 (s+1)^alpha, f2 = k2 (s+1)^beta (so k1 = k3)."""

    kind = "power_law_exact"

    def __init__(self, params: ModelParams):
        self.k3 = float(params.k3)
        self.k2 = float(params.k2)
        self.alpha = float(params.alpha)
        self.beta = float(params.beta)

    def f1(self, s):
        return self.k3 * (np.asarray(s, dtype=float) + 1.0) ** self.alpha

    def f2(self, s):
        return self.k2 * (np.asarray(s, dtype=float) + 1.0) ** self.beta


class TabulatedProduction(ProductionLaw):
    """Piecewise-linear production laws given on a sample grid.

    Extrapolates with the last slope; intended for experimentation with
    non-power laws that still satisfy the envelope conditions.
    """

    kind = "custom_tabulated"

    def __init__(self, s: Sequence[float], f1: Sequence[float], f2: Sequence[float]):
        self.s = np.asarray(s, dtype=float)
        self._f1 = np.asarray(f1, dtype=float)
        self._f2 = np.asarray(f2, dtype=float)
        if self.s.ndim != 1 or np.any(np.diff(self.s) <= 0):
            raise InvalidParameter("tabulated s-grid must be strictly increasing")
        if self.s[0] != 0.0:
            raise InvalidParameter("tabulated s-grid must start at 0")

    def _interp(self, table, s):
        s = np.asarray(s, dtype=float)
        core = np.interp(s, self.s, table)
        # linear extension beyond the table keeps monotone laws monotone
        slope = (table[-1] - table[-2]) / (self.s[-1] - self.s[-2])
        out = np.where(s > self.s[-1], table[-1] + slope * (s - self.s[-1]), core)
        return out

    def f1(self, s):
        return self._interp(self._f1, s)

    def f2(self, s):
        return self._interp(self._f2, s)


@dataclass(frozen=True)
class AssumptionVerdict:
    holds: bool
    detail: str

    def __bool__(self) -> bool:  # pragma: no cover - convenience
        return self.holds


@dataclass(frozen=True)
class RegimeReport:
    """Verdicts of the five structural assumptions plus derived classifications."""

    h1: AssumptionVerdict
    h2: AssumptionVerdict
    h3: AssumptionVerdict
    h4: AssumptionVerdict
    h5: AssumptionVerdict
    blowup_predicted: bool
    improvement_over_linear_sensitivity: str  # same | strictly_larger | not_comparable

    @property
    def lp_theory_applicable(self) -> bool:
        """Hypotheses of the L^p coincidence theory: h1 plus one of h2..h4."""
        return self.h1.holds and (self.h2.holds or self.h3.holds or self.h4.holds)

    def to_dict(self) -> dict:
        return {
            "h1": {"holds": self.h1.holds, "detail": self.h1.detail},
            "h2": {"holds": self.h2.holds, "detail": self.h2.detail},
            "h3": {"holds": self.h3.holds, "detail": self.h3.detail},
            "h4": {"holds": self.h4.holds, "detail": self.h4.detail},
            "h5": {"holds": self.h5.holds, "detail": self.h5.detail},
            "lp_theory_applicable": self.lp_theory_applicable,
            "blowup_predicted": self.blowup_predicted,
            "improvement_over_linear_sensitivity": self.improvement_over_linear_sensitivity,
        }

    def to_text(self) -> str:
        lines = []
        for name in ("h1", "h2", "h3", "h4", "h5"):
            verdict = getattr(self, name)
            status = "holds" if verdict.holds else "FAILS"
            lines.append(f"({name.upper()}) {status}: {verdict.detail}")
        lines.append(f"L^p theory applicable (H1 and one of H2-H4): {self.lp_theory_applicable}")
        lines.append(f"blow-up predicted: {self.blowup_predicted}")
        lines.append(f"vs. linear-sensitivity criterion: {self.improvement_over_linear_sensitivity}")
        return "\n".join(lines)


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return f"{float(x):.6g}"


def check_assumptions(p: ModelParams) -> RegimeReport:
    """Evaluate assumptions H1-H5 exactly as stated.

    H1: m2+a > m1 + 2/n                               (strict)
    H2: b > 0 and m2+a > max{1, m3+b}                 (strict)
    H3: b > 0 and m2+a >= m3+b and m1 > 1 - 2/n       (>= as written)
    H4: 0 < b <= 1 and m1 > 1 - 2/n and (m3 <= 1 or m2+a >= m3)
    H5: a > b and m2+a > max{m1 + 2k/n, k}  (m1 >= 0)
                  m2+a > max{2k/n, k}       (m1 <  0)
    """
    validate_params(p)
    m1, m2, m3 = p.m1, p.m2, p.m3
    alpha, beta, k, n = p.alpha, p.beta, p.k, p.n
    two_n = _frac2(2, n)
    ma = m2 + alpha

    h1 = AssumptionVerdict(
        ma > m1 + two_n, f"m2+alpha = {_fmt(ma)} vs m1 + 2/n = {_fmt(m1 + two_n)}"
    )
    h2 = AssumptionVerdict(
        ma > max(1, m3 + beta),
        f"m2+alpha = {_fmt(ma)} vs max(1, m3+beta) = {_fmt(max(1, m3 + beta))}",
    )
    h3 = AssumptionVerdict(
        ma >= m3 + beta and m1 > 1 - two_n,
        f"m2+alpha = {_fmt(ma)} >= m3+beta = {_fmt(m3 + beta)}"
        f" and m1 = {_fmt(m1)} vs 1 - 2/n = {_fmt(1 - two_n)}",
    )
    h4 = AssumptionVerdict(
        beta <= 1 and m1 > 1 - two_n and (m3 <= 1 or ma >= m3),
        f"beta = {_fmt(beta)} <= 1, m1 = {_fmt(m1)} vs 1 - 2/n = {_fmt(1 - two_n)},"
        f" m3 = {_fmt(m3)} <= 1 or m2+alpha >= m3",
    )
    k2n = k * two_n
    if m1 >= 0:
        h5_bound = max(m1 + k2n, k)
        h5_case = "m1 >= 0: max(m1 + 2k/n, k)"
    else:
        h5_bound = max(k2n, k)
        h5_case = "m1 < 0: max(2k/n, k)"
    h5 = AssumptionVerdict(
        alpha > beta and ma > h5_bound,
        f"alpha = {_fmt(alpha)} vs beta = {_fmt(beta)};"
        f" m2+alpha = {_fmt(ma)} vs {h5_case} = {_fmt(h5_bound)}",
    )

    blowup_predicted = bool(h5.holds and m2 == m3 and m2 > 0)
    if m2 == 1 and m3 == 1:
        improvement = compare_with_linear_sensitivity(p)
    else:
        improvement = "not_comparable"
    return RegimeReport(h1, h2, h3, h4, h5, blowup_predicted, improvement)


def compute_pfrak(p: ModelParams):
    """Infimum of the critical Lebesgue exponent, n (m2 - m1 + alpha) / 2.

    Callers choose any strictly larger value (see ``admissible_value``).
    Raises RegimeError when H1 fails, since the infimum only exceeds 1
    under H1.
    """
    report = check_assumptions(p)
    if not report.h1.holds:
        raise RegimeError("H1 fails: " + report.h1.detail)
    return _frac2(p.n, 2) * (p.m2 - p.m1 + p.alpha)


def pbar_entries(p: ModelParams, pfrak_choice) -> dict:
    """The nine candidate lower bounds whose max defines the p-bar infimum."""
    n = p.n
    n2n1 = (n + 2) * (n + 1)
    return {
        "pfrak": pfrak_choice,
        "1-m1(n+2)": 1 - p.m1 * (n + 2),
        "1-m2": 1 - p.m2,
        "1-m3": 1 - p.m3,
        "2-m1-2/n": 2 - p.m1 - _frac2(2, n),
        "n*alpha": n * p.alpha,
        "n*beta": n * p.beta,
        "m2(n+2)(n+1)": p.m2 * n2n1,
        "m3(n+2)(n+1)": p.m3 * n2n1,
    }


def compute_pbar(p: ModelParams, pfrak_choice):
    """Infimum of the working exponent (max of the nine-entry list)."""
    value, _ = compute_pbar_detail(p, pfrak_choice)
    return value


def compute_pbar_detail(p: ModelParams, pfrak_choice):
    """As compute_pbar, also returning the name of the binding entry."""
    report = check_assumptions(p)
    if not report.lp_theory_applicable:
        raise RegimeError(
            "p-bar requires H1 and one of H2-H4; report:\n" + report.to_text()
        )
    if pfrak_choice <= compute_pfrak(p):
        raise RegimeError("pfrak_choice must strictly exceed the pfrak infimum")
    entries = pbar_entries(p, pfrak_choice)
    name = max(entries, key=lambda key: entries[key])
    return entries[name], name


@dataclass(frozen=True)
class ExponentSet:
    """Derived exponents of the L^p energy analysis at a chosen (pfrak, p)."""

    p_frak: float
    p_bar: float
    p: float
    sigma: float
    sigma_hat: float
    theta: float
    theta_hat: float
    theta_bar: float
    odi_gamma: float
    odi_delta: float
    relations: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "p_frak": float(self.p_frak),
            "p_bar": float(self.p_bar),
            "p": float(self.p),
            "sigma": float(self.sigma),
            "sigma_hat": float(self.sigma_hat),
            "theta": float(self.theta),
            "theta_hat": float(self.theta_hat),
            "theta_bar": float(self.theta_bar),
            "odi_gamma": float(self.odi_gamma),
            "odi_delta": float(self.odi_delta),
        }


def exponent_relations(p: ModelParams, pfrak_choice, p_choice, exp: "ExponentSet") -> dict:
    """Evaluate every relation the derived exponents must satisfy.

    Returns {name: (ok, detail)}.  The three ratio relations that the
    limit cases allow to reach 1 are tested non-strictly.
    """
    n, m1, m2, m3 = p.n, p.m1, p.m2, p.m3
    alpha, beta = p.alpha, p.beta
    q = p_choice + m2 + alpha - 1
    checks = {}

    def strict_open(name, value):
        checks[name] = (0 < value < 1, f"{name} = {_fmt(value)} must lie in (0,1)")

    def half_open(name, value):
        checks[name] = (0 < value <= 1, f"{name} = {_fmt(value)} must lie in (0,1]")

    checks["p>n(1-m1)/2"] = (
        p_choice > _frac2(n, 2) * (1 - m1),
        f"p = {_fmt(p_choice)} vs n(1-m1)/2 = {_fmt(_frac2(n, 2) * (1 - m1))}",
    )
    strict_open("theta", exp.theta)
    strict_open("sigma*theta/2", exp.sigma * exp.theta / 2)
    strict_open("theta_hat", exp.theta_hat)
    # sigma_hat*theta_hat/2 < 1 is equivalent to m1 > 1 - 2/n for every p,
    # and is only invoked under the assumptions that carry that condition
    if m1 > 1 - _frac2(2, n):
        strict_open("sigma_hat*theta_hat/2", exp.sigma_hat * exp.theta_hat / 2)
    else:
        checks["sigma_hat*theta_hat/2"] = (
            True,
            "not required: m1 <= 1 - 2/n, so the relation is not claimed",
        )
    ratio1 = (p_choice + m3 - 1) / q
    ratio2 = beta / q
    half_open("(p+m3-1)/(p+m2+a-1)", ratio1)
    strict_open("beta/(p+m2+a-1)", ratio2)
    # the ratio-sum bound is equivalent to m2+alpha >= m3+beta for every p
    # and is only required on the branches where that condition holds
    if m2 + alpha >= m3 + beta:
        half_open("ratio-sum", ratio1 + ratio2)
    else:
        checks["ratio-sum"] = (
            True, "not required: m2+alpha < m3+beta, so the bound is not claimed")
    strict_open("p/(p+m2+a-1)", p_choice / q)
    checks["odi gamma>delta>1"] = (
        exp.odi_gamma > exp.odi_delta > 1,
        f"gamma = {_fmt(exp.odi_gamma)}, delta = {_fmt(exp.odi_delta)}",
    )
    strict_open("theta_bar", exp.theta_bar)
    strict_open("sigma*theta_bar/2", exp.sigma * exp.theta_bar / 2)
    # (p+m3-1)/p <= 1 is equivalent to m3 <= 1 for every p and is invoked
    # only on that branch; its positivity holds from p > 1-m3 regardless
    last = (p_choice + m3 - 1) / p_choice
    if m3 <= 1:
        half_open("(p+m3-1)/p", last)
    else:
        checks["(p+m3-1)/p"] = (
            last > 0,
            f"(p+m3-1)/p = {_fmt(last)} must be positive"
            " (upper bound not claimed: m3 > 1)")
    return checks


def compute_exponents(
    p: ModelParams, pfrak_choice, p_choice, verify: bool = True
) -> ExponentSet:
    """Closed-form derived exponents at the chosen (pfrak, p).

    With ``verify`` (default) every required relation is re-checked and an
    ExponentInequalityViolation listing the failures is raised; a failure
    signals a caller bug or a regime violation rather than a data error.
    """
    m1, m2, alpha, n = p.m1, p.m2, p.alpha, p.n
    pm = p_choice + m1 - 1
    q = p_choice + m2 + alpha - 1
    half = _frac2(1, 2)
    one_n = _frac2(1, n)

    sigma = 2 * q / pm
    sigma_hat = 2 * p_choice / pm
    theta = (pm / (2 * pfrak_choice) - pm / (2 * q)) / (
        pm / (2 * pfrak_choice) + one_n - half
    )
    theta_hat = (pm * half - pm / (2 * p_choice)) / (pm * half + one_n - half)
    theta_bar = (pm / (2 * p_choice) - pm / (2 * q)) / (
        pm / (2 * p_choice) + one_n - half
    )
    head = (m1 - m2 - alpha) * half + p_choice * one_n
    odi_gamma = (head + (m2 + alpha - 1) * one_n) / head
    odi_delta = q / p_choice

    exponents = ExponentSet(
        p_frak=pfrak_choice,
        p_bar=max(pbar_entries(p, pfrak_choice).values()),
        p=p_choice,
        sigma=sigma,
        sigma_hat=sigma_hat,
        theta=theta,
        theta_hat=theta_hat,
        theta_bar=theta_bar,
        odi_gamma=odi_gamma,
        odi_delta=odi_delta,
        relations={},
    )
    checks = exponent_relations(p, pfrak_choice, p_choice, exponents)
    exponents.relations.update(checks)
    if verify:
        failures = [detail for ok, detail in checks.values() if not ok]
        if failures:
            raise ExponentInequalityViolation(failures)
    return exponents


def compare_with_linear_sensitivity(p: ModelParams) -> str:
    """Classify the blow-up condition against the linear-sensitivity criterion.

    Only defined for m2 = m3 = 1.  Returns "same" when the two admissible
    alpha-ranges coincide and "strictly_larger" when ours is strictly wider;
    the ranges are always nested, so "not_comparable" never arises here.
    """
    if p.m2 != 1 or p.m3 != 1:
        raise RegimeError("comparison requires m2 = m3 = 1")
    m1, n, k = p.m1, p.n, p.k
    if m1 >= 1:
        return "same"
    # thresholds coincide exactly when k(n-2) >= n (both reduce to k-1)
    if n <= 2 or k * (n - 2) < n:
        return "strictly_larger"
    return "same"
