"""Blow-up experiments: initial-data construction, runs, and verification.

The pipeline follows the constructive route to unbounded solutions: pick
the moment exponent from the admissible interval, select the truncation s0
and the concentration pair (eps0, s_star), build a concentrated
nonincreasing initial profile of prescribed mass, integrate the reduced
system, and check every property the analysis guarantees along the
trajectory.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    InfeasibleSpec,
    InsufficientSamples,
    InvalidParameter,
    ModelError,
    RegimeError,
    SearchExhausted,
    VerdictFailure,
)
from .functionals import (
    FunctionalObserver,
    FunctionalSeries,
    MassAccumulation,
    MomentConfig,
    admissible_gamma_interval,
    moment_phi,
    signal_mean_gap,
)
from .grid import RadialGrid
from .regimes import (
    ModelParams,
    PowerLawProduction,
    ProductionLaw,
    admissible_value,
    check_assumptions,
    compute_exponents,
    compute_pbar,
    compute_pfrak,
    validate_params,
)
from .solver import RunResult, StepperConfig, run

logger = logging.getLogger(__name__)

__all__ = [
    "InitialDataSpec",
    "ExperimentConfig",
    "ExperimentReport",
    "critical_mass",
    "select_s0",
    "select_eps_sstar",
    "build_concentrated_u0",
    "run_blowup_experiment",
    "verify_lp_growth",
    "verify_superlinear_odi",
    "sandwich_gap",
]


def critical_mass(params: ModelParams) -> float:
    """C = (lambda/mu * |Omega|^(k-1))^(1/(k-1)), the logistic mass scale."""
    lam, mu, k = float(params.lam), float(params.mu), float(params.k)
    return (lam / mu * params.domain_measure ** (k - 1.0)) ** (1.0 / (k - 1.0))


def smallness_exponent(params: ModelParams,
                       eps_m1zero: Optional[float] = None) -> float:
    """Exponent E of the truncation smallness condition s0^E <= rhs.

    E = m2+a - (2/n)(m2+a)/(m2+a-m1) for m1 > 0; for m1 = 0 a small
    eps replaces m1 in the ratio; for m1 < 0 the ratio collapses to 1.
    E <= 0 signals an attraction-regime violation.
    """
    m1 = float(params.m1)
    ma = float(params.m2) + float(params.alpha)
    n = params.n
    if m1 > 0:
        E = ma - (2.0 / n) * ma / (ma - m1)
    elif m1 == 0:
        eps = eps_m1zero if eps_m1zero is not None else 1e-3 * ma
        E = ma - (2.0 / n) * ma / (ma - eps)
    else:
        E = ma - 2.0 / n
    if E <= 0:
        raise RegimeError(
            f"smallness exponent {E:.6g} is nonpositive; attraction regime violated")
    return E


def _smallness_rhs(params: ModelParams, M: float, moment_gamma: float,
                   c30_c31_ratio: float) -> float:
    ma = float(params.m2) + float(params.alpha)
    gamma = float(moment_gamma)
    return 0.5 * c30_c31_ratio * (
        M / (2.0 * (1.0 - gamma) * (2.0 - gamma) * params.omega_n)) ** ma


def select_s0(params: ModelParams, M: float, moment_gamma: float,
              c30_c31_ratio: float = 1.0,
              eps_m1zero: Optional[float] = None) -> float:
    """Truncation parameter: min of R^n/6, M/2 and the smallness root.

    The smallness condition reads s0^E <= (ratio/2) *
    (M / (2(1-gamma)(2-gamma) omega_n))^(m2+alpha) with E from
    ``smallness_exponent``.
    """
    validate_params(params)
    if c30_c31_ratio <= 0:
        raise InvalidParameter("c30_c31_ratio must be positive")
    E = smallness_exponent(params, eps_m1zero)
    rhs = _smallness_rhs(params, M, moment_gamma, c30_c31_ratio)
    s0_root = rhs ** (1.0 / E)
    return min(float(params.R) ** params.n / 6.0, M / 2.0, s0_root)


def _weight_bracket(s_star: float, s0: float, gamma: float) -> float:
    """int_{s_star}^{s0} s^{-gamma} (s0 - s) ds in closed form."""
    return s0 ** (2.0 - gamma) / ((1.0 - gamma) * (2.0 - gamma)) \
        - s_star ** (1.0 - gamma) * s0 / (1.0 - gamma) \
        + s_star ** (2.0 - gamma) / (2.0 - gamma)


def select_eps_sstar(M0: float, s0: float, moment_gamma: float, omega_n: float,
                     margin: Optional[float] = None, max_halvings: int = 200):
    """Shrink (eps0, s_star) geometrically until the concentration condition
    (M0-eps0)/omega_n * int_{s*}^{s0} s^{-gamma}(s0-s) ds exceeds the
    membership threshold with relative headroom ``margin``.

    The achievable headroom is capped by s0/(M0-s0) (the eps0, s_star -> 0
    limit), so the default margin is half of that cap, at most 1%.
    """
    if not M0 > s0:
        raise InvalidParameter("need M0 > s0 (ensured by M0 > C and s0 <= M0/2)")
    gamma = float(moment_gamma)
    if margin is None:
        margin = min(0.01, 0.5 * s0 / (M0 - s0))
    rhs = (M0 - s0) * s0 ** (2.0 - gamma) / ((1.0 - gamma) * (2.0 - gamma) * omega_n)
    eps0, s_star = s0 / 4.0, s0 / 2.0
    for _ in range(max_halvings):
        lhs = (M0 - eps0) / omega_n * _weight_bracket(s_star, s0, gamma)
        if lhs > rhs * (1.0 + margin):
            return eps0, s_star
        eps0 *= 0.5
        s_star *= 0.5
    raise SearchExhausted(
        f"no admissible (eps0, s_star) after {max_halvings} halvings")


@dataclass(frozen=True)
class InitialDataSpec:
    """Concentrated nonincreasing initial profile of prescribed mass."""

    M0: float
    r_star: float
    eps0: float
    profile: str = "plateau_bump"        # plateau_bump | gaussian_bump | custom
    core_fraction: float = 0.6           # plateau extent relative to r_star
    height_cap: Optional[float] = None
    custom_profile: Optional[object] = None   # callable r -> shape, for custom

    def validate(self) -> "InitialDataSpec":
        if self.M0 <= 0 or self.eps0 <= 0 or self.r_star <= 0:
            raise InvalidParameter("M0, eps0 and r_star must be positive")
        if not (0 < self.core_fraction < 1):
            raise InvalidParameter("core_fraction must lie in (0,1)")
        if self.profile not in ("plateau_bump", "gaussian_bump", "custom"):
            raise InvalidParameter(f"unknown profile {self.profile!r}")
        if self.profile == "custom" and not callable(self.custom_profile):
            raise InvalidParameter("custom profile needs a callable shape")
        return self


def build_concentrated_u0(spec: InitialDataSpec, grid: RadialGrid) -> np.ndarray:
    """Radially nonincreasing u0 with quadrature mass exactly M0 and at
    least M0 - eps0 of it inside the ball of radius r_star."""
    spec.validate()
    r = grid.r_centers
    if spec.r_star >= grid.R:
        raise InfeasibleSpec("r_star must lie strictly inside the domain")
    if spec.profile == "plateau_bump":
        r_core = spec.core_fraction * spec.r_star
        shape = np.where(
            r <= r_core, 1.0,
            np.where(r < spec.r_star,
                     0.5 * (1.0 + np.cos(np.pi * (r - r_core)
                                         / max(spec.r_star - r_core, 1e-300))),
                     0.0))
    elif spec.profile == "gaussian_bump":
        sigma = spec.r_star / 3.0
        for _ in range(60):
            shape = np.exp(-0.5 * (r / sigma) ** 2)
            inside = grid.omega_n * float(
                np.sum(grid.weights[r < spec.r_star] * shape[r < spec.r_star]))
            total = grid.omega_n * float(np.sum(grid.weights * shape))
            if total > 0 and inside / total >= 1.0 - spec.eps0 / spec.M0:
                break
            sigma *= 0.8
        else:
            raise InfeasibleSpec("could not concentrate the gaussian inside r_star")
    else:
        shape = np.asarray(spec.custom_profile(r), dtype=float)
        if np.any(shape < 0) or np.any(np.diff(shape) > 1e-12 * np.max(shape)):
            raise InfeasibleSpec("custom shape must be nonnegative and nonincreasing")
    weight = grid.omega_n * float(np.sum(grid.weights * shape))
    if weight <= 0:
        raise InfeasibleSpec("profile carries no mass on this grid")
    height = spec.M0 / weight
    if spec.height_cap is not None and height > spec.height_cap:
        raise InfeasibleSpec(
            f"required height {height:.3g} exceeds cap {spec.height_cap:.3g}")
    u0 = height * shape

    mass = grid.integrate(u0)
    if abs(mass - spec.M0) > 1e-10 * spec.M0:
        raise InfeasibleSpec("mass calibration failed")
    inside = grid.omega_n * float(
        np.sum(grid.weights[r < spec.r_star] * u0[r < spec.r_star]))
    if inside < spec.M0 - spec.eps0 * (1.0 + 1e-12):
        raise InfeasibleSpec(
            f"only {inside:.6g} of {spec.M0:.6g} inside r_star; eps0={spec.eps0:.3g}")
    if np.any(np.diff(u0) > 1e-12 * np.max(u0)):
        raise InfeasibleSpec("constructed profile is not radially nonincreasing")
    return u0


def verify_lp_growth(times, series, pfrak: float, mass_bound: float,
                    growth_factor_min: float = 100.0) -> dict:
    """Per-p growth verdicts of the L^p coincidence property.

    Growth is measured on int_Omega u^p (the p-th power of the recorded
    norm) between the first-quartile sample and the last one; p = 1 must
    stay within the mass bound instead.
    """
    verdicts = {}
    mass = np.asarray(series["mass"], dtype=float)
    mass_ok = bool(np.nanmax(mass) <= mass_bound * (1.0 + 1e-6))
    verdicts["1"] = {"p": 1.0, "bounded": mass_ok, "max_mass": float(np.nanmax(mass)),
                     "pass": mass_ok}
    for key, values in series.items():
        if not key.startswith("lp_"):
            continue
        p = float(key[3:])
        if p == 1.0:
            continue
        vals = np.asarray(values, dtype=float) ** p
        finite = vals[np.isfinite(vals)]
        if len(finite) < 8:
            verdicts[f"{p:g}"] = {"p": p, "pass": False, "reason": "too few samples"}
            continue
        q1 = finite[len(finite) // 4]
        growth = float(finite[-1] / max(q1, 1e-300))
        entry = {"p": p, "growth": growth}
        if p > pfrak:
            entry["pass"] = growth >= growth_factor_min
        else:
            entry["pass"] = True        # no growth requirement at or below pfrak
            entry["note"] = "p <= pfrak: growth not required"
        verdicts[f"{p:g}"] = entry
    return verdicts


def verify_superlinear_odi(t, phi, in_sphi, exponent: float, s0: float, moment_gamma: float,
                coverage: float = 0.99, min_samples: int = 20):
    """Largest c >= 0 with phi' >= c s0^{-(3-gamma)(e-1)} phi^e at >= coverage
    of the membership samples; returns (c, violations, n_samples)."""
    t = np.asarray(t, dtype=float)
    phi = np.asarray(phi, dtype=float)
    member = np.asarray(in_sphi, dtype=float) > 0.5
    member &= np.isfinite(phi)
    t_m, phi_m = t[member], phi[member]
    if len(t_m) < min_samples:
        raise InsufficientSamples(
            f"need {min_samples} membership samples, got {len(t_m)}")
    dphi = (phi_m[2:] - phi_m[:-2]) / (t_m[2:] - t_m[:-2])
    factor = s0 ** (-(3.0 - moment_gamma) * (exponent - 1.0))
    denom = factor * phi_m[1:-1] ** exponent
    ratios = dphi / denom
    m = len(ratios)
    need = int(np.ceil(coverage * m))
    c = max(0.0, float(np.sort(ratios)[m - need]))
    violations = int(np.sum(ratios < c))
    return c, violations, m


def sandwich_gap(params: ModelParams, production: ProductionLaw, s_max: float,
                 n_samples: int = 512) -> float:
    """Largest violation of (chi/2) f1 - c9 <= f <= chi f1 on [0, s_max]."""
    chi, xi = float(params.chi), float(params.xi)
    from .functionals import sandwich_constant
    c9 = sandwich_constant(params)
    s = np.concatenate([[0.0], np.geomspace(1e-6, max(s_max, 1e-6), n_samples)])
    f1 = np.asarray(production.f1(s), dtype=float)
    f2 = np.asarray(production.f2(s), dtype=float)
    f = chi * f1 - xi * f2
    lower_gap = np.max((0.5 * chi * f1 - c9) - f)
    upper_gap = np.max(f - chi * f1)
    return float(max(lower_gap, upper_gap))


@dataclass
class ExperimentConfig:
    """Numerical choices of a blow-up experiment; model comes from ModelParams.

    Unset fields are auto-selected for grid resolvability: the moment
    exponent sits near the low end of its admissible interval (milder
    endpoint weight, so the concentration radius stays several cells
    wide), the unconstructive smallness ratio is raised until the
    geometric cap min(R^n/6, M/2) binds s0, and the blow-up threshold is
    a fixed fraction of the largest density the grid can represent.
    """

    N: int = 2048
    M0: Optional[float] = None              # default M0_factor * critical mass
    M0_factor: float = 2.0
    t_end: float = 1.0
    blowup_threshold: Optional[float] = None
    capacity_fraction: float = 0.8          # auto threshold vs grid capacity
    dt_init: float = 1e-7
    dt_min: float = 1e-13
    dt_max: float = 1e-3
    cfl_safety: float = 0.6
    profile: str = "plateau_bump"
    core_fraction: float = 0.9
    c30_c31_ratio: Optional[float] = None   # default: smallest ratio capping s0
    growth_factor_min: float = 100.0
    moment_gamma: Optional[float] = None    # default: low end of the interval
    gamma_offset: float = 0.04              # relative offset into the interval
    condint_margin: Optional[float] = None  # default: adaptive headroom
    sample_growth: float = 1.08
    height_cap: Optional[float] = None
    monotone_tol: float = 1e-8
    concavity_tol_factor: float = 1e-6
    mean_bound_tol: float = 1e-9


@dataclass
class ExperimentReport:
    params: ModelParams
    regime: object
    selected: dict
    exponents: dict
    run_status: str
    T_blowup_observed: Optional[float]
    lp_growth_verdict: dict
    superlinearity_verdict: dict
    phi0_value: float
    phi0_threshold: float
    phi_monotone_max_drop: float
    concavity_max: float
    concavity_tol: float
    sandwich_violation: float
    mean_bound_gap: float
    failures: list = field(default_factory=list)
    run_result: Optional[RunResult] = field(default=None, repr=False)
    grid: Optional[RadialGrid] = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.to_dict(),
            "selected": self.selected,
            "exponents": self.exponents,
            "run_status": self.run_status,
            "T_blowup_observed": self.T_blowup_observed,
            "lp_growth": self.lp_growth_verdict,
            "superlinearity": self.superlinearity_verdict,
            "phi0_value": self.phi0_value,
            "phi0_threshold": self.phi0_threshold,
            "phi_monotone_max_drop": self.phi_monotone_max_drop,
            "concavity_max": self.concavity_max,
            "concavity_tol": self.concavity_tol,
            "sandwich_violation": self.sandwich_violation,
            "mean_bound_gap": self.mean_bound_gap,
            "failures": list(self.failures),
            "passed": self.passed,
        }

    def to_text(self) -> str:
        lines = ["blow-up experiment report", "=" * 32]
        lines.append(self.regime.to_text())
        lines.append("")
        lines.append("selected parameters:")
        for key, value in self.selected.items():
            lines.append(f"  {key} = {value:.12g}" if isinstance(value, float)
                         else f"  {key} = {value}")
        lines.append("")
        lines.append(f"run status: {self.run_status}")
        if self.T_blowup_observed is not None:
            lines.append(f"declared blow-up time: {self.T_blowup_observed:.12g}")
        lines.append(f"phi(0) = {self.phi0_value:.12g} vs threshold "
                     f"{self.phi0_threshold:.12g}")
        lines.append(f"max phi drop inside S_phi: {self.phi_monotone_max_drop:.3e}")
        lines.append(f"max U_ss (tol {self.concavity_tol:.3e}): {self.concavity_max:.3e}")
        lines.append(f"sandwich violation: {self.sandwich_violation:.3e}")
        lines.append(f"signal-mean bound gap: {self.mean_bound_gap:.3e}")
        lines.append("L^p growth verdicts:")
        for key, entry in sorted(self.lp_growth_verdict.items(), key=lambda kv: float(kv[0])):
            lines.append(f"  p={key}: {entry}")
        lines.append(f"superlinearity fit: {self.superlinearity_verdict}")
        lines.append("verdict: " + ("PASS" if self.passed else
                                    "FAIL: " + "; ".join(self.failures)))
        return "\n".join(lines)


def run_blowup_experiment(params: ModelParams,
                          production: Optional[ProductionLaw] = None,
                          config: Optional[ExperimentConfig] = None,
                          raise_on_failure: bool = True) -> ExperimentReport:
    """Construct, run and verify one blow-up experiment.

    Raises VerdictFailure (with the report attached as ``.report``) when a
    guaranteed property fails, unless ``raise_on_failure`` is False.
    """
    validate_params(params)
    production = production or PowerLawProduction(params)
    production.validate(params)
    cfg = config or ExperimentConfig()

    regime = check_assumptions(params)
    if not regime.h5.holds:
        raise RegimeError("blow-up experiment requires H5:\n" + regime.h5.detail)
    if params.m2 != params.m3 or params.m2 <= 0:
        raise ModelError("blow-up experiment requires m2 = m3 > 0")
    C = critical_mass(params)
    M0 = cfg.M0 if cfg.M0 is not None else cfg.M0_factor * C
    if not M0 > C:
        raise InvalidParameter(f"M0 = {M0:.6g} must exceed the critical mass {C:.6g}")
    M = max(M0, C)

    low, high = admissible_gamma_interval(params)
    if not low < high:
        raise RegimeError(
            f"empty admissible moment-exponent interval: low={low:.6g} >= high={high:.6g}")
    gamma = cfg.moment_gamma if cfg.moment_gamma is not None \
        else low + cfg.gamma_offset * (high - low)

    ratio = cfg.c30_c31_ratio
    if ratio is None:
        # smallest ratio for which the geometric cap binds s0: the ratio is
        # unconstructive, so prefer the least concentrated admissible data
        cap = min(float(params.R) ** params.n / 6.0, M / 2.0)
        E = smallness_exponent(params)
        rhs_unit = _smallness_rhs(params, M, gamma, 1.0)
        ratio = max(1.0, cap ** E / rhs_unit * (1.0 + 1e-9))
    s0 = select_s0(params, M, gamma, ratio)
    eps0, s_star = select_eps_sstar(M0, s0, gamma, params.omega_n,
                                    margin=cfg.condint_margin)
    moment_cfg = MomentConfig(s0=s0, moment_gamma=gamma, s_star=s_star,
                              eps0=eps0).validate(params)

    grid = RadialGrid.uniform(params.n, float(params.R), cfg.N)
    threshold_cap = (M0 / params.omega_n) / grid.weights[0]
    blowup_threshold = cfg.blowup_threshold if cfg.blowup_threshold is not None \
        else cfg.capacity_fraction * threshold_cap
    r_star = s_star ** (1.0 / params.n)
    data_spec = InitialDataSpec(M0=M0, r_star=r_star, eps0=eps0,
                                profile=cfg.profile, height_cap=cfg.height_cap,
                                core_fraction=cfg.core_fraction)
    u0 = build_concentrated_u0(data_spec, grid)

    pfrak_choice = float(admissible_value(compute_pfrak(params)))
    pbar_inf = compute_pbar(params, pfrak_choice)
    p_energy = float(admissible_value(pbar_inf))
    exponents = compute_exponents(params, pfrak_choice, p_energy)
    p_list = (1.0, 1.5 * pfrak_choice, 2.0 * pfrak_choice)

    observer = FunctionalObserver(params, production, p_list=p_list,
                                  p_energy=p_energy, moment_cfg=moment_cfg, M=M)
    stepper = StepperConfig(dt_init=cfg.dt_init, dt_min=cfg.dt_min,
                            dt_max=cfg.dt_max, cfl_safety=cfg.cfl_safety,
                            blowup_threshold=blowup_threshold,
                            t_end=cfg.t_end)
    result = run(u0, grid, params, production, stepper, observers=[observer],
                 mode="reduced", sample_growth=cfg.sample_growth)

    failures: list[str] = []
    if result.status != "blowup_declared":
        failures.append(f"no blow-up declared (status {result.status})")

    try:
        FunctionalSeries.from_run(result, observer).validate(
            mass_bound=M, before=result.declared_time)
    except InvalidParameter as exc:
        failures.append(f"series invariant violated: {exc}")

    threshold = observer.threshold
    phi_series = result.series["moment_phi"]
    phi0_value = float(phi_series[0])
    if not phi0_value > threshold:
        failures.append("phi(0) does not exceed the membership threshold")

    in_sphi = result.series["in_S_phi"]
    member = in_sphi > 0.5
    drops = np.diff(phi_series)[member[:-1] & member[1:]]
    scale = np.abs(phi_series[:-1])[member[:-1] & member[1:]]
    max_drop = float(np.max(-drops / np.maximum(scale, 1e-300), initial=0.0))
    if max_drop > cfg.monotone_tol:
        failures.append(f"phi decreased by {max_drop:.3e} (rel) inside S_phi")

    concavity_max = -np.inf
    concavity_tol = 0.0
    for state in result.samples:
        acc = MassAccumulation.from_state(grid, state)
        s, vals = acc.nodes, acc.values
        hl, hr = np.diff(s)[:-1], np.diff(s)[1:]
        d2 = 2.0 * (hl * vals[2:] - (hl + hr) * vals[1:-1] + hr * vals[:-2]) \
            / (hl * hr * (hl + hr))
        concavity_max = max(concavity_max, float(np.max(d2)))
        concavity_tol = max(concavity_tol,
                            cfg.concavity_tol_factor * float(np.max(np.abs(d2))))
    if concavity_max > concavity_tol:
        failures.append(
            f"mass accumulation lost concavity: max U_ss = {concavity_max:.3e}")

    c0, c9 = observer.constants["c0"], observer.constants["sandwich_c"]
    mean_gap = -np.inf
    for state in result.samples:
        phi_here = moment_phi(MassAccumulation.from_state(grid, state), moment_cfg)
        if phi_here >= threshold:
            mean_gap = max(mean_gap, signal_mean_gap(
                grid, state.u, params, production, moment_cfg, c0))
    if mean_gap > cfg.mean_bound_tol * max(c0, 1.0):
        failures.append(f"signal-mean bound violated by {mean_gap:.3e}")

    sandwich = sandwich_gap(params, production,
                            10.0 * float(np.nanmax(result.series["linf"])))
    if sandwich > 1e-9 * max(c9, 1.0):
        failures.append(f"production sandwich violated by {sandwich:.3e}")

    lp_growth = verify_lp_growth(result.times, result.series, pfrak_choice,
                                 M, cfg.growth_factor_min)
    if result.status == "blowup_declared":
        for key, entry in lp_growth.items():
            if not entry.get("pass", False):
                failures.append(f"L^p growth verdict failed at p={key}: {entry}")

    exponent = float(params.m2) + float(params.alpha)
    try:
        c_fit, violations, n_used = verify_superlinear_odi(
            result.times, phi_series, in_sphi, exponent, s0, gamma)
        superlinearity = {"c": c_fit, "violations": violations,
                          "samples": n_used, "pass": c_fit > 0}
        if result.status == "blowup_declared" and not c_fit > 0:
            failures.append("superlinearity constant is zero")
    except InsufficientSamples as exc:
        superlinearity = {"error": str(exc), "pass": False}
        failures.append(f"superlinearity verification impossible: {exc}")

    report = ExperimentReport(
        params=params, regime=regime,
        selected={"s0": s0, "moment_gamma": gamma, "eps0": eps0, "s_star": s_star,
                  "r_star": r_star, "M0": M0, "critical_mass": C, "c0": c0,
                  "sandwich_c": c9, "sphi_threshold": threshold, "N": cfg.N,
                  "p_energy": p_energy, "pfrak_choice": pfrak_choice,
                  "c30_c31_ratio": ratio, "blowup_threshold": blowup_threshold,
                  "u0_max": float(np.max(u0))},
        exponents=exponents.to_dict(),
        run_status=result.status,
        T_blowup_observed=result.declared_time,
        lp_growth_verdict=lp_growth,
        superlinearity_verdict=superlinearity,
        phi0_value=phi0_value,
        phi0_threshold=threshold,
        phi_monotone_max_drop=max_drop,
        concavity_max=concavity_max,
        concavity_tol=concavity_tol,
        sandwich_violation=sandwich,
        mean_bound_gap=mean_gap,
        failures=failures,
        run_result=result,
        grid=grid,
    )
    if failures and raise_on_failure:
        error = VerdictFailure("; ".join(failures))
        error.report = report
        raise error
    return report
