"""Functionals tracked along trajectories.

Mass accumulation U(s) is piecewise linear in the mass coordinate s = r^n
for cellwise-constant densities, so every weighted moment against
s^{-gamma}(s0 - s) is integrated in closed form per cell: the endpoint
singularity costs no accuracy for any gamma < 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidParameter, ModelError, SingularQuadratureError
from .grid import RadialGrid
from .regimes import ModelParams, ProductionLaw
from .solver import RadialState

__all__ = [
    "MomentConfig",
    "MassAccumulation",
    "FunctionalSeries",
    "mass_accumulation",
    "moment_phi",
    "moment_psi",
    "sphi_threshold",
    "in_S_phi",
    "production_means",
    "compute_L_bound",
    "sandwich_constant",
    "c0_constant",
    "concavity_check",
    "signal_mean_gap",
    "admissible_gamma_interval",
    "FunctionalObserver",
]


@dataclass(frozen=True)
class MomentConfig:
    """Truncation and weight parameters of the moment functional."""

    s0: float
    moment_gamma: float
    s_star: float
    eps0: float

    def validate(self, params: ModelParams) -> "MomentConfig":
        Rn = float(params.R) ** params.n
        if not (0 < self.s0 <= Rn / 6):
            raise InvalidParameter("s0 must lie in (0, R^n/6]")
        if not self.moment_gamma < 1:
            raise InvalidParameter("moment_gamma must be < 1")
        if not (0 < self.s_star < self.s0):
            raise InvalidParameter("s_star must lie in (0, s0)")
        if not (0 < self.eps0 < self.s0 / 2):
            raise InvalidParameter("eps0 must lie in (0, s0/2)")
        low, high = admissible_gamma_interval(params)
        if not (low < self.moment_gamma < high):
            raise InvalidParameter(
                f"moment_gamma={self.moment_gamma:.6g} outside admissible "
                f"interval ({low:.6g}, {high:.6g})")
        return self


def admissible_gamma_interval(params: ModelParams,
                              eps_m1zero: Optional[float] = None):
    """Open interval of admissible moment exponents for these parameters.

    Lower bounds: 2 - (m2+a)/k, 2 - (m2+a), and for m1 > 0 also
    2 - (2/n)(m2+a)/(m2+a-m1); at m1 = 0 the last bound is relieved by a
    small eps in place of m1 (default 1e-3 (m2+a)).  For m1 < 0 the upper
    bound tightens to 2 - 2/n.  Returns (low, high); empty when
    low >= high.
    """
    m1 = float(params.m1)
    ma = float(params.m2) + float(params.alpha)
    k = float(params.k)
    n = params.n
    lows = [2.0 - ma / k, 2.0 - ma]
    if m1 >= 0:
        if ma <= m1:
            raise ModelError("admissible gamma requires m2 + alpha > m1")
        shift = m1 if m1 > 0 else (eps_m1zero if eps_m1zero is not None
                                   else 1e-3 * ma)
        lows.append(2.0 - (2.0 / n) * ma / (ma - shift))
    high = 1.0 if m1 >= 0 else min(1.0, 2.0 - 2.0 / n)
    return max(lows), high


class MassAccumulation:
    """Piecewise-linear mass accumulation U on the s = r^n coordinate.

    ``nodes`` are breakpoints including 0 and R^n; ``values`` the U there.
    Slopes per cell equal u/n for grid data, exactly.
    """

    def __init__(self, nodes: np.ndarray, values: np.ndarray):
        self.nodes = np.asarray(nodes, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.nodes.ndim != 1 or self.nodes.shape != self.values.shape:
            raise InvalidParameter("nodes and values must be matching 1-d arrays")
        if np.any(np.diff(self.nodes) <= 0):
            raise InvalidParameter("nodes must be strictly increasing")
        self.slopes = np.diff(self.values) / np.diff(self.nodes)

    @classmethod
    def from_grid(cls, grid: RadialGrid, u: np.ndarray) -> "MassAccumulation":
        u = np.asarray(u, dtype=float)
        if np.min(u) < 0:
            raise InvalidParameter("density must be nonnegative")
        values = np.concatenate([[0.0], np.cumsum(grid.weights * u)])
        return cls(grid.s_faces, values)

    @classmethod
    def from_state(cls, grid: RadialGrid, state: RadialState) -> "MassAccumulation":
        if state.mode == "reduced" and state.U is not None:
            return cls(grid.s_faces, state.U)
        return cls.from_grid(grid, state.u)

    def __call__(self, s):
        return np.interp(np.asarray(s, dtype=float), self.nodes, self.values)

    @property
    def total(self) -> float:
        return float(self.values[-1])

    def pieces(self, s0: float):
        """Cells intersected with (0, s0): arrays (a, b, U_a, slope)."""
        if not (0 < s0 <= self.nodes[-1]):
            raise InvalidParameter("s0 must lie inside the node range")
        idx = np.searchsorted(self.nodes, s0, side="left")
        a = self.nodes[:idx].copy()
        b = np.empty_like(a)
        b[:-1] = self.nodes[1:idx]
        b[-1] = s0
        ua = self.values[:idx]
        slope = self.slopes[:idx].copy() if idx <= len(self.slopes) else self.slopes.copy()
        return a, b, ua, slope[: len(a)]


def mass_accumulation(grid: RadialGrid, u: np.ndarray,
                      s: Optional[np.ndarray] = None):
    """U(s) = int_0^{s^{1/n}} rho^{n-1} u drho, exact for cell data.

    Returns the values at ``s`` when given, else the MassAccumulation
    object on the grid's s-face nodes.
    """
    acc = MassAccumulation.from_grid(grid, u)
    if s is None:
        return acc
    return acc(s)


def _moments(a, b, q, gamma):
    """int_a^b s^(q - gamma) ds, vectorized over (a, b)."""
    e = q - gamma + 1.0
    return (b ** e - a ** e) / e


def moment_phi(U: MassAccumulation, cfg: MomentConfig) -> float:
    """phi = int_0^{s0} s^{-gamma} (s0 - s) U(s) ds, exact per linear piece."""
    gamma, s0 = cfg.moment_gamma, cfg.s0
    if gamma >= 1:
        raise SingularQuadratureError("moment exponent must stay below 1")
    a, b, ua, slope = U.pieces(s0)
    m0 = _moments(a, b, 0.0, gamma)
    m1 = _moments(a, b, 1.0, gamma)
    m2 = _moments(a, b, 2.0, gamma)
    const = ua - slope * a
    return float(np.sum(const * (s0 * m0 - m1) + slope * (s0 * m1 - m2)))


def moment_psi(U: MassAccumulation, cfg: MomentConfig, exponent: float) -> float:
    """psi = int_0^{s0} s^{1-gamma} (s0 - s) U_s^exponent ds.

    ``exponent`` is m2 + alpha; U_s is cellwise constant so each cell
    integrates in closed form.
    """
    gamma, s0 = cfg.moment_gamma, cfg.s0
    if gamma >= 1:
        raise SingularQuadratureError("moment exponent must stay below 1")
    a, b, _, slope = U.pieces(s0)
    if np.min(slope) < -1e-12 * max(1.0, float(np.max(np.abs(slope)))):
        raise InvalidParameter("U_s must be nonnegative on (0, s0)")
    m1 = _moments(a, b, 1.0, gamma)
    m2 = _moments(a, b, 2.0, gamma)
    return float(np.sum(np.maximum(slope, 0.0) ** exponent * (s0 * m1 - m2)))


def sphi_threshold(params: ModelParams, cfg: MomentConfig, M: float) -> float:
    """Membership threshold (M - s0) s0^{2-gamma} / ((1-gamma)(2-gamma) omega_n)."""
    gamma = cfg.moment_gamma
    return (M - cfg.s0) * cfg.s0 ** (2.0 - gamma) / (
        (1.0 - gamma) * (2.0 - gamma) * params.omega_n)


def in_S_phi(phi_value: float, threshold: float) -> bool:
    return phi_value >= threshold


def production_means(grid: RadialGrid, u: np.ndarray, production: ProductionLaw,
                     params: ModelParams):
    """Spatial means of the productions and the combined m(t).

    Returns (m1_t, m2_t, m_t) with m_t = chi m1_t - xi m2_t.
    """
    u = np.asarray(u, dtype=float)
    m1_t = grid.mean(np.asarray(production.f1(u), dtype=float))
    m2_t = grid.mean(np.asarray(production.f2(u), dtype=float))
    return m1_t, m2_t, float(params.chi) * m1_t - float(params.xi) * m2_t


def compute_L_bound(params: ModelParams, production: ProductionLaw,
                    K: Optional[float] = None, cfg: Optional[MomentConfig] = None,
                    samples: int = 2001) -> float:
    """max of f1, f2 and |chi f1 - xi f2| on [0, K].

    The default K is the density argument appearing in the aggregate
    constant, 8n / (2^gamma (3-gamma) omega_n).
    """
    if K is None:
        gamma = cfg.moment_gamma if cfg is not None else 0.0
        K = 8.0 * params.n / (2.0 ** gamma * (3.0 - gamma) * params.omega_n)
    s = np.linspace(0.0, K, samples)
    f1 = np.asarray(production.f1(s), dtype=float)
    f2 = np.asarray(production.f2(s), dtype=float)
    f = float(params.chi) * f1 - float(params.xi) * f2
    return float(max(np.max(f1), np.max(f2), np.max(np.abs(f))))


def sandwich_constant(params: ModelParams) -> float:
    """(2 b xi k2 / (chi k3 a))^(a/(a-b)) * chi k3 (a-b) / (2 b), requires a > b."""
    alpha, beta = float(params.alpha), float(params.beta)
    if alpha <= beta:
        raise ModelError("constant requires alpha > beta")
    chi, xi = float(params.chi), float(params.xi)
    k2, k3 = float(params.k2), float(params.k3)
    base = 2.0 * beta * xi * k2 / (chi * k3 * alpha)
    return base ** (alpha / (alpha - beta)) * chi * k3 * (alpha - beta) / (2.0 * beta)


def c0_constant(params: ModelParams, production: ProductionLaw, cfg: MomentConfig,
                L_bound: Optional[float] = None):
    """Aggregate constant of the signal-mean estimate; returns (c0, sandwich_c).

    c0 = chi f1(8n / (2^gamma (3-gamma) omega_n))
         + (1/6) [ (chi k3 (a-b)/b) (2 xi k2 b / (chi k3 a))^(a/(a-b)) + L (chi+2) ]
    """
    alpha, beta = float(params.alpha), float(params.beta)
    if alpha <= beta:
        raise ModelError("constant requires alpha > beta")
    gamma = cfg.moment_gamma
    chi, xi = float(params.chi), float(params.xi)
    k2, k3 = float(params.k2), float(params.k3)
    if L_bound is None:
        L_bound = compute_L_bound(params, production, cfg=cfg)
    argument = 8.0 * params.n / (2.0 ** gamma * (3.0 - gamma) * params.omega_n)
    first = chi * float(production.f1(argument))
    young = (chi * k3 * (alpha - beta) / beta) \
        * (2.0 * xi * k2 * beta / (chi * k3 * alpha)) ** (alpha / (alpha - beta))
    c0 = first + (young + L_bound * (chi + 2.0)) / 6.0
    return c0, sandwich_constant(params)


def concavity_check(U: MassAccumulation, grid: Optional[RadialGrid] = None) -> float:
    """Max interior second difference of U in s (<= 0 for concave U)."""
    s, vals = U.nodes, U.values
    hl = np.diff(s)[:-1]
    hr = np.diff(s)[1:]
    d2 = 2.0 * (hl * vals[2:] - (hl + hr) * vals[1:-1] + hr * vals[:-2]) \
        / (hl * hr * (hl + hr))
    return float(np.max(d2))


def signal_mean_gap(grid: RadialGrid, u: np.ndarray, params: ModelParams,
                    production: ProductionLaw, cfg: MomentConfig, c0: float) -> float:
    """Largest violation of m(t) <= c0 + (1/2s) int_0^s f(n U_s) over s in (0, s0).

    Nonpositive return means the bound holds at every sampled s (the
    s-face nodes inside (0, s0)).
    """
    u = np.asarray(u, dtype=float)
    _, _, m_t = production_means(grid, u, production, params)
    f = float(params.chi) * np.asarray(production.f1(u), dtype=float) \
        - float(params.xi) * np.asarray(production.f2(u), dtype=float)
    fcum = grid.n * np.concatenate([[0.0], np.cumsum(grid.weights * f)])
    s = grid.s_faces
    inside = (s > 0) & (s < cfg.s0)
    rhs = c0 + fcum[inside] / (2.0 * s[inside])
    return float(np.max(m_t - rhs))


@dataclass
class FunctionalSeries:
    """Sampled functional columns of one run plus the fixed constants."""

    times: np.ndarray
    series: dict
    constants: dict = field(default_factory=dict)

    @classmethod
    def from_run(cls, result, observer: "FunctionalObserver") -> "FunctionalSeries":
        return cls(times=result.times, series=result.series,
                   constants=dict(observer.constants))

    def validate(self, mass_bound: Optional[float] = None,
                 before: Optional[float] = None) -> "FunctionalSeries":
        """Entries must be finite at sampled times (before a declaration
        time when given) and mass must respect the a-priori bound."""
        cut = self.times <= (before if before is not None else np.inf)
        for name, column in self.series.items():
            values = np.asarray(column, dtype=float)[cut]
            if not np.all(np.isfinite(values)):
                raise InvalidParameter(f"series {name!r} has non-finite entries")
        if mass_bound is not None and "mass" in self.series:
            worst = float(np.max(np.asarray(self.series["mass"])[cut]))
            if worst > mass_bound * (1.0 + 1e-6):
                raise InvalidParameter(
                    f"mass {worst:.9g} exceeds bound {mass_bound:.9g}")
        return self


class FunctionalObserver:
    """Computes the tracked functional columns for each sampled state.

    Columns: lp_<p> for the configured p-list, phi_p (the (1/p)*int (u+1)^p
    energy at p_energy), and when a MomentConfig is supplied also
    moment_phi, moment_psi and in_S_phi (0/1 against the fixed threshold).
    """

    name = "functionals"

    def __init__(self, params: ModelParams, production: ProductionLaw,
                 p_list=(), p_energy: Optional[float] = None,
                 moment_cfg: Optional[MomentConfig] = None,
                 M: Optional[float] = None):
        self.params = params
        self.production = production
        self.p_list = tuple(float(p) for p in p_list)
        self.p_energy = float(p_energy) if p_energy is not None else None
        self.moment_cfg = moment_cfg
        self.exponent = float(params.m2) + float(params.alpha)
        self.constants: dict[str, float] = {}
        if moment_cfg is not None:
            if M is None:
                raise InvalidParameter("moment tracking needs the mass bound M")
            self.threshold = sphi_threshold(params, moment_cfg, M)
            c0, c9 = c0_constant(params, production, moment_cfg)
            self.constants.update(
                c0=c0, sandwich_c=c9, sphi_threshold=self.threshold, M=M,
                s0=moment_cfg.s0, moment_gamma=moment_cfg.moment_gamma)

    @property
    def columns(self):
        cols = [f"lp_{p:g}" for p in self.p_list]
        if self.p_energy is not None:
            cols.append("phi_p")
        if self.moment_cfg is not None:
            cols.extend(["moment_phi", "moment_psi", "in_S_phi"])
        return tuple(cols)

    def __call__(self, state: RadialState, grid: RadialGrid, params: ModelParams):
        row = {}
        u = state.u
        for p in self.p_list:
            row[f"lp_{p:g}"] = grid.lp_norm(u, p)
        if self.p_energy is not None:
            row["phi_p"] = grid.integrate((u + 1.0) ** self.p_energy) / self.p_energy
        if self.moment_cfg is not None:
            acc = MassAccumulation.from_state(grid, state)
            phi = moment_phi(acc, self.moment_cfg)
            row["moment_phi"] = phi
            row["moment_psi"] = moment_psi(acc, self.moment_cfg, self.exponent)
            row["in_S_phi"] = 1.0 if in_S_phi(phi, self.threshold) else 0.0
        return row
