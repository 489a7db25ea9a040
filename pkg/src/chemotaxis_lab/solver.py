"""Time integration of the radially symmetric system.

Two backends share the adaptive stepping machinery:

* ``full``     evolves the cell densities u with both chemical deviations
               (v, w) resolved each step; conservative finite-volume fluxes,
               implicit linearized diffusion, explicit upwind drift and
               reaction.
* ``reduced``  (requires m2 = m3) evolves the mass accumulation U on the
               s = r^n face nodes; the combined signal gradient enters
               through a single nonlocal term, the degenerate diffusion
               U_ss is implicit.

Blow-up is declared when the sup norm crosses ``blowup_threshold`` or when
the time step underflows while the sup norm has been growing.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import minimize_scalar

from .errors import (
    DtUnderflow,
    FitError,
    InvalidParameter,
    ModelError,
    QuadratureError,
    StepRejected,
)
from .grid import RadialGrid
from .regimes import ModelParams, ProductionLaw

logger = logging.getLogger(__name__)

POS_TOL_FACTOR = 1e-12          # undershoot tolerance relative to ||u||_inf
DT_GROWTH = 1.25                # relaxation of dt after accepted steps
UNDERFLOW_GROWTH_FACTOR = 10.0  # sup-norm growth that turns dt underflow into blow-up


@dataclass
class StepperConfig:
    dt_init: float = 1e-6
    dt_min: float = 1e-14
    dt_max: float = 1e-2
    cfl_safety: float = 0.8
    blowup_threshold: float = 1e6
    t_end: float = 1.0
    scheme: str = "semi_implicit"       # semi_implicit | explicit_rk
    drift_order: int = 1                # 1 = upwind, 2 = MUSCL (minmod)
    max_steps: int = 20_000_000

    def validate(self) -> None:
        if not (0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise InvalidParameter("need 0 < dt_min <= dt_init <= dt_max")
        if not (0 < self.cfl_safety < 1):
            raise InvalidParameter("cfl_safety must lie in (0,1)")
        if self.scheme not in ("semi_implicit", "explicit_rk"):
            raise InvalidParameter(f"unknown scheme {self.scheme!r}")
        if self.drift_order not in (1, 2):
            raise InvalidParameter("drift_order must be 1 or 2")


@dataclass
class RadialState:
    """Discrete solution snapshot; reduced mode carries U on s-faces."""

    t: float
    u: np.ndarray
    mode: str = "full"                      # full | reduced
    v: Optional[np.ndarray] = None
    w: Optional[np.ndarray] = None
    vr: Optional[np.ndarray] = None
    wr: Optional[np.ndarray] = None
    U: Optional[np.ndarray] = None
    zr: Optional[np.ndarray] = None

    def linf(self) -> float:
        return float(np.max(self.u))


@dataclass
class StepResult:
    state: RadialState
    dt_used: float
    status: str                              # ok | blowup_declared | completed
    diagnostics: dict = field(default_factory=dict)


@dataclass
class RunResult:
    status: str                              # completed | blowup_declared
    t_final: float
    state: RadialState
    times: np.ndarray
    series: dict
    samples: list
    declared_time: Optional[float] = None
    steps: int = 0
    rejected_steps: int = 0
    clipped_mass: float = 0.0
    observer_failures: dict = field(default_factory=dict)


@dataclass
class EllipticFields:
    v: np.ndarray
    vr: np.ndarray
    w: np.ndarray
    wr: np.ndarray
    m1_t: float
    m2_t: float
    vr_faces: np.ndarray
    wr_faces: np.ndarray

    def __iter__(self):
        return iter((self.v, self.vr, self.w, self.wr, self.m1_t, self.m2_t))


def elliptic_solve_radial(grid: RadialGrid, u: np.ndarray,
                          production: ProductionLaw) -> EllipticFields:
    """Solve the two nonlocal Poisson problems for the signal deviations.

    The radial gradient comes from the cumulative integral
    r^{1-n} int_0^r rho^{n-1} (mean - f_i(u)) drho, evaluated exactly for
    cellwise-constant u; the potentials are recovered by integrating the
    gradient and shifting to zero quadrature mean.
    """
    u = np.asarray(u, dtype=float)
    f1 = np.asarray(production.f1(u), dtype=float)
    f2 = np.asarray(production.f2(u), dtype=float)
    if not (np.all(np.isfinite(f1)) and np.all(np.isfinite(f2))):
        raise QuadratureError("non-finite production integrand")
    m1_t = grid.mean(f1)
    m2_t = grid.mean(f2)
    vr_faces = _gradient_faces(grid, m1_t - f1)
    wr_faces = _gradient_faces(grid, m2_t - f2)
    v = _potential_from_gradient(grid, vr_faces)
    w = _potential_from_gradient(grid, wr_faces)
    vr = _gradient_centers(grid, m1_t - f1)
    wr = _gradient_centers(grid, m2_t - f2)
    return EllipticFields(v, vr, w, wr, m1_t, m2_t, vr_faces, wr_faces)


def _gradient_faces(grid: RadialGrid, rhs: np.ndarray) -> np.ndarray:
    """Face values of r^{1-n} int_0^r rho^{n-1} rhs drho; zero at r=0 and r=R."""
    cum = grid.cumulative_radial(rhs)
    out = np.zeros(grid.N + 1)
    interior = slice(1, grid.N)
    out[interior] = cum[interior] / grid.face_areas[interior]
    # compatibility makes the outer value vanish up to roundoff; pin it
    out[-1] = 0.0
    return out


def _gradient_centers(grid: RadialGrid, rhs: np.ndarray) -> np.ndarray:
    """Cell-center gradient values including the partial-cell contribution."""
    cum = grid.cumulative_radial(rhs)[:-1]
    partial = (grid.s_centers - grid.s_faces[:-1]) / grid.n * rhs
    return (cum + partial) / grid.r_centers ** (grid.n - 1)


def _potential_from_gradient(grid: RadialGrid, grad_faces: np.ndarray) -> np.ndarray:
    """Integrate a face gradient to cell centers, shifted to zero mean."""
    dr = grid.dr
    face_pot = np.concatenate([[0.0], np.cumsum(0.5 * (grad_faces[:-1] + grad_faces[1:]) * dr)])
    centers = 0.5 * (face_pot[:-1] + face_pot[1:])
    return centers - grid.mean(centers)


def reduced_gradient(grid: RadialGrid, u: np.ndarray, params: ModelParams,
                     production: ProductionLaw) -> np.ndarray:
    """Face values of the combined signal gradient in the reduced system.

    z_r(s) = (m(t)/n) s^{1/n} - (1/n) s^{1/n - 1} int_0^s f(n U_s) dsigma
    with f = chi f1 - xi f2 and u = n U_s on cells.  Consistent with
    chi*vr - xi*wr from the full elliptic solve at the same nodes.
    """
    if params.m2 != params.m3:
        raise ModelError("reduced gradient requires m2 = m3")
    u = np.asarray(u, dtype=float)
    f = float(params.chi) * np.asarray(production.f1(u), dtype=float) \
        - float(params.xi) * np.asarray(production.f2(u), dtype=float)
    if not np.all(np.isfinite(f)):
        raise QuadratureError("non-finite production integrand")
    m_t = grid.mean(f)
    return _gradient_faces(grid, m_t - f)


def make_state(grid: RadialGrid, u0: np.ndarray, params: ModelParams,
               production: ProductionLaw, mode: str) -> RadialState:
    """Assemble a consistent RadialState (chemical fields resolved) at t=0."""
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (grid.N,):
        raise InvalidParameter("u0 must be cell data of length N")
    if not np.all(np.isfinite(u0)):
        raise InvalidParameter("u0 must be finite")
    if np.min(u0) < 0:
        raise InvalidParameter("u0 must be nonnegative")
    if mode == "reduced":
        if params.m2 != params.m3:
            raise ModelError("reduced mode requires m2 = m3")
        U = np.concatenate([[0.0], np.cumsum(grid.weights * u0)])
        zr = reduced_gradient(grid, u0, params, production)
        return RadialState(t=0.0, u=u0.copy(), mode="reduced", U=U, zr=zr)
    if mode != "full":
        raise InvalidParameter(f"unknown mode {mode!r}")
    fields = elliptic_solve_radial(grid, u0, production)
    return RadialState(t=0.0, u=u0.copy(), mode="full", v=fields.v, w=fields.w,
                       vr=fields.vr, wr=fields.wr)


# ----------------------------------------------------------------------
# per-state step preparation (frozen coefficients, shared across retries)
# ----------------------------------------------------------------------

def _face_mean(u: np.ndarray) -> np.ndarray:
    return 0.5 * (u[:-1] + u[1:])


def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.where(np.abs(a) < np.abs(b), a, b)
    return np.where(a * b > 0.0, out, 0.0)


def _upwind_states(u: np.ndarray, order: int, dr: float):
    """Left/right interface states at interior faces (length N-1 each)."""
    if order == 1:
        return u[:-1], u[1:]
    slopes = np.zeros_like(u)
    slopes[1:-1] = _minmod(u[1:-1] - u[:-2], u[2:] - u[1:-1]) / dr
    left = u[:-1] + 0.5 * dr * slopes[:-1]
    right = u[1:] - 0.5 * dr * slopes[1:]
    return left, right


class _FullPrep:
    """Frozen per-state quantities for one accepted step of the full backend."""

    def __init__(self, state, grid, params, production, config):
        self.grid = grid
        self.config = config
        self.params = params
        self.production = production
        u = state.u
        self.u = u
        self.fields = elliptic_solve_radial(grid, u, production)
        chi, xi = float(params.chi), float(params.xi)
        m2, m3 = float(params.m2), float(params.m3)
        lam, mu, k = float(params.lam), float(params.mu), float(params.k)
        u_face = _face_mean(u)
        self.vel = chi * (u_face + 1.0) ** (m2 - 1.0) * self.fields.vr_faces[1:-1] \
            - xi * (u_face + 1.0) ** (m3 - 1.0) * self.fields.wr_faces[1:-1]
        left, right = _upwind_states(u, config.drift_order, grid.dr)
        u_up = np.where(self.vel > 0.0, left, right)
        flux = np.zeros(grid.N + 1)
        flux[1:-1] = grid.face_areas[1:-1] * self.vel * u_up
        self.tendency = -(flux[1:] - flux[:-1]) / grid.weights \
            + lam * u - mu * u ** k
        self.diff_coeff = grid.face_areas[1:-1] \
            * (u_face + 1.0) ** (float(params.m1) - 1.0) / grid.dr

        areas = grid.face_areas[1:-1]
        outflow = np.zeros(grid.N)
        outflow[:-1] += areas * np.maximum(self.vel, 0.0)
        outflow[1:] += areas * np.maximum(-self.vel, 0.0)
        with np.errstate(divide="ignore"):
            dt_adv = float(np.min(np.where(outflow > 0.0, grid.weights / outflow, np.inf)))
        umax = float(np.max(u))
        dt_reac = 1.0 / (lam + mu * max(umax, 0.0) ** (k - 1.0) + 1e-300)
        self.dt_bound = config.cfl_safety * min(dt_adv, dt_reac)
        if config.scheme == "explicit_rk":
            dmax = float(np.max((u + 1.0) ** (float(params.m1) - 1.0)))
            self.dt_bound = min(self.dt_bound, 0.4 * grid.dr ** 2 / max(dmax, 1e-300))

    def apply(self, dt: float) -> RadialState:
        grid, u = self.grid, self.u
        if self.config.scheme == "explicit_rk":
            return self._heun(dt)
        # increment form (W/dt - L) du = L u + W*tendency: exact at steady
        # states and well conditioned despite tiny near-origin cell volumes
        coeff = self.diff_coeff
        ab = np.zeros((3, grid.N))
        ab[1] = grid.weights / dt
        ab[1][:-1] += coeff
        ab[1][1:] += coeff
        ab[0][1:] = -coeff
        ab[2][:-1] = -coeff
        diff_flux = np.zeros(grid.N + 1)
        diff_flux[1:-1] = coeff * (u[1:] - u[:-1])
        rhs = diff_flux[1:] - diff_flux[:-1] + grid.weights * self.tendency
        du = solve_banded((1, 1), ab, rhs)
        return u + du

    def _explicit_rhs(self, u, fields):
        grid, params, config = self.grid, self.params, self.config
        chi, xi = float(params.chi), float(params.xi)
        m2, m3 = float(params.m2), float(params.m3)
        lam, mu, k = float(params.lam), float(params.mu), float(params.k)
        u_face = _face_mean(u)
        vel = chi * (u_face + 1.0) ** (m2 - 1.0) * fields.vr_faces[1:-1] \
            - xi * (u_face + 1.0) ** (m3 - 1.0) * fields.wr_faces[1:-1]
        left, right = _upwind_states(u, config.drift_order, grid.dr)
        u_up = np.where(vel > 0.0, left, right)
        flux = np.zeros(grid.N + 1)
        flux[1:-1] = grid.face_areas[1:-1] * vel * u_up
        coeff = grid.face_areas[1:-1] * (u_face + 1.0) ** (float(params.m1) - 1.0) / grid.dr
        diff_flux = np.zeros(grid.N + 1)
        diff_flux[1:-1] = coeff * (u[1:] - u[:-1])
        return (diff_flux[1:] - diff_flux[:-1] - flux[1:] + flux[:-1]) / grid.weights \
            + lam * u - mu * u ** k

    def _heun(self, dt):
        u = self.u
        k1 = self._explicit_rhs(u, self.fields)
        u_star = np.maximum(u + dt * k1, 0.0)
        fields2 = elliptic_solve_radial(self.grid, u_star, self.production)
        k2 = self._explicit_rhs(u_star, fields2)
        return u + 0.5 * dt * (k1 + k2)

    def build_state(self, t, u_new) -> RadialState:
        f = self.fields
        return RadialState(t=t, u=u_new, mode="full", v=f.v, w=f.w,
                           vr=f.vr, wr=f.wr)


class _ReducedPrep:
    """Frozen per-state quantities for one accepted step of the reduced backend."""

    def __init__(self, state, grid, params, production, config):
        self.grid = grid
        self.config = config
        n = grid.n
        u = state.u
        U = state.U
        self.U = U
        self.lam = float(params.lam)
        self.zr = reduced_gradient(grid, u, params, production)
        us_face = np.zeros(grid.N + 1)
        us_face[1:-1] = 0.5 * (u[:-1] + u[1:]) / n
        us_face[0] = u[0] / n
        us_face[-1] = u[-1] / n
        mobility = (n * us_face + 1.0) ** (float(params.m2) - 1.0)
        self.adv = np.zeros(grid.N + 1)
        self.adv[1:-1] = n * grid.face_areas[1:-1] * mobility[1:-1] * self.zr[1:-1]
        self.diff = n ** 2 * grid.face_areas ** 2 \
            * (n * us_face + 1.0) ** (float(params.m1) - 1.0)
        mu, k = float(params.mu), float(params.k)
        self.sink = mu * np.concatenate([[0.0], np.cumsum(grid.weights * u ** k)])

        h = np.diff(grid.s_faces)
        self.hl, self.hr = h[:-1], h[1:]
        slope_left = (U[1:-1] - U[:-2]) / self.hl
        slope_right = (U[2:] - U[1:-1]) / self.hr
        upwind = np.where(self.adv[1:-1] > 0.0, slope_left, slope_right)
        self.explicit = -self.adv[1:-1] * upwind + self.lam * U[1:-1] - self.sink[1:-1]

        upwind_h = np.where(self.adv[1:-1] > 0.0, self.hl, self.hr)
        speed = np.abs(self.adv[1:-1])
        with np.errstate(divide="ignore"):
            dt_adv = float(np.min(np.where(speed > 0.0, upwind_h / speed, np.inf)))
        umax = float(np.max(u))
        dt_reac = 1.0 / (self.lam + mu * max(umax, 0.0) ** (k - 1.0) + 1e-300)
        self.dt_bound = config.cfl_safety * min(dt_adv, dt_reac)
        if config.scheme == "explicit_rk":
            # per-node explicit diffusion stability; hl*hr/diff is roughly
            # uniform across the nonuniform s-grid
            with np.errstate(divide="ignore"):
                local = np.where(self.diff[1:-1] > 0.0,
                                 self.hl * self.hr / self.diff[1:-1], np.inf)
            self.dt_bound = min(self.dt_bound, 0.4 * float(np.min(local)))

    def apply(self, dt: float) -> np.ndarray:
        U, hl, hr = self.U, self.hl, self.hr
        grid = self.grid
        d2 = 2.0 * (hl * (U[2:] - U[1:-1]) - hr * (U[1:-1] - U[:-2])) \
            / (hl * hr * (hl + hr))
        if self.config.scheme == "explicit_rk":
            U_new = U.copy()
            U_new[1:-1] = U[1:-1] + dt * (self.explicit + self.diff[1:-1] * d2)
            U_new[-1] = U[-1] + dt * (self.lam * U[-1] - self.sink[-1])
            U_new[0] = 0.0
            return U_new
        # increment form (I - dt a D2) dU = dt (a D2 U + explicit), exact at
        # steady states and robust to the nonuniform spacing near s = 0
        c_sub = 2.0 * dt * self.diff[1:-1] / (hl * (hl + hr))
        c_sup = 2.0 * dt * self.diff[1:-1] / (hr * (hl + hr))
        ab = np.zeros((3, grid.N + 1))
        ab[1, :] = 1.0
        ab[1, 1:-1] += c_sub + c_sup
        ab[0, 2:] = -c_sup
        ab[2, :-2] = -c_sub
        rhs = np.zeros(grid.N + 1)
        rhs[1:-1] = dt * (self.diff[1:-1] * d2 + self.explicit)
        rhs[-1] = dt * (self.lam * U[-1] - self.sink[-1])
        dU = solve_banded((1, 1), ab, rhs)
        U_new = U + dU
        U_new[0] = 0.0
        return U_new

    def build_state(self, t, U_new, u_new) -> RadialState:
        return RadialState(t=t, u=u_new, mode="reduced", U=U_new, zr=self.zr)


# ----------------------------------------------------------------------
# adaptive stepping
# ----------------------------------------------------------------------

def advance(state: RadialState, grid: RadialGrid, params: ModelParams,
            production: ProductionLaw, config: StepperConfig,
            dt: Optional[float] = None) -> StepResult:
    """One accepted time step (internally retried with halved dt on rejection).

    ``dt`` is a hint; the step uses min(hint, stability bound, dt_max) and
    clamps to the remaining horizon.  Raises DtUnderflow if no admissible
    dt >= dt_min exists.
    """
    config.validate()
    if state.mode == "reduced":
        prep = _ReducedPrep(state, grid, params, production, config)
    else:
        prep = _FullPrep(state, grid, params, production, config)
    dt_stab = min(dt if dt is not None else config.dt_init,
                  prep.dt_bound, config.dt_max)
    if dt_stab < config.dt_min:
        raise DtUnderflow(f"dt={dt_stab:.3e} below dt_min={config.dt_min:.3e}")
    remaining = config.t_end - state.t
    dt_try = min(dt_stab, remaining) if remaining > 0 else dt_stab
    rejects = 0
    while True:
        try:
            new_state, clipped = _attempt(prep, state, grid, params, dt_try)
            break
        except StepRejected:
            rejects += 1
            dt_try *= 0.5
            if dt_try < config.dt_min:
                raise DtUnderflow(
                    f"dt={dt_try:.3e} below dt_min={config.dt_min:.3e} "
                    f"after {rejects} rejections") from None
    status = "ok"
    if new_state.linf() > config.blowup_threshold:
        status = "blowup_declared"
    elif new_state.t >= config.t_end * (1.0 - 1e-14):
        status = "completed"
    return StepResult(state=new_state, dt_used=dt_try, status=status,
                      diagnostics={"rejected": rejects, "clipped_mass": clipped})


def _attempt(prep, state, grid, params, dt):
    """One step attempt at dt; raises StepRejected on inadmissible states."""
    if state.mode == "reduced":
        U_new = prep.apply(dt)
        u_new = np.diff(U_new) / grid.weights
        if not np.all(np.isfinite(u_new)):
            raise StepRejected("non-finite state")
        pos_tol = POS_TOL_FACTOR * max(float(np.max(u_new)), 1.0)
        if float(np.min(u_new)) < -pos_tol:
            raise StepRejected("density undershoot beyond tolerance")
        clipped = 0.0
        if float(np.min(u_new)) < 0.0:
            U_fixed = np.maximum.accumulate(U_new)
            clipped = grid.omega_n * float(np.sum(np.abs(U_fixed - U_new)))
            U_new = U_fixed
            u_new = np.diff(U_new) / grid.weights
        return prep.build_state(state.t + dt, U_new, u_new), clipped
    u_new = prep.apply(dt)
    if not np.all(np.isfinite(u_new)):
        raise StepRejected("non-finite state")
    pos_tol = POS_TOL_FACTOR * max(float(np.max(u_new)), 1.0)
    if float(np.min(u_new)) < -pos_tol:
        raise StepRejected("density undershoot beyond tolerance")
    clipped = 0.0
    if float(np.min(u_new)) < 0.0:
        clipped = grid.omega_n * float(np.sum(grid.weights * np.abs(np.minimum(u_new, 0.0))))
        u_new = np.maximum(u_new, 0.0)
    return prep.build_state(state.t + dt, u_new), clipped


def run(u0_profile, grid: RadialGrid, params: ModelParams,
        production: ProductionLaw, config: StepperConfig,
        observers: Sequence = (), mode: str = "full",
        sample_dt: Optional[float] = None,
        sample_growth: float = 1.05,
        max_samples: int = 100_000,
        keep_states: int = 24) -> RunResult:
    """Integrate from u0 until t_end, threshold crossing or dt underflow.

    Samples are taken on a time cadence and additionally whenever the sup
    norm grows by ``sample_growth``, which keeps blow-up tails resolved.
    Observer callbacks receive (state, grid, params) and return a column
    dict; a failing observer is isolated and its columns become NaN.
    """
    config.validate()
    if callable(u0_profile):
        u0 = np.asarray(u0_profile(grid.r_centers), dtype=float)
    else:
        u0 = np.asarray(u0_profile, dtype=float)
    state = make_state(grid, u0, params, production, mode)
    if state.linf() >= config.blowup_threshold:
        raise InvalidParameter("blowup_threshold must exceed the initial sup norm")
    if sample_dt is None:
        sample_dt = config.t_end / 200.0

    times: list[float] = []
    series: dict[str, list] = {}
    samples = []
    observer_failures: dict[str, int] = {}
    clipped_total = 0.0
    rejected_total = 0
    history: list[tuple[int, float]] = []

    def record(st: RadialState):
        if times and st.t == times[-1]:
            return
        times.append(st.t)
        row = {"mass": grid.integrate(st.u), "linf": st.linf()}
        for obs in observers:
            try:
                row.update(obs(st, grid, params))
            except Exception as exc:  # noqa: BLE001 - isolation is the contract
                name = getattr(obs, "name", type(obs).__name__)
                observer_failures[name] = observer_failures.get(name, 0) + 1
                if observer_failures[name] == 1:
                    logger.warning("observer %s failed: %s", name, exc)
                for col in getattr(obs, "columns", ()):
                    row.setdefault(col, math.nan)
        for key, value in row.items():
            series.setdefault(key, [math.nan] * (len(times) - 1)).append(value)
        for key in series:
            if key not in row:
                series[key].append(math.nan)

    record(state)
    samples.append(state)
    next_sample_t = sample_dt
    last_sample_linf = state.linf()
    dt = min(config.dt_init, config.dt_max)
    status = "completed"
    declared_time = None
    step_count = 0

    while True:
        if step_count >= config.max_steps:
            logger.warning("max_steps reached at t=%.6g", state.t)
            break
        try:
            result = advance(state, grid, params, production, config, dt=dt * DT_GROWTH)
        except DtUnderflow:
            growth = _recent_growth(history, state.linf())
            if growth >= UNDERFLOW_GROWTH_FACTOR:
                status = "blowup_declared"
                declared_time = state.t
                record(state)
                samples.append(state)
                break
            raise
        state = result.state
        dt = result.dt_used
        step_count += 1
        rejected_total += result.diagnostics["rejected"]
        clipped_total += result.diagnostics["clipped_mass"]
        history.append((step_count, state.linf()))
        if len(history) > 4096:
            del history[:2048]

        should_sample = (
            state.t >= next_sample_t
            or state.linf() >= last_sample_linf * sample_growth
            or result.status != "ok"
        )
        if should_sample and len(times) < max_samples:
            record(state)
            if len(samples) < keep_states or result.status != "ok":
                samples.append(state)
            while next_sample_t <= state.t:
                next_sample_t += sample_dt
            last_sample_linf = max(last_sample_linf, state.linf())
        if result.status == "blowup_declared":
            status = "blowup_declared"
            declared_time = state.t
            break
        if result.status == "completed":
            status = "completed"
            break

    series_arrays = {key: np.asarray(col, dtype=float) for key, col in series.items()}
    return RunResult(status=status, t_final=state.t, state=state,
                     times=np.asarray(times), series=series_arrays,
                     samples=samples, declared_time=declared_time,
                     steps=step_count, rejected_steps=rejected_total,
                     clipped_mass=clipped_total,
                     observer_failures=observer_failures)


def _recent_growth(history, linf_now: float) -> float:
    """Sup-norm growth over the most recent tenth of accepted steps."""
    if not history:
        return 1.0
    last_step = history[-1][0]
    window_start = last_step - max(50, last_step // 10)
    base = next((linf for step, linf in history if step >= window_start), history[0][1])
    return linf_now / max(base, 1e-300)


def extrapolate_Tmax(t: np.ndarray, linf: np.ndarray,
                     residual_threshold: float = 0.5):
    """Fit ||u||_inf ~ c (T - t)^(-kappa) on the growth tail.

    Uses the samples in the last decade of sup-norm growth; requires at
    least 8 of them, strictly increasing.  Returns (T_est, kappa_est,
    rms residual of log||u|| on the fitted model).
    """
    t = np.asarray(t, dtype=float)
    linf = np.asarray(linf, dtype=float)
    if t.shape != linf.shape or t.ndim != 1:
        raise FitError("need matching 1-d sample arrays")
    mask = np.isfinite(t) & np.isfinite(linf) & (linf > 0)
    t, linf = t[mask], linf[mask]
    if len(t) < 8:
        raise FitError("need at least 8 finite samples")
    peak = float(np.max(linf))
    tail = linf >= peak / 10.0
    t_tail, y_tail = t[tail], linf[tail]
    if len(t_tail) < 8:
        raise FitError("fewer than 8 samples in the last decade of growth")
    if np.any(np.diff(y_tail) <= 0):
        raise FitError("sup norm not strictly increasing on the fit window")
    log_y = np.log(y_tail)
    t_last = t_tail[-1]
    span = max(t_last - t_tail[0], 1e-300)

    def rms(T):
        x = np.log(T - t_tail)
        slope, intercept = np.polyfit(x, log_y, 1)
        return float(np.sqrt(np.mean((slope * x + intercept - log_y) ** 2)))

    opt = minimize_scalar(rms, bounds=(t_last + 1e-14 * span, t_last + 3.0 * span),
                          method="bounded", options={"xatol": 1e-14 * span})
    T_est = float(opt.x)
    x = np.log(T_est - t_tail)
    slope, _ = np.polyfit(x, log_y, 1)
    kappa = -float(slope)
    residual = float(opt.fun)
    if kappa <= 0:
        raise FitError("fitted exponent is not positive; no blow-up signature")
    if residual > residual_threshold:
        raise FitError(f"fit residual {residual:.3g} exceeds {residual_threshold}")
    return T_est, kappa, residual
