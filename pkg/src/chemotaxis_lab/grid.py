"""Radial finite-volume grid on the ball of radius R in R^n.

Cells are uniform in r with faces r_i = i*dr.  The mass coordinate s = r^n
maps faces to s_faces and cell centers to mass nodes; volume weights
w_j = (s_{j+1} - s_j)/n integrate rho^{n-1} drho exactly per cell, so the
weights sum to R^n/n and integral identities hold to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter
from .regimes import unit_ball_volume


@dataclass(frozen=True)
class RadialGrid:
    n: int
    R: float
    N: int
    r_faces: np.ndarray = field(repr=False, default=None)
    r_centers: np.ndarray = field(repr=False, default=None)
    s_faces: np.ndarray = field(repr=False, default=None)
    s_centers: np.ndarray = field(repr=False, default=None)
    weights: np.ndarray = field(repr=False, default=None)
    face_areas: np.ndarray = field(repr=False, default=None)

    @classmethod
    def uniform(cls, n: int, R: float, N: int) -> "RadialGrid":
        if n < 1 or N < 4:
            raise InvalidParameter("grid needs n >= 1 and N >= 4")
        if R <= 0:
            raise InvalidParameter("R must be positive")
        r_faces = np.linspace(0.0, R, N + 1)
        r_centers = 0.5 * (r_faces[:-1] + r_faces[1:])
        s_faces = r_faces ** n
        s_centers = r_centers ** n
        weights = np.diff(s_faces) / n
        face_areas = r_faces ** (n - 1)
        return cls(n=n, R=float(R), N=N, r_faces=r_faces, r_centers=r_centers,
                   s_faces=s_faces, s_centers=s_centers, weights=weights,
                   face_areas=face_areas)

    @property
    def dr(self) -> float:
        return self.R / self.N

    @property
    def omega_n(self) -> float:
        return self.n * unit_ball_volume(self.n)

    @property
    def domain_measure(self) -> float:
        return self.omega_n * self.R ** self.n / self.n

    def radial_integral(self, values: np.ndarray) -> float:
        """Integral of rho^{n-1} * values over (0, R) for cell data."""
        return float(self.weights @ np.asarray(values))

    def integrate(self, values: np.ndarray) -> float:
        """Integral over the ball Omega for radial cell data."""
        return self.omega_n * self.radial_integral(values)

    def mean(self, values: np.ndarray) -> float:
        """Mean over Omega for radial cell data."""
        return self.radial_integral(values) / (self.R ** self.n / self.n)

    def cumulative_radial(self, values: np.ndarray) -> np.ndarray:
        """Face values of int_0^r rho^{n-1} * values drho (length N+1)."""
        out = np.empty(self.N + 1)
        out[0] = 0.0
        np.cumsum(self.weights * np.asarray(values), out=out[1:])
        return out

    def linf(self, values: np.ndarray) -> float:
        return float(np.max(np.abs(values)))

    def lp_norm(self, values: np.ndarray, p: float) -> float:
        """L^p(Omega) norm for radial cell data."""
        return float(self.integrate(np.abs(values) ** p) ** (1.0 / p))
