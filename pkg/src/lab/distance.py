# /root/pkg/src/lab/distance.py

"""
Orbital Distance Module

Purpose:
Distance from a field to the soliton orbit:
- KP-I: inf_a ||u - Q(. - a)||,
- NLS:  inf_{a, gamma} ||u - e^{i gamma} Q(. - a)||.
Only the y-mean of u sees the (y-independent) orbit, so
||u - Q_a||^2 = ||Pi u||^2 + 2 pi L ||mean_y u - Q_a||^2_{L2(line)}.
The shift is located on the grid through the spectrally computed
cross-correlation, refined by quadratic peak interpolation and a bounded
scalar minimization of the exact trigonometric correlation; the distance is
then evaluated directly on the shifted spectrum (no cancellation).

Dependencies:
- numpy, scipy (external libraries)
- src.grid.domain, src.solitons.profiles
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from src.grid.domain import Field, l2_norm, project_nonzero_y
from src.solitons.profiles import kdv_Q, nls_Q

NEWTON_STEPS = 8


@dataclass(frozen=True)
class OrbitPoint:
    distance: float
    shift: float
    phase: float = 0.0


class OrbitalDistance:
    """Callable distance to the orbit of a fixed x-profile on a fixed grid."""

    def __init__(self, profile: np.ndarray, X: float, with_phase: bool):
        self.profile = np.asarray(profile, dtype=float)
        self.Nx = self.profile.size
        self.X = X
        self.dx = 2.0 * X / self.Nx
        self.xi = np.pi * np.fft.fftfreq(self.Nx, d=1.0 / self.Nx) / X
        self.Q_hat = np.fft.fft(self.profile) / self.Nx
        self.with_phase = with_phase

    def _correlation(self, mean_hat: np.ndarray, a: float) -> complex:
        """int mean(x) Q(x - a) dx as an exact trigonometric sum."""
        return complex(2.0 * self.X * np.sum(mean_hat * np.conj(self.Q_hat) * np.exp(1j * self.xi * a)))

    def _score_slope(self, mean_hat: np.ndarray, a: float) -> Tuple[float, float]:
        """First and second a-derivatives of the score (|c|^2 when phases are free)."""
        weights = 2.0 * self.X * mean_hat * np.conj(self.Q_hat) * np.exp(1j * self.xi * a)
        c = complex(np.sum(weights))
        c1 = complex(np.sum(1j * self.xi * weights))
        c2 = complex(np.sum(-self.xi ** 2 * weights))
        if self.with_phase:
            return 2.0 * (c1 * c.conjugate()).real, 2.0 * (abs(c1) ** 2 + (c2 * c.conjugate()).real)
        return c1.real, c2.real

    def _polish(self, mean_hat: np.ndarray, a: float, low: float, high: float) -> float:
        """Newton on the score slope; Brent alone stops near sqrt(eps) in the shift."""
        for _ in range(NEWTON_STEPS):
            slope, curvature = self._score_slope(mean_hat, a)
            if curvature >= 0:
                break
            step = slope / curvature
            candidate = a - step
            if not low <= candidate <= high:
                break
            a = candidate
            if abs(step) <= 1e-15 * max(1.0, abs(a)):
                break
        return a

    def _score(self, c: complex) -> float:
        return abs(c) if self.with_phase else c.real

    def locate(self, u: Field) -> OrbitPoint:
        if u.grid.Nx != self.Nx:
            raise ValueError(f"Field has Nx={u.grid.Nx}, orbit profile has Nx={self.Nx}")
        mean = u.values.mean(axis=1)
        mean_hat = np.fft.fft(mean) / self.Nx
        product = mean_hat * np.conj(self.Q_hat)
        on_grid = 2.0 * self.X * self.Nx * np.fft.ifft(product)
        scores = np.abs(on_grid) if self.with_phase else on_grid.real
        j = int(np.argmax(scores))

        left, centre, right = scores[(j - 1) % self.Nx], scores[j], scores[(j + 1) % self.Nx]
        curvature = left - 2.0 * centre + right
        offset = 0.5 * (left - right) / curvature if curvature < 0 else 0.0
        a0 = (j + float(np.clip(offset, -0.5, 0.5))) * self.dx
        if a0 >= self.X:
            a0 -= 2.0 * self.X

        result = minimize_scalar(lambda a: -self._score(self._correlation(mean_hat, a)),
                                 bounds=(a0 - self.dx, a0 + self.dx), method='bounded',
                                 options={'xatol': 1e-12 * max(1.0, self.X)})
        a = self._polish(mean_hat, float(result.x), a0 - self.dx, a0 + self.dx)
        c = self._correlation(mean_hat, a)
        gamma = math.atan2(c.imag, c.real) if self.with_phase else 0.0

        shifted = self.Q_hat * np.exp(-1j * self.xi * a) * np.exp(1j * gamma)
        line_sq = 2.0 * self.X * float(np.sum(np.abs(mean_hat - shifted) ** 2))
        transverse = l2_norm(project_nonzero_y(u))
        distance = math.sqrt(transverse ** 2 + 2.0 * np.pi * u.grid.L * line_sq)
        return OrbitPoint(distance=distance, shift=a, phase=gamma)

    def __call__(self, u: Field) -> float:
        return self.locate(u).distance


def kp_orbit(u_or_grid, speed: float = 1.0) -> OrbitalDistance:
    grid = getattr(u_or_grid, 'grid', u_or_grid)
    return OrbitalDistance(kdv_Q(grid.x, speed), grid.X, with_phase=False)


def nls_orbit(u_or_grid, lam: float = 1.0) -> OrbitalDistance:
    grid = getattr(u_or_grid, 'grid', u_or_grid)
    return OrbitalDistance(nls_Q(grid.x, lam), grid.X, with_phase=True)


def orbital_distance_kp(u: Field, profile: Optional[np.ndarray] = None) -> float:
    """inf_a ||u - Q(. - a)||_{L2} over the cylinder."""
    orbit = OrbitalDistance(profile, u.grid.X, False) if profile is not None else kp_orbit(u)
    return orbit(u)


def orbital_distance_nls(u: Field, profile: Optional[np.ndarray] = None) -> float:
    """inf_{a, gamma} ||u - e^{i gamma} Q(. - a)||_{L2} over the cylinder."""
    orbit = OrbitalDistance(profile, u.grid.X, True) if profile is not None else nls_orbit(u)
    return orbit(u)
