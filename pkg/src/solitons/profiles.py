# /root/pkg/src/solitons/profiles.py

"""
Solitary-Wave Profiles Module

Purpose:
Closed-form solitary waves and their scaling families:
- KdV / KP-I line soliton Q(x) = 3 sech^2(x/2), speed family c Q(sqrt(c) x);
- cubic NLS ground state Q(x) = sqrt(2) sech x, amplitude family lam Q(lam x).
Profiles are evaluated analytically and then sampled on a grid. The
stationarity residual measures how well a sampled profile solves its
travelling-wave equation under spectral differentiation.

Dependencies:
- numpy (external library)
- src.grid.domain

Expected Input: x arrays, SolitonSpec, Grid2D.
Expected Output: Profile samples, Field objects, residual sup-norms.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.errors import DomainError
from src.grid.domain import Field, Grid2D, d_dx

FAMILIES = ('kdv', 'nls')


def _sech(x):
    # 1/cosh without overflow for large |x|
    ax = np.abs(x)
    e = np.exp(-ax)
    return 2.0 * e / (1.0 + e * e)


def kdv_Q(x, c: float = 1.0):
    """c * 3 sech^2(sqrt(c) x / 2)."""
    if c <= 0:
        raise DomainError(f"speed must be positive, got {c}", speed=c)
    return c * 3.0 * _sech(np.sqrt(c) * np.asarray(x, dtype=float) / 2.0) ** 2


def kdv_Q_prime(x, c: float = 1.0):
    z = np.sqrt(c) * np.asarray(x, dtype=float) / 2.0
    return -3.0 * c ** 1.5 * _sech(z) ** 2 * np.tanh(z)


def nls_Q(x, lam: float = 1.0):
    """lam * sqrt(2) sech(lam x)."""
    if lam <= 0:
        raise DomainError(f"amplitude must be positive, got {lam}", amplitude=lam)
    return lam * np.sqrt(2.0) * _sech(lam * np.asarray(x, dtype=float))


def nls_Q_prime(x, lam: float = 1.0):
    z = lam * np.asarray(x, dtype=float)
    return -lam * lam * np.sqrt(2.0) * _sech(z) * np.tanh(z)


@dataclass(frozen=True)
class SolitonSpec:
    """
    family: 'kdv' or 'nls'; scale is the speed c (kdv) or amplitude lam (nls);
    center a; phase gamma (nls only).
    """

    family: str = 'kdv'
    scale: float = 1.0
    center: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"Unknown soliton family '{self.family}'", family=self.family)
        if self.scale <= 0:
            raise DomainError(f"Soliton scale must be positive, got {self.scale}", scale=self.scale)

    def profile(self, x):
        if self.family == 'kdv':
            return kdv_Q(np.asarray(x) - self.center, self.scale)
        return nls_Q(np.asarray(x) - self.center, self.scale) * np.exp(1j * self.phase)


def sample_soliton(spec: SolitonSpec, grid: Grid2D) -> Field:
    """y-independent field holding the soliton profile."""
    kind = 'real' if spec.family == 'kdv' else 'complex'
    return Field.from_profile(grid, spec.profile(grid.x), kind)


def stationarity_residual(spec: SolitonSpec, grid: Grid2D, profile: Optional[Field] = None) -> float:
    """
    Sup-norm of the travelling-wave equation evaluated on `profile`
    (default: the sampled soliton itself):
      kdv: -c Q' + Q Q' + Q'''
      nls: Q'' - lam^2 Q + |Q|^2 Q
    """
    u = sample_soliton(spec, grid) if profile is None else profile
    if spec.family == 'kdv':
        ux = d_dx(u, 1).values
        residual = -spec.scale * ux + u.values * ux + d_dx(u, 3).values
    else:
        residual = d_dx(u, 2).values - spec.scale ** 2 * u.values + np.abs(u.values) ** 2 * u.values
    return float(np.max(np.abs(residual)))
