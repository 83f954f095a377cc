# /root/pkg/src/evolution/scaling.py

"""
KP-I Scaling Symmetry Check

Purpose:
If u solves KP-I in the laboratory frame, so does
u_lam(t, x, y) = lam^2 u(lam^3 t, lam x, lam^2 y), on a box whose x half-period
is X/lam and whose y-period is divided by lam^2. The check evolves u0 for
lam^3 T and the scaled data for T with the time step divided by lam^3, then
compares lam^2 u(lam^3 T) against u_lam(T) sample by sample.

Dependencies:
- numpy (external library)
- src.evolution.integrators, src.grid.domain, src.core.settings
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core import settings
from src.core.errors import ConfigError
from src.evolution.integrators import IntegratorConfig, evolve
from src.grid.domain import Field, Grid2D


@dataclass
class ScalingReport:
    lambda_scale: float
    t_end: float
    mismatch: float
    x_ratio: float
    period_ratio: float

    def ok(self, tol: float = 1e-6) -> bool:
        return self.mismatch < tol


def scaled_grid(grid: Grid2D, lambda_scale: float) -> Grid2D:
    return Grid2D(Nx=grid.Nx, Ny=grid.Ny, X=grid.X / lambda_scale, L=grid.L / lambda_scale ** 2)


def kp_scaling_symmetry_check(u0: Field, lambda_scale: float, t_end: float = 1.0,
                              dt: Optional[float] = None, dealias: bool = True) -> ScalingReport:
    if u0.kind != 'real':
        raise ConfigError("The scaling check applies to real KP-I data", field_path='field.kind')
    if lambda_scale <= 0:
        raise ConfigError(f"lambda must be positive, got {lambda_scale}", field_path='lambda_scale')
    dt = dt or settings.DT_KP
    lam3 = lambda_scale ** 3

    original = IntegratorConfig(dt=dt, t_end=lam3 * t_end, dealias=dealias, sample_stride=10 ** 9)
    reference = evolve(u0, original, frame_speed=0.0, keep_fields=False).final

    grid = scaled_grid(u0.grid, lambda_scale)
    v0 = Field(grid, lambda_scale ** 2 * u0.values, 'real')
    scaled = IntegratorConfig(dt=dt / lam3, t_end=t_end, dealias=dealias, sample_stride=10 ** 9)
    candidate = evolve(v0, scaled, frame_speed=0.0, keep_fields=False).final

    expected = lambda_scale ** 2 * reference.values
    denominator = float(np.linalg.norm(expected)) or 1.0
    mismatch = float(np.linalg.norm(candidate.values - expected)) / denominator
    return ScalingReport(lambda_scale=lambda_scale, t_end=t_end, mismatch=mismatch,
                         x_ratio=grid.X / u0.grid.X, period_ratio=grid.L / u0.grid.L)
