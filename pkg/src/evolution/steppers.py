# /root/pkg/src/evolution/steppers.py

"""
Time Steppers Module

Purpose:
Pseudospectral time steppers for the full nonlinear equations on the
cylinder grid:
- KP-I in a frame moving with speed c (c = 1 is the soliton frame):
  u_t - c u_x + u u_x + u_xxx - dx^{-1} u_yy = 0, linear symbol
  i(c xi + xi^3 + ky^2/xi), modes (xi = 0, m != 0) held at zero;
- cubic NLS i u_t + Laplacian u - u + |u|^2 u = 0, linear symbol
  -i(1 + xi^2 + ky^2).
The exponential fourth-order Runge-Kutta engine (ETDRK4) propagates the
linear part exactly; its phi-function coefficients are evaluated by contour
averages. Strang splitting is available for NLS.

Dependencies:
- numpy (external library)
- abc (standard Python library)
- src.grid.domain, src.core.settings, src.core.errors, src.utils.logger

Expected Input: Field objects, time step, scheme options.
Expected Output: Advanced Field objects / spectral states.
"""

from abc import ABC, abstractmethod
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from src.core import settings
from src.core.errors import CFLViolation, ConfigError
from src.grid.domain import Field, Grid2D, dealias_mask, derivative_symbol
from src.utils.logger import log

SCHEMES = ('exponential-rk4', 'strang-split')
# Runge-Kutta 4 reaches about 2.8 along the imaginary axis
RK4_STABILITY = 2.8
# Bound on the nonlinear phase rotation per split step
SPLIT_ROTATION_LIMIT = 0.1

Nonlinearity = Callable[[np.ndarray, float], np.ndarray]


class ExponentialRK4:
    """
    ETDRK4 for v' = Lam v + N(v, t) with a diagonal symbol Lam of any shape.
    """

    def __init__(self, symbol: np.ndarray, dt: float, contour_points: Optional[int] = None):
        M = contour_points or settings.CONTOUR_POINTS
        self.dt = dt
        h = dt
        Lh = h * np.asarray(symbol, dtype=np.complex128)
        self.E = np.exp(Lh)
        self.E2 = np.exp(Lh / 2.0)
        # full circle of radius 1 around each h*Lam, closed under conjugation
        roots = np.exp(2j * np.pi * (np.arange(1, M + 1) - 0.5) / M)
        LR = Lh[..., None] + roots
        eLR = np.exp(LR)
        self.Q = h * np.mean((np.exp(LR / 2.0) - 1.0) / LR, axis=-1)
        self.f1 = h * np.mean((-4.0 - LR + eLR * (4.0 - 3.0 * LR + LR ** 2)) / LR ** 3, axis=-1)
        self.f2 = h * np.mean((2.0 + LR + eLR * (-2.0 + LR)) / LR ** 3, axis=-1)
        self.f3 = h * np.mean((-4.0 - 3.0 * LR - LR ** 2 + eLR * (4.0 - LR)) / LR ** 3, axis=-1)

    def step(self, v: np.ndarray, t: float, nonlinear: Nonlinearity) -> np.ndarray:
        h = self.dt
        Nv = nonlinear(v, t)
        a = self.E2 * v + self.Q * Nv
        Na = nonlinear(a, t + h / 2.0)
        b = self.E2 * v + self.Q * Na
        Nb = nonlinear(b, t + h / 2.0)
        c = self.E2 * a + self.Q * (2.0 * Nb - Nv)
        Nc = nonlinear(c, t + h)
        return self.E * v + Nv * self.f1 + 2.0 * (Na + Nb) * self.f2 + Nc * self.f3


def kp_symbol(grid: Grid2D, frame_speed: float = 1.0) -> np.ndarray:
    XI, KY = grid.spectral_mesh()
    symbol = np.zeros(grid.shape, dtype=np.complex128)
    nonzero = XI != 0
    symbol[nonzero] = 1j * (frame_speed * XI[nonzero] + XI[nonzero] ** 3 + KY[nonzero] ** 2 / XI[nonzero])
    return symbol


def kp_constraint_mask(grid: Grid2D) -> np.ndarray:
    """False on (xi = 0, m != 0) and on the x-Nyquist column."""
    keep = np.ones(grid.shape, dtype=bool)
    keep[0, grid.m != 0] = False
    if grid.Nx % 2 == 0 and grid.Nx > 1:
        keep[grid.Nx // 2, :] = False
    return keep


def nls_symbol(grid: Grid2D) -> np.ndarray:
    XI, KY = grid.spectral_mesh()
    return -1j * (1.0 + XI ** 2 + KY ** 2)


class BaseStepper(ABC):
    """
    Common state handling for the pseudospectral steppers. The state is the
    unnormalized 2-D FFT of the samples.
    """

    kind = 'real'

    def __init__(self, grid: Grid2D, dt: float, dealias: bool = True):
        if dt <= 0:
            raise ConfigError(f"dt must be positive, got {dt}", field_path='integrator.dt')
        self.grid = grid
        self.dt = dt
        self.dealias = dealias
        self._mask = dealias_mask(grid) if dealias else np.ones(grid.shape, dtype=bool)

    @abstractmethod
    def stability_number(self, amplitude: float) -> float:
        """Dimensionless step size for a field of the given sup-norm."""
        raise NotImplementedError

    @abstractmethod
    def stability_limit(self) -> float:
        raise NotImplementedError

    @abstractmethod
    def step_state(self, v: np.ndarray, t: float) -> np.ndarray:
        raise NotImplementedError

    def check_stability(self, amplitude: float) -> None:
        number = self.stability_number(amplitude)
        if number > self.stability_limit():
            raise CFLViolation(f"{type(self).__name__}: dt={self.dt} gives stability number {number:.3f} "
                               f"> {self.stability_limit()} for amplitude {amplitude:.3g}",
                               dt=self.dt, amplitude=amplitude)

    def to_state(self, u: Field) -> np.ndarray:
        return np.fft.fft2(u.values)

    def to_field(self, v: np.ndarray) -> Field:
        values = np.fft.ifft2(v)
        if self.kind == 'real':
            return Field(self.grid, values.real, 'real')
        return Field(self.grid, values, 'complex')

    def advance(self, u: Field, steps: int = 1, t: float = 0.0) -> Field:
        v = self.to_state(u)
        for n in range(steps):
            v = self.step_state(v, t + n * self.dt)
        return self.to_field(v)


@lru_cache(maxsize=16)
def _cached_engine(kind: str, grid: Grid2D, dt: float, frame_speed: float, contour_points: int) -> ExponentialRK4:
    symbol = kp_symbol(grid, frame_speed) if kind == 'kp' else nls_symbol(grid)
    return ExponentialRK4(symbol, dt, contour_points)


class KPStepper(BaseStepper):
    """ETDRK4 for KP-I with the dealiased nonlinearity -1/2 (u^2)_x."""

    kind = 'real'

    def __init__(self, grid: Grid2D, dt: float, dealias: bool = True, frame_speed: float = 1.0):
        super().__init__(grid, dt, dealias)
        self.frame_speed = frame_speed
        self._keep = kp_constraint_mask(grid)
        self._ik = derivative_symbol(grid.xi, 1)[:, None] * np.ones((1, grid.Ny))
        self._engine = _cached_engine('kp', grid, dt, frame_speed, settings.CONTOUR_POINTS)

    def stability_number(self, amplitude: float) -> float:
        xi_max = float(np.max(np.abs(self.grid.xi)))
        if self.dealias:
            xi_max *= 2.0 / 3.0
        return self.dt * amplitude * xi_max

    def stability_limit(self) -> float:
        return RK4_STABILITY

    def nonlinear(self, v: np.ndarray, t: float = 0.0) -> np.ndarray:
        u = np.fft.ifft2(v).real
        return -0.5 * self._ik * (np.fft.fft2(u * u) * self._mask)

    def to_state(self, u: Field) -> np.ndarray:
        return np.fft.fft2(u.values) * self._keep

    def step_state(self, v: np.ndarray, t: float) -> np.ndarray:
        return self._engine.step(v, t, self.nonlinear) * self._keep


class NLSStepper(BaseStepper):
    """ETDRK4 for cubic NLS with the dealiased nonlinearity i|u|^2 u."""

    kind = 'complex'

    def __init__(self, grid: Grid2D, dt: float, dealias: bool = True):
        super().__init__(grid, dt, dealias)
        self._engine = _cached_engine('nls', grid, dt, 0.0, settings.CONTOUR_POINTS)

    def stability_number(self, amplitude: float) -> float:
        return self.dt * 2.0 * amplitude ** 2

    def stability_limit(self) -> float:
        return RK4_STABILITY

    def nonlinear(self, v: np.ndarray, t: float = 0.0) -> np.ndarray:
        u = np.fft.ifft2(v)
        return 1j * np.fft.fft2(np.abs(u) ** 2 * u) * self._mask

    def step_state(self, v: np.ndarray, t: float) -> np.ndarray:
        return self._engine.step(v, t, self.nonlinear)


class StrangNLSStepper(BaseStepper):
    """
    Strang splitting for cubic NLS: half linear step (exact, Fourier space),
    full nonlinear phase rotation e^{i|u|^2 dt} (exact, physical space),
    half linear step. Mass is conserved to roundoff; no dealiasing filter.
    """

    kind = 'complex'

    def __init__(self, grid: Grid2D, dt: float, dealias: bool = False):
        super().__init__(grid, dt, dealias)
        self._half = np.exp(nls_symbol(grid) * dt / 2.0)

    def stability_number(self, amplitude: float) -> float:
        return self.dt * amplitude ** 2

    def stability_limit(self) -> float:
        return SPLIT_ROTATION_LIMIT

    def step_state(self, v: np.ndarray, t: float) -> np.ndarray:
        u = np.fft.ifft2(self._half * v)
        u = u * np.exp(1j * np.abs(u) ** 2 * self.dt)
        return self._half * np.fft.fft2(u)


def make_stepper(equation: str, grid: Grid2D, dt: float, scheme: str = 'exponential-rk4',
                 dealias: bool = True, frame_speed: float = 1.0) -> BaseStepper:
    if scheme not in SCHEMES:
        raise ConfigError(f"Unknown scheme '{scheme}'", field_path='integrator.scheme')
    if equation == 'kp':
        if scheme != 'exponential-rk4':
            raise ConfigError("KP-I supports only the exponential-rk4 scheme", field_path='integrator.scheme')
        return KPStepper(grid, dt, dealias, frame_speed)
    if equation == 'nls':
        if scheme == 'strang-split':
            return StrangNLSStepper(grid, dt)
        return NLSStepper(grid, dt, dealias)
    raise ConfigError(f"Unknown equation '{equation}'", field_path='run.equation')


def step_kp(u: Field, dt: float, dealias: bool = True, frame_speed: float = 1.0) -> Field:
    """One ETDRK4 step of KP-I."""
    if u.kind != 'real':
        raise ConfigError("KP-I fields are real", field_path='field.kind')
    stepper = KPStepper(u.grid, dt, dealias, frame_speed)
    stepper.check_stability(u.sup())
    return stepper.advance(u)


def step_nls(u: Field, dt: float, scheme: str = 'strang-split', dealias: bool = True) -> Field:
    """One step of cubic NLS (Strang splitting by default)."""
    stepper = make_stepper('nls', u.grid, dt, scheme, dealias)
    stepper.check_stability(u.sup())
    log.debug(f"NLS step dt={dt} scheme={scheme}")
    return stepper.advance(u.as_complex() if u.kind == 'real' else u)
