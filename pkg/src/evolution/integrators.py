# /root/pkg/src/evolution/integrators.py

"""
Evolution Driver Module

Purpose:
Runs a stepper from an initial field to t_end, sampling diagnostics every
`sample_stride` steps into a Trajectory. Callbacks receive every sample and
may request an early stop (escape detection). NLS runs are guarded against
suspected blow-up.

Dependencies:
- numpy (external library)
- src.evolution.steppers, src.evolution.invariants
- src.core.settings, src.core.errors, src.utils.logger

Expected Input: Initial Field, IntegratorConfig, optional callbacks.
Expected Output: Trajectory.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional

import numpy as np

from src.core import settings
from src.core.errors import BlowUpSuspected, ConfigError
from src.evolution.invariants import kp_hamiltonian, mass, nls_hamiltonian, transverse_l2
from src.evolution.steppers import SCHEMES, make_stepper
from src.grid.domain import Field, check_zero_modes, l2_norm, transform_forward
from src.utils.logger import log

# callback(t, field, diagnostics) -> True to stop
Callback = Callable[[float, Field, Dict[str, float]], bool]
DistanceFn = Callable[[Field], float]


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    scheme: str = 'exponential-rk4'
    t_end: float = 10.0
    dealias: bool = True
    sample_stride: int = 10
    t_start: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}", field_path='integrator.dt')
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got '{self.scheme}'",
                              field_path='integrator.scheme')
        if self.t_end < self.t_start:
            raise ConfigError(f"t_end={self.t_end} precedes t_start={self.t_start}",
                              field_path='integrator.t_end')
        if self.sample_stride < 1:
            raise ConfigError(f"sample_stride must be >= 1, got {self.sample_stride}",
                              field_path='integrator.sample_stride')

    @property
    def steps(self) -> int:
        return int(round((self.t_end - self.t_start) / self.dt))

    def restarted(self, t_start: float, t_end: float) -> 'IntegratorConfig':
        return IntegratorConfig(self.dt, self.scheme, t_end, self.dealias, self.sample_stride, t_start)


@dataclass
class Trajectory:
    equation: str
    times: List[float] = field(default_factory=list)
    fields: List[Field] = field(default_factory=list)
    diagnostics: List[Dict[str, float]] = field(default_factory=list)
    final: Optional[Field] = None
    stopped_early: bool = False
    stop_reason: Optional[str] = None

    def series(self, name: str) -> np.ndarray:
        return np.array([d[name] for d in self.diagnostics])

    def columns(self) -> List[str]:
        return list(self.diagnostics[0].keys()) if self.diagnostics else []

    def rows(self) -> List[List[float]]:
        names = self.columns()
        return [[t] + [d[name] for name in names] for t, d in zip(self.times, self.diagnostics)]


def infer_equation(u: Field) -> str:
    return 'kp' if u.kind == 'real' else 'nls'


def diagnostics_for(u: Field, equation: str, frame_speed: float = 1.0,
                    distance_fn: Optional[DistanceFn] = None) -> Dict[str, float]:
    record = {
        'l2': l2_norm(u),
        'mass': mass(u),
        'transverse_l2': transverse_l2(u),
        'sup': u.sup(),
    }
    if equation == 'kp':
        record['hamiltonian'] = kp_hamiltonian(u, frame_speed)
    else:
        record['hamiltonian'] = nls_hamiltonian(u)
    if distance_fn is not None:
        record['distance'] = float(distance_fn(u))
    return record


def evolve(u0: Field, config: IntegratorConfig, callbacks: Iterable[Callback] = (),
           equation: Optional[str] = None, frame_speed: float = 1.0,
           distance_fn: Optional[DistanceFn] = None, keep_fields: bool = True) -> Trajectory:
    """
    Integrates from config.t_start to config.t_end. Deterministic: identical
    inputs give bit-identical trajectories.
    """
    equation = equation or infer_equation(u0)
    if equation == 'kp':
        check_zero_modes(transform_forward(u0))
    else:
        u0 = u0 if u0.kind == 'complex' else u0.as_complex()

    stepper = make_stepper(equation, u0.grid, config.dt, config.scheme, config.dealias, frame_speed)
    initial_sup = u0.sup()
    stepper.check_stability(initial_sup)
    callbacks = list(callbacks)
    steps = config.steps
    log.debug(f"evolve {equation}: {steps} steps of dt={config.dt} ({config.scheme}) "
              f"from t={config.t_start} on grid {u0.grid.shape}")

    trajectory = Trajectory(equation=equation)

    def sample(t: float, u: Field) -> bool:
        record = diagnostics_for(u, equation, frame_speed, distance_fn)
        if not np.all(np.isfinite(u.values)):
            raise BlowUpSuspected(f"Non-finite values at t={t:.4f}", t=t)
        if equation == 'nls' and initial_sup > 0 and record['sup'] > settings.BLOWUP_FACTOR * initial_sup:
            raise BlowUpSuspected(f"sup|u|={record['sup']:.4g} exceeds {settings.BLOWUP_FACTOR}x "
                                  f"the initial {initial_sup:.4g} at t={t:.4f}", t=t, sup=record['sup'])
        trajectory.times.append(t)
        trajectory.diagnostics.append(record)
        if keep_fields:
            trajectory.fields.append(u)
        for callback in callbacks:
            if callback(t, u, record):
                trajectory.stopped_early = True
                trajectory.stop_reason = f"callback {getattr(callback, '__name__', type(callback).__name__)} at t={t:.4f}"
                return True
        return False

    if sample(config.t_start, u0):
        trajectory.final = u0
        return trajectory

    v = stepper.to_state(u0)
    u = u0
    for n in range(1, steps + 1):
        v = stepper.step_state(v, config.t_start + (n - 1) * config.dt)
        if n % config.sample_stride == 0 or n == steps:
            u = stepper.to_field(v)
            if sample(config.t_start + n * config.dt, u):
                break

    trajectory.final = u
    if trajectory.stopped_early:
        log.info(f"evolve {equation}: stopped early ({trajectory.stop_reason})")
    return trajectory
