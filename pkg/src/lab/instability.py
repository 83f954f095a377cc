# /root/pkg/src/lab/instability.py

"""
Instability Experiments

Purpose:
Seeds Q + delta u^0, evolves the full equation, tracks the orbital distance
and detects the escape time T_delta (first time the distance reaches eta).
Measured escape times are compared with log(kappa/delta)/sigma0, and a
delta-sweep fits T_delta against ln(1/delta). Along the run the remainder
w = u - u_background - u_ap is monitored, u_background being the evolved
delta = 0 solution.

Dependencies:
- numpy (external library)
- concurrent.futures (standard Python library)
- src.expansion.grenier, src.evolution.integrators, src.lab.distance
- src.utils.fitting, src.core.settings, src.core.errors, src.utils.logger

Expected Input: ExperimentSpec (single run) or a template plus deltas (sweep).
Expected Output: EscapeReport / SweepResult.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core import settings
from src.core.errors import ConfigError
from src.evolution.integrators import IntegratorConfig, Trajectory, evolve
from src.expansion.grenier import (ApproxSolution, SeedIterate, assemble, build_iterates_kp,
                                   build_iterates_nls, required_ny, seed_mode, uniform_time_grid)
from src.grid.domain import Field, Grid2D, l2_norm
from src.lab.distance import OrbitalDistance, kp_orbit, nls_orbit
from src.solitons.profiles import SolitonSpec, sample_soliton
from src.spectrum import kp as kp_spectrum
from src.utils.fitting import LinearFit, fit_growth_rate, linear_fit
from src.utils.logger import log

# ||Pi u|| leaves the linear regime once delta e^{sigma0 t} reaches this size
GROWTH_SATURATION = 1e-2


@dataclass(frozen=True)
class ExperimentSpec:
    equation: str
    L: float
    delta: float
    integrator: IntegratorConfig
    M: int = 3
    eta_threshold: Optional[float] = None
    t_max: float = 80.0
    kappa: float = 0.1
    Nx: Optional[int] = None
    Ny: Optional[int] = None
    track_remainder: bool = False

    def __post_init__(self):
        if self.equation not in ('kp', 'nls'):
            raise ConfigError(f"Unknown equation '{self.equation}'", field_path='run.equation')
        if self.L <= 0:
            raise ConfigError(f"L must be positive, got {self.L}", field_path='run.L')
        if self.kappa <= 0:
            raise ConfigError(f"kappa must be positive, got {self.kappa}", field_path='experiment.kappa')
        if not 0.0 <= self.delta <= self.kappa:
            raise ConfigError(f"delta={self.delta} must lie in [0, kappa={self.kappa}]", field_path='run.delta')
        if self.eta_threshold is not None and self.eta_threshold <= 0:
            raise ConfigError(f"eta must be positive, got {self.eta_threshold}", field_path='experiment.eta')
        if self.M < 0:
            raise ConfigError(f"M must be >= 0, got {self.M}", field_path='expansion.M')
        if self.t_max <= 0:
            raise ConfigError(f"t_max must be positive, got {self.t_max}", field_path='experiment.t_max')


@dataclass
class EscapeReport:
    equation: str
    L: float
    delta: float
    kappa: float
    sigma0: float
    k0: int
    eta: float
    c_s: float
    escaped: bool
    T_delta_measured: Optional[float]
    T_delta_predicted: float
    times: List[float] = field(default_factory=list)
    distance_series: List[float] = field(default_factory=list)
    transverse_series: List[float] = field(default_factory=list)
    remainder_series: List[float] = field(default_factory=list)
    remainder_norm: Optional[float] = None
    beyond_theory: bool = False

    def summary(self) -> Dict[str, object]:
        data = asdict(self)
        for key in ('times', 'distance_series', 'transverse_series', 'remainder_series'):
            data.pop(key)
        data['escape_not_reached'] = not self.escaped
        return data


@dataclass
class SweepResult:
    fit: LinearFit
    expected_slope: float
    kappa_calibrated: float
    reports: List[EscapeReport]

    @property
    def relative_slope_error(self) -> float:
        return abs(self.fit.slope - self.expected_slope) / self.expected_slope

    def rows(self) -> List[List[float]]:
        """(delta, ln(1/delta), T measured, T predicted with the calibrated kappa)."""
        rows = []
        for r in self.reports:
            predicted = math.log(self.kappa_calibrated / r.delta) / r.sigma0
            rows.append([r.delta, math.log(1.0 / r.delta), r.T_delta_measured, predicted])
        return rows


# --- Setup helpers ---

def experiment_grid(seed: SeedIterate, spec: ExperimentSpec) -> Grid2D:
    line = seed.grid
    Ny = max(spec.Ny or settings.NY, required_ny(spec.M, seed.k0))
    return Grid2D(Nx=line.Nx, Ny=Ny, X=line.X, L=spec.L)


def soliton_field(equation: str, grid: Grid2D) -> Field:
    family = 'kdv' if equation == 'kp' else 'nls'
    return sample_soliton(SolitonSpec(family=family), grid)


def orbit_for(equation: str, grid: Grid2D) -> OrbitalDistance:
    return kp_orbit(grid) if equation == 'kp' else nls_orbit(grid)


def default_eta(c_s: float, kappa: float) -> float:
    """Half of the c_s kappa / 2 bound."""
    return 0.5 * c_s * kappa / 2.0


def predicted_escape_time(delta: float, kappa: float, sigma0: float) -> float:
    if delta <= 0:
        return math.inf
    return math.log(kappa / delta) / sigma0


def _seed(spec: ExperimentSpec) -> SeedIterate:
    times = np.array([0.0, spec.integrator.dt])
    grid = None
    if spec.Nx is not None:
        if spec.equation == 'kp':
            grid = kp_spectrum.mode_grid(kp_spectrum.most_unstable_point(spec.L), spec.Nx)
        else:
            grid = Grid2D.line(spec.Nx, settings.NLS_X)
    return seed_mode(spec.equation, spec.L, grid, times)


class EscapeDetector:
    """Stops the run once the orbital distance reaches eta."""

    def __init__(self, eta: float):
        self.eta = eta
        self.previous: Optional[Tuple[float, float]] = None
        self.crossing: Optional[float] = None

    def __call__(self, t: float, u: Field, record: Dict[str, float]) -> bool:
        d = record['distance']
        if d >= self.eta:
            self.crossing = self._interpolate(t, d)
            return True
        self.previous = (t, d)
        return False

    def _interpolate(self, t: float, d: float) -> float:
        if self.previous is None:
            return t
        t0, d0 = self.previous
        if d0 <= 0 or d <= d0:
            return t
        # distance grows exponentially between samples
        fraction = (math.log(self.eta) - math.log(d0)) / (math.log(d) - math.log(d0))
        return t0 + fraction * (t - t0)


class RemainderProbe:
    """Records ||u(t) - u_background(t) - u_ap(t)|| at every sample."""

    def __init__(self, approx: ApproxSolution, grid: Grid2D, background: Dict[float, Field]):
        self.approx = approx
        self.grid = grid
        self.background = background
        self.series: List[Tuple[float, float]] = []

    def _background_at(self, t: float) -> Field:
        key = min(self.background, key=lambda s: abs(s - t))
        return self.background[key]

    def __call__(self, t: float, u: Field, record: Dict[str, float]) -> bool:
        u_ap = assemble(self.approx, t, self.grid)
        w = u - self._background_at(t) - u_ap
        norm = l2_norm(w)
        record['remainder'] = norm
        self.series.append((t, norm))
        return False


def background_fields(spec: ExperimentSpec, grid: Grid2D) -> Dict[float, Field]:
    """The evolved delta = 0 solution at every sample time."""
    Q = soliton_field(spec.equation, grid)
    config = replace(spec.integrator, t_end=spec.t_max)
    trajectory = evolve(Q, config, equation=spec.equation)
    return {round(t, 12): f for t, f in zip(trajectory.times, trajectory.fields)}


def approx_for(spec: ExperimentSpec, seed: SeedIterate, t_end: float) -> ApproxSolution:
    spacing = spec.integrator.dt * spec.integrator.sample_stride
    times = uniform_time_grid(max(t_end, spacing), spacing)
    builder = build_iterates_kp if spec.equation == 'kp' else build_iterates_nls
    iterates = builder(spec.M, spec.L, times, seed=_reseed(seed, times),
                       substeps=spec.integrator.sample_stride)
    return ApproxSolution(iterates=iterates, delta=spec.delta, equation=spec.equation,
                          sigma0=seed.sigma, k0=seed.k0, L=spec.L)


def _reseed(seed: SeedIterate, times: np.ndarray) -> SeedIterate:
    fresh = SeedIterate(k=0, equation=seed.equation, grid=seed.grid, times=times, profiles=seed.profiles,
                        rates=seed.rates, sigma=seed.sigma, k0=seed.k0)
    fresh.modes = {m: np.exp(np.outer(times, [seed.rates[m]])) * p[None, :] for m, p in seed.profiles.items()}
    return fresh


# --- Experiments ---

def run_experiment(spec: ExperimentSpec) -> EscapeReport:
    """Q + delta u^0, evolved until the orbital distance reaches eta or t_max."""
    seed = _seed(spec)
    grid = experiment_grid(seed, spec)
    Q = soliton_field(spec.equation, grid)
    u0_seed = seed.to_field(0.0, grid)
    c_s = l2_norm(u0_seed)
    eta = spec.eta_threshold or default_eta(c_s, spec.kappa)
    initial = Q + spec.delta * u0_seed

    orbit = orbit_for(spec.equation, grid)
    detector = EscapeDetector(eta)
    callbacks = [detector]
    probe = None
    if spec.track_remainder and spec.delta > 0:
        approx = approx_for(spec, seed, spec.t_max)
        probe = RemainderProbe(approx, grid, background_fields(spec, grid))
        callbacks.insert(0, probe)

    config = replace(spec.integrator, t_end=spec.t_max)
    log.info(f"Experiment {spec.equation} L={spec.L} delta={spec.delta:.3e}: sigma0={seed.sigma:.6f}, "
             f"k0={seed.k0}, eta={eta:.4e}, grid {grid.shape} X={grid.X}")
    trajectory = evolve(initial, config, callbacks=callbacks, equation=spec.equation,
                        frame_speed=1.0, distance_fn=orbit, keep_fields=False)

    escaped = detector.crossing is not None
    report = EscapeReport(
        equation=spec.equation, L=spec.L, delta=spec.delta, kappa=spec.kappa, sigma0=seed.sigma, k0=seed.k0,
        eta=eta, c_s=c_s, escaped=escaped, T_delta_measured=detector.crossing,
        T_delta_predicted=predicted_escape_time(spec.delta, spec.kappa, seed.sigma),
        times=list(trajectory.times), distance_series=list(trajectory.series('distance')),
        transverse_series=list(trajectory.series('transverse_l2')),
    )
    if probe is not None and probe.series:
        report.remainder_series = [value for _, value in probe.series]
        report.remainder_norm = probe.series[-1][1]
    # existence for NLS is only guaranteed up to the escape time
    report.beyond_theory = spec.equation == 'nls' and not escaped
    if escaped:
        log.info(f"delta={spec.delta:.3e}: escape at T={report.T_delta_measured:.4f} "
                 f"(predicted {report.T_delta_predicted:.4f})")
    else:
        log.warning(f"delta={spec.delta:.3e}: escape not reached by t_max={spec.t_max}")
    return report


def seeded_trajectory(spec: ExperimentSpec, t_end: Optional[float] = None) -> Tuple[Trajectory, SeedIterate]:
    """Evolution of Q + delta u^0 without escape detection (linearized-growth runs)."""
    seed = _seed(spec)
    grid = experiment_grid(seed, spec)
    initial = soliton_field(spec.equation, grid) + spec.delta * seed.to_field(0.0, grid)
    config = replace(spec.integrator, t_end=t_end or spec.t_max)
    trajectory = evolve(initial, config, equation=spec.equation, frame_speed=1.0, keep_fields=False)
    return trajectory, seed


def growth_window(sigma0: float, delta: float, t_end: float,
                  saturation: float = GROWTH_SATURATION) -> Tuple[float, float]:
    """
    Linear-regime window [1/sigma0, ln(saturation/delta)/sigma0], clipped to
    [0, t_end]. Past the upper end a seed of size delta has left the
    linear regime.
    """
    if sigma0 <= 0 or delta <= 0:
        raise ConfigError(f"growth_window needs sigma0 > 0 and delta > 0 (got {sigma0}, {delta})",
                          field_path='run.delta')
    start = 1.0 / sigma0
    stop = min(math.log(saturation / delta) / sigma0, t_end)
    if stop <= start:
        # delta too large for a linear regime past 1/sigma0
        return 0.0, min(start, t_end)
    return start, stop


def measure_growth_rate(trajectory: Trajectory, sigma0: float, delta: float,
                        window: Optional[Tuple[float, float]] = None,
                        series: str = 'transverse_l2') -> LinearFit:
    """Log-linear fit of a diagnostic series, by default ||Pi u||, over the linear regime."""
    window = window or growth_window(sigma0, delta, trajectory.times[-1])
    log.debug(f"Growth-rate window [{window[0]:.3f}, {window[1]:.3f}] for sigma0={sigma0:.6f}, delta={delta:.1e}")
    return fit_growth_rate(trajectory.times, trajectory.series(series), window)


def _run_all(specs: Sequence[ExperimentSpec]) -> List[EscapeReport]:
    if settings.WORKERS > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=settings.WORKERS) as pool:
            return list(pool.map(run_experiment, specs))
    return [run_experiment(s) for s in specs]


def scaling_fit(template: ExperimentSpec, deltas: Sequence[float]) -> SweepResult:
    """
    Fits T_delta against ln(1/delta) over a delta sweep. kappa is calibrated
    on the largest delta: kappa = delta_max e^{sigma0 T(delta_max)}.
    """
    deltas = sorted((float(d) for d in deltas), reverse=True)
    if len(deltas) < 2 or deltas[-1] <= 0:
        raise ConfigError("scaling_fit needs at least two positive deltas", field_path='run.deltas')
    kappa = max(template.kappa, deltas[0])
    specs = [replace(template, delta=d, kappa=kappa) for d in deltas]
    reports = _run_all(specs)
    escaped = [r for r in reports if r.escaped]
    if len(escaped) < 2:
        raise ConfigError(f"Only {len(escaped)} of {len(reports)} runs escaped before t_max={template.t_max}",
                          field_path='experiment.t_max')
    fit = linear_fit([math.log(1.0 / r.delta) for r in escaped], [r.T_delta_measured for r in escaped])
    largest = escaped[0]
    sigma0 = largest.sigma0
    kappa_calibrated = largest.delta * math.exp(sigma0 * largest.T_delta_measured)
    log.info(f"Escape-time fit: slope={fit.slope:.4f} (expected {1.0 / sigma0:.4f}), r^2={fit.r_squared:.5f}")
    return SweepResult(fit=fit, expected_slope=1.0 / sigma0, kappa_calibrated=kappa_calibrated, reports=escaped)
