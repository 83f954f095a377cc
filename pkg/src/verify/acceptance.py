# /root/pkg/src/verify/acceptance.py

"""
Acceptance Suite

Purpose:
Runs the lab's acceptance checks behind the `verify` command and renders a
pass/fail table. Every check is tagged with a tier:
- trivial: closed forms and small dense eigenproblems (seconds),
- derived: eigenmodes, resolvents, evolutions and iterates (minutes),
- sweep:   escape-time sweeps (tens of minutes, uses the worker pool).
`verify --quick` runs the trivial tier only.

Dependencies:
- numpy (external library)
- src.spectrum, src.solitons, src.evolution, src.expansion, src.lab
- src.utils.fitting, src.core.settings, src.utils.logger

Expected Input: quick flag, optional check names.
Expected Output: list of CheckResult (one 'verify' table row each).
"""

import math
import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.core import settings
from src.evolution.integrators import IntegratorConfig, evolve
from src.evolution.invariants import mass, nls_hamiltonian
from src.evolution.scaling import kp_scaling_symmetry_check
from src.expansion.grenier import (approximate_solution, iterate_growth_rates, residual_norm,
                                   uniform_time_grid)
from src.grid.domain import Field, Grid2D, Spectrum1D, l2_norm
from src.lab.instability import ExperimentSpec, growth_window, measure_growth_rate, scaling_fit, seeded_trajectory
from src.solitons.profiles import SolitonSpec, kdv_Q, kdv_Q_prime, nls_Q, nls_Q_prime, stationarity_residual
from src.spectrum import kp as kp_spectrum
from src.spectrum import nls as nls_spectrum
from src.utils.fitting import linear_fit
from src.utils.logger import log

TIERS = ('trivial', 'derived', 'sweep')
KP_L = 4.0
KP_MU = 1.650115
KP_SIGMA = 0.187672

CheckOutcome = Tuple[float, str, bool]


@dataclass
class CheckResult:
    name: str
    tier: str
    value: Optional[float]
    target: str
    passed: bool
    seconds: float = 0.0
    detail: str = ''

    def row(self) -> list:
        return [self.name, self.tier, self.value, self.target, self.passed]


@dataclass(frozen=True)
class Check:
    name: str
    tier: str
    run: Callable[[], CheckOutcome]


REGISTRY: List[Check] = []


def check(name: str, tier: str):
    """Registers a function returning (value, target, passed)."""
    if tier not in TIERS:
        raise ValueError(f"Unknown tier '{tier}'")

    def register(fn: Callable[[], CheckOutcome]) -> Callable[[], CheckOutcome]:
        REGISTRY.append(Check(name=name, tier=tier, run=fn))
        return fn

    return register


# --- Shared fixtures ---

def _perturbed(grid: Grid2D, family: str, amplitude: float = 1e-3) -> Field:
    """Soliton plus a small zero-mean transverse bump Q'(x) cos(y/L)."""
    X, Y = grid.mesh()
    if family == 'kdv':
        return Field(grid, kdv_Q(X) + amplitude * kdv_Q_prime(X) * np.cos(Y / grid.L), 'real')
    values = nls_Q(X) + amplitude * nls_Q_prime(X) * np.cos(Y / grid.L)
    return Field(grid, values.astype(complex), 'complex')


def _relative_drift(series: Sequence[float]) -> float:
    values = np.asarray(series, dtype=float)
    return float(np.max(np.abs(values - values[0])) / abs(values[0]))


# --- Trivial tier ---

@check('kp_threshold', 'trivial')
def check_kp_threshold() -> CheckOutcome:
    below = kp_spectrum.admissible_modes(2.0)
    above = [p.k for p in kp_spectrum.admissible_modes(2.5)]
    edge = kp_spectrum.admissible_modes(kp_spectrum.KP_THRESHOLD)
    past = kp_spectrum.admissible_modes(kp_spectrum.KP_THRESHOLD * (1.0 + 1e-12))
    passed = not below and above == [1] and not edge and [p.k for p in past] == [1]
    return kp_spectrum.KP_THRESHOLD, 'L=2: none, L=2.5: k=1, edge 4/sqrt3', passed


@check('kp_dispersion_L4', 'trivial')
def check_kp_dispersion() -> CheckOutcome:
    point = kp_spectrum.most_unstable_point(KP_L)
    report = kp_spectrum.verify_algebraic_system(point)
    brute = kp_spectrum.brute_force_most_unstable(KP_L)
    passed = (point.k == 1 and abs(point.mu - KP_MU) < 1e-6 and abs(point.sigma - KP_SIGMA) < 1e-6
              and report.ok() and brute.k == point.k and abs(brute.mu - point.mu) < 1e-4)
    return point.sigma, f'mu={KP_MU}, sigma={KP_SIGMA}, residuals<1e-10', passed


@check('kp_L_operator_spectrum', 'trivial')
def check_L_spectrum() -> CheckOutcome:
    values = np.sort(kp_spectrum.L_operator_spectrum(Grid2D.line(settings.NX, settings.X_DEFAULT)))
    expected = np.array([-1.25, 0.0, 0.75])
    if values.size != expected.size:
        return float(values.size), '{-5/4, 0, 3/4}', False
    error = float(np.max(np.abs(values - expected)))
    return error, '{-5/4, 0, 3/4} within 1e-6', error < 1e-6


@check('nls_Lpm_spectrum', 'trivial')
def check_Lpm_spectrum() -> CheckOutcome:
    spectra = nls_spectrum.lpm_spectrum(nls_spectrum.default_grid())
    plus = np.sort(spectra['plus'])[:2]
    minus = np.sort(spectra['minus'])[:1]
    error = max(float(np.max(np.abs(plus - [-3.0, 0.0]))), float(np.max(np.abs(minus))))
    return error, 'L+ {-3, 0}, L- {0} within 1e-6', error < 1e-6


@check('nls_theta', 'trivial')
def check_theta() -> CheckOutcome:
    theta = nls_spectrum.theta_ratio()
    return theta, '1/sqrt3 within 1e-8', abs(theta - 1.0 / math.sqrt(3.0)) < 1e-8


@check('soliton_stationarity', 'trivial')
def check_soliton_stationarity() -> CheckOutcome:
    grid = Grid2D.line(settings.NX, settings.X_DEFAULT)
    residual = max(stationarity_residual(SolitonSpec('kdv'), grid),
                   stationarity_residual(SolitonSpec('nls'), grid))
    return residual, '< 1e-8', residual < 1e-8


# --- Derived tier ---

@check('kp_eigenmode_residual', 'derived')
def check_eigenmode_residual() -> CheckOutcome:
    point = kp_spectrum.most_unstable_point(KP_L)
    fine = kp_spectrum.mode_residual(kp_spectrum.eigenprofile(point, kp_spectrum.mode_grid(point, 1024)))
    coarse = kp_spectrum.mode_residual(kp_spectrum.eigenprofile(point, kp_spectrum.mode_grid(point, 512)))
    drop = coarse / fine if fine > 0 else math.inf
    log.info(f"Eigenmode residual: Nx=512 {coarse:.3e}, Nx=1024 {fine:.3e} (drop {drop:.1f}x)")
    return fine, '< 1e-8, >= 10x drop from Nx=512', fine < 1e-8 and drop >= 10.0


@check('nls_bifurcation', 'derived')
def check_bifurcation() -> CheckOutcome:
    report = nls_spectrum.bifurcation_check()
    passed = abs(report.omega1_unstable - 2.0) <= 0.02 * 2.0 and report.max_unstable_count <= 1
    return report.omega1_unstable, 'omega1 = 2 within 2%, one unstable pair', passed


@check('kp_resolvent_identity', 'derived')
def check_resolvent() -> CheckOutcome:
    point = kp_spectrum.most_unstable_point(KP_L)
    grid = kp_spectrum.mode_grid(point, 512)
    H = Spectrum1D(grid, np.exp(-grid.x ** 2 / 16.0).astype(complex), mode=point.k)
    taus = (0.0, 1.0, 10.0, 100.0)
    records = kp_spectrum.resolvent_sweep(point.k / point.L, point.sigma + 0.1, taus, H, point.sigma)
    worst = max(r.identity_residual for r in records)
    trend = linear_fit(np.log1p(taus), np.log([r.ratio_s1 for r in records])).slope
    log.info(f"Resolvent sweep: identity residual {worst:.2e}, log-ratio trend {trend:.3f}")
    return worst, 'identity < 1e-10, no growth of |w|_1/|H|_2', worst < 1e-10 and trend <= 0.05


@check('kp_conservation', 'derived')
def check_kp_conservation() -> CheckOutcome:
    grid = Grid2D(Nx=settings.NX, Ny=settings.NY, X=settings.X_DEFAULT, L=KP_L)
    config = IntegratorConfig(dt=settings.DT_KP, t_end=10.0, sample_stride=settings.SAMPLE_STRIDE)
    trajectory = evolve(_perturbed(grid, 'kdv'), config, keep_fields=False)
    drift = _relative_drift(trajectory.series('l2') ** 2)

    Q = Field.from_profile(grid, kdv_Q(grid.x))
    still = evolve(Q, config, keep_fields=False).final
    moved = float(np.max(np.abs(still.values - Q.values)))
    log.info(f"KP-I: L2 drift {drift:.2e}, soliton displacement {moved:.2e}")
    return drift, 'int u^2 drift < 1e-8, Q stationary to 1e-8', drift < 1e-8 and moved < 1e-8


def _nls_grid() -> Grid2D:
    return Grid2D(Nx=settings.NLS_NX, Ny=settings.NY, X=settings.NLS_X, L=settings.NLS_L)


def _nls_config(t_end: float) -> IntegratorConfig:
    return IntegratorConfig(dt=settings.DT_NLS, scheme='exponential-rk4', t_end=t_end,
                            sample_stride=settings.SAMPLE_STRIDE, dealias=settings.DEALIAS)


def nls_ground_state_displacement(t_end: float = 10.0) -> float:
    """sup |u(t_end) - Q| for u(0) = Q on the default NLS grid."""
    grid = _nls_grid()
    Q = Field.from_profile(grid, nls_Q(grid.x).astype(complex), 'complex')
    still = evolve(Q, _nls_config(t_end), equation='nls', keep_fields=False).final
    moved = float(np.max(np.abs(still.values - Q.values)))
    log.info(f"NLS ground state after t={t_end}: displacement {moved:.2e}, mass {mass(still):.10f}, "
             f"H {nls_hamiltonian(still):.10f}")
    return moved


@check('nls_conservation', 'derived')
def check_nls_conservation() -> CheckOutcome:
    trajectory = evolve(_perturbed(_nls_grid(), 'nls'), _nls_config(10.0), equation='nls', keep_fields=False)
    drift = max(_relative_drift(trajectory.series('mass')), _relative_drift(trajectory.series('hamiltonian')))
    moved = nls_ground_state_displacement(10.0)
    log.info(f"NLS: mass/Hamiltonian drift {drift:.2e}")
    return drift, 'mass and H drift < 1e-8, Q stationary to 1e-8', drift < 1e-8 and moved < 1e-8


GROWTH_DELTA = 1e-6
GROWTH_T_END = 20.0


def _growth_spec(equation: str, L: float) -> ExperimentSpec:
    dt = settings.DT_KP if equation == 'kp' else settings.DT_NLS
    integrator = IntegratorConfig(dt=dt, scheme='exponential-rk4', t_end=GROWTH_T_END,
                                  sample_stride=settings.SAMPLE_STRIDE)
    return ExperimentSpec(equation=equation, L=L, delta=GROWTH_DELTA, integrator=integrator, M=0, Ny=8)


def linear_growth(equation: str, L: float, tolerance: float, t_end: float = GROWTH_T_END) -> CheckOutcome:
    """||Pi u|| slope over the linear-regime window against the seed's sigma0."""
    trajectory, seed = seeded_trajectory(_growth_spec(equation, L), t_end=t_end)
    window = growth_window(seed.sigma, GROWTH_DELTA, trajectory.times[-1])
    rate = measure_growth_rate(trajectory, seed.sigma, GROWTH_DELTA, window=window).slope
    error = abs(rate - seed.sigma) / seed.sigma
    log.info(f"{equation} growth over [{window[0]:.2f}, {window[1]:.2f}]: {rate:.6f} vs sigma0 {seed.sigma:.6f}")
    return rate, f'sigma0={seed.sigma:.6f} within {tolerance:.0%}', error <= tolerance


@check('kp_linear_growth', 'derived')
def check_kp_growth() -> CheckOutcome:
    return linear_growth('kp', KP_L, 0.01)


@check('nls_linear_growth', 'derived')
def check_nls_growth() -> CheckOutcome:
    return linear_growth('nls', settings.NLS_L, 0.02)


@check('kp_iterate_growth', 'derived')
def check_iterate_growth() -> CheckOutcome:
    M = settings.ORDER_M
    stride = settings.SAMPLE_STRIDE
    times = uniform_time_grid(20.0, settings.DT_KP * stride)
    approx = approximate_solution('kp', M, KP_L, 1e-3, times, substeps=stride)
    fits = iterate_growth_rates(approx.iterates)
    worst = max(abs(fit.slope - (k + 1) * approx.sigma0) / ((k + 1) * approx.sigma0) for k, fit in fits.items())

    t = 10.0
    ratio = residual_norm(approx, t) / residual_norm(approx.with_delta(approx.delta / 2.0), t)
    expected = 2.0 ** (M + 2)
    log.info(f"Iterate slopes worst error {worst:.2%}; residual ratio {ratio:.3f} (expected {expected:.0f})")
    passed = worst <= 0.03 and abs(ratio - expected) <= 0.1 * expected
    return worst, '(k+1) sigma0 within 3%, F ratio 2^(M+2) within 10%', passed


@check('kp_scaling_symmetry', 'derived')
def check_scaling_symmetry() -> CheckOutcome:
    grid = Grid2D(Nx=256, Ny=16, X=settings.X_DEFAULT, L=KP_L)
    X, Y = grid.mesh()
    values = 0.1 * np.cos(3.0 * np.pi * X / grid.X) + 0.05 * np.sin(5.0 * np.pi * X / grid.X) * np.cos(Y / grid.L)
    report = kp_scaling_symmetry_check(Field(grid, values, 'real'), 2.0, t_end=1.0)
    return report.mismatch, 'lambda=2 mismatch < 1e-6', report.ok()


# --- Sweep tier ---

def _sweep_check(equation: str, L: float) -> CheckOutcome:
    dt = settings.DT_KP if equation == 'kp' else settings.DT_NLS
    integrator = IntegratorConfig(dt=dt, scheme='exponential-rk4', t_end=settings.T_MAX,
                                  sample_stride=settings.SAMPLE_STRIDE)
    template = ExperimentSpec(equation=equation, L=L, delta=settings.DELTAS[0], integrator=integrator,
                              t_max=settings.T_MAX, kappa=settings.KAPPA)
    result = scaling_fit(template, settings.DELTAS)
    passed = result.relative_slope_error <= 0.10 and result.fit.r_squared > 0.99
    return result.fit.slope, f'1/sigma0={result.expected_slope:.4f} within 10%, r^2 > 0.99', passed


@check('kp_escape_time_fit', 'sweep')
def check_kp_escape() -> CheckOutcome:
    return _sweep_check('kp', KP_L)


@check('nls_escape_time_fit', 'sweep')
def check_nls_escape() -> CheckOutcome:
    L0 = nls_spectrum.smallest_unstable_period()
    if settings.NLS_L <= L0:
        return settings.NLS_L, f'L > L0={L0:.4f}', False
    return _sweep_check('nls', settings.NLS_L)


# --- Runner ---

def selected_checks(quick: bool = False, names: Optional[Sequence[str]] = None) -> List[Check]:
    checks = [c for c in REGISTRY if not quick or c.tier == 'trivial']
    if names:
        unknown = set(names) - {c.name for c in REGISTRY}
        if unknown:
            raise ValueError(f"Unknown checks: {sorted(unknown)}")
        checks = [c for c in checks if c.name in names]
    return checks


def run_check(item: Check) -> CheckResult:
    start = time.perf_counter()
    try:
        value, target, passed = item.run()
        result = CheckResult(item.name, item.tier, float(value), target, bool(passed))
    except Exception as e:
        log.error(f"Check {item.name} raised {type(e).__name__}: {e}", exc_info=True)
        result = CheckResult(item.name, item.tier, None, '', False, detail=f"{type(e).__name__}: {e}")
    result.seconds = time.perf_counter() - start
    log.info(f"[{'PASS' if result.passed else 'FAIL'}] {item.name} ({item.tier}) "
             f"value={result.value} target: {result.target} ({result.seconds:.1f}s)")
    return result


def run_suite(quick: bool = False, names: Optional[Sequence[str]] = None) -> List[CheckResult]:
    checks = selected_checks(quick, names)
    log.info(f"Running {len(checks)} acceptance checks ({'quick' if quick else 'full'} suite)")
    return [run_check(c) for c in checks]


def format_table(results: Sequence[CheckResult]) -> str:
    header = f"{'check':<26} {'tier':<8} {'result':<6} {'value':>14}  target"
    lines = [header, '-' * len(header)]
    for r in results:
        value = 'error' if r.value is None else f"{r.value:.6g}"
        lines.append(f"{r.name:<26} {r.tier:<8} {'PASS' if r.passed else 'FAIL':<6} {value:>14}  {r.target}")
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    return '\n'.join(lines)
