# /root/pkg/src/expansion/grenier.py

"""
High-Order Approximate Solutions

Purpose:
Builds u_ap = delta (u^0 + sum_{k=1}^M delta^k u^k) around the soliton Q for
both equations, from the most unstable eigenmode:
- KP-I:  d_t u^k + A u^k = -1/2 (sum_{a+b=k-1} u^a u^b)_x,
- NLS:   i d_t u^k + A u^k = -sum_{a+b=k-1} (2Q u^a conj(u^b) + Q u^a u^b)
                             -sum_{a+b+c=k-2} u^a conj(u^b) u^c,
with u^k(0) = 0 for k >= 1. Fields are handled per transverse mode,
u = sum_m u_m(x) e^{imy/L}; products become convolutions over m.

Orders 1..M are advanced together as one triangular system with the
exponential integrator of the evolution module, the seed u^0 being evaluated
analytically at every stage. KP-I iterates are real, so only m >= 0 is
stored (u_{-m} = conj u_m).

Dependencies:
- numpy, scipy (external libraries)
- src.spectrum.kp, src.spectrum.nls, src.evolution.steppers, src.grid.domain
- src.utils.fitting, src.core.settings, src.utils.logger

Expected Input: expansion order M, transverse period L, uniform time grid.
Expected Output: Iterate lists, ApproxSolution, assembled fields and residuals.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import BarycentricInterpolator

from src.core import settings
from src.core.errors import ConfigError, DomainError
from src.evolution.steppers import ExponentialRK4
from src.grid.domain import (Field, Grid2D, dealias_mask, derivative_symbol, field_from_modes,
                             inverse_derivative_symbol)
from src.solitons.profiles import kdv_Q, nls_Q
from src.spectrum import kp as kp_spectrum
from src.spectrum import nls as nls_spectrum
from src.utils.fitting import LinearFit, fit_growth_rate
from src.utils.logger import log

EQUATIONS = ('kp', 'nls')
Modes = Dict[int, np.ndarray]


def uniform_time_grid(t_end: float, dt: float) -> np.ndarray:
    steps = int(round(t_end / dt))
    if steps < 1:
        raise ConfigError(f"Time grid needs t_end >= dt, got t_end={t_end}, dt={dt}", field_path='expansion.t_end')
    return dt * np.arange(steps + 1)


def mode_support(k: int, k0: int) -> List[int]:
    """Transverse modes a product of k+1 seeds can reach: |m| <= (k+1)k0, step 2k0."""
    top = (k + 1) * k0
    return list(range(-top, top + 1, 2 * k0))


def required_ny(M: int, k0: int) -> int:
    """Smallest power of two whose dealiased band holds the modes of u_ap."""
    needed = 3 * (M + 1) * k0 + 1
    return 1 << (needed - 1).bit_length()


def _with_conjugates(modes: Modes) -> Modes:
    full = dict(modes)
    for m, profile in modes.items():
        if m > 0:
            full[-m] = np.conj(profile)
    return full


def _conjugate_field(modes: Modes) -> Modes:
    """Modes of conj(u): (conj u)_m = conj(u_{-m})."""
    return {-m: np.conj(profile) for m, profile in modes.items()}


def _convolve(a: Modes, b: Modes) -> Modes:
    out: Modes = {}
    for p, pa in a.items():
        for q, qb in b.items():
            product = pa * qb
            if p + q in out:
                out[p + q] = out[p + q] + product
            else:
                out[p + q] = product
    return out


def _accumulate(target: Modes, source: Modes, scale: complex = 1.0) -> None:
    for m, profile in source.items():
        if m in target:
            target[m] = target[m] + scale * profile
        else:
            target[m] = scale * profile


@dataclass
class Iterate:
    """u^k sampled on a uniform time grid: modes[m] has shape (len(times), Nx)."""

    k: int
    equation: str
    grid: Grid2D
    times: np.ndarray
    modes: Dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def hermitian(self) -> bool:
        return self.equation == 'kp'

    def support(self) -> List[int]:
        keys = set(self.modes)
        if self.hermitian:
            keys |= {-m for m in self.modes}
        return sorted(keys)

    def _node(self, t: float) -> Optional[int]:
        dt = self.times[1] - self.times[0] if self.times.size > 1 else 1.0
        n = int(round((t - self.times[0]) / dt))
        if 0 <= n < self.times.size and abs(self.times[n] - t) <= 1e-9 * max(1.0, abs(t)):
            return n
        return None

    def at(self, t: float) -> Modes:
        """Stored modes at t; off-grid times use cubic interpolation over the four nearest nodes."""
        if t < self.times[0] - 1e-12 or t > self.times[-1] + 1e-12:
            raise DomainError(f"t={t} lies outside the iterate time grid [{self.times[0]}, {self.times[-1]}]", t=t)
        n = self._node(t)
        if n is not None:
            return {m: series[n] for m, series in self.modes.items()}
        upper = int(np.searchsorted(self.times, t))
        start = min(max(upper - 2, 0), max(self.times.size - 4, 0))
        nodes = slice(start, start + 4)
        return {m: BarycentricInterpolator(self.times[nodes], series[nodes], axis=0)(t)
                for m, series in self.modes.items()}

    def full_modes(self, t: float) -> Modes:
        modes = self.at(t)
        return _with_conjugates(modes) if self.hermitian else modes

    def to_field(self, t: float, grid: Grid2D) -> Field:
        kind = 'real' if self.hermitian else 'complex'
        return field_from_modes(grid, self.full_modes(t), kind)

    def l2_series(self) -> np.ndarray:
        """|u^k(t)|_{L2} over the cylinder of period 2 pi L."""
        total = np.zeros(self.times.size)
        for m, series in self.modes.items():
            weight = 2.0 if (self.hermitian and m > 0) else 1.0
            total += weight * np.sum(np.abs(series) ** 2, axis=1) * self.grid.dx
        return np.sqrt(2.0 * np.pi * self.grid.L * total)

    def mode_l2_series(self) -> Dict[int, np.ndarray]:
        return {m: np.sqrt(np.sum(np.abs(series) ** 2, axis=1) * self.grid.dx)
                for m, series in sorted(self.modes.items())}


@dataclass
class SeedIterate(Iterate):
    """u^0 = e^{sigma t} sum_m e^{imy/L} profile_m, evaluated analytically."""

    profiles: Dict[int, np.ndarray] = field(default_factory=dict)
    rates: Dict[int, complex] = field(default_factory=dict)
    sigma: float = 0.0
    k0: int = 1

    def at(self, t: float) -> Modes:
        return {m: np.exp(self.rates[m] * t) * profile for m, profile in self.profiles.items()}


@dataclass
class ApproxSolution:
    iterates: List[Iterate]
    delta: float
    equation: str
    sigma0: float
    k0: int
    L: float

    @property
    def order(self) -> int:
        return len(self.iterates) - 1

    @property
    def grid(self) -> Grid2D:
        return self.iterates[0].grid

    @property
    def times(self) -> np.ndarray:
        return self.iterates[-1].times

    def field_grid(self, Ny: Optional[int] = None) -> Grid2D:
        return self.grid.with_transverse(Ny or max(settings.NY, required_ny(self.order, self.k0)), self.L)

    def with_delta(self, delta: float) -> 'ApproxSolution':
        return ApproxSolution(self.iterates, delta, self.equation, self.sigma0, self.k0, self.L)

    def truncated(self, M: int) -> 'ApproxSolution':
        return ApproxSolution(self.iterates[:M + 1], self.delta, self.equation, self.sigma0, self.k0, self.L)


# --- Seeds ---

def _seed_grid_times(times: Optional[np.ndarray]) -> np.ndarray:
    return np.asarray(times if times is not None else uniform_time_grid(1.0, settings.DT_KP), dtype=float)


def seed_mode(equation: str, L: float, grid: Optional[Grid2D] = None,
              times: Optional[np.ndarray] = None) -> SeedIterate:
    """u^0 from the most unstable eigenmode (real for kp, complex for nls)."""
    times = _seed_grid_times(times)
    if equation == 'kp':
        mode = kp_spectrum.most_unstable(L, grid)
        k0, sigma = mode.k, float(mode.sigma)
        profiles = {k0: np.real(mode.V).astype(complex)}
        rates = {k0: complex(sigma)}
        line = mode.grid
    elif equation == 'nls':
        mode = nls_spectrum.most_unstable_nls(L, grid)
        k0, sigma = int(mode.k), complex(mode.sigma)
        profiles = {k0: mode.V1 + 1j * mode.V2, -k0: np.conj(mode.V1) + 1j * np.conj(mode.V2)}
        rates = {k0: sigma, -k0: np.conj(sigma)}
        line = Grid2D(Nx=mode.grid.Nx, Ny=1, X=mode.grid.X, L=L)
        sigma = sigma.real
    else:
        raise ConfigError(f"Unknown equation '{equation}'", field_path='run.equation')

    seed = SeedIterate(k=0, equation=equation, grid=line, times=times, profiles=profiles,
                       rates=rates, sigma=float(sigma), k0=k0)
    seed.modes = {m: np.exp(np.outer(times, [rates[m]])) * profile[None, :]
                  for m, profile in profiles.items()}
    log.debug(f"Seed {equation}: k0={k0}, sigma0={sigma:.6f}, modes {sorted(profiles)}")
    return seed


def seed_residual(seed: SeedIterate, t: float = 0.0) -> float:
    """Relative size of (d_t + A)u^0 (kp) or (i d_t + A)u^0 (nls) at time t."""
    modes = seed.at(t)
    derivative = {m: seed.rates[m] * profile for m, profile in modes.items()}
    if seed.equation == 'kp':
        residual = {m: derivative[m] + _kp_linear_part(profile, seed.grid, m) for m, profile in modes.items()}
    else:
        residual = {m: 1j * derivative[m] + _nls_linear_part(modes, m, seed.grid) for m in modes}
    num = math.sqrt(sum(float(np.sum(np.abs(r) ** 2)) for r in residual.values()))
    den = math.sqrt(sum(float(np.sum(np.abs(p) ** 2)) for p in modes.values()))
    return num / den


# --- Per-mode operators ---

def _kp_linear_part(profile: np.ndarray, grid: Grid2D, m: int) -> np.ndarray:
    """A_j u_m with j = m/L."""
    j = m / grid.L
    D1 = derivative_symbol(grid.xi, 1)
    D3 = derivative_symbol(grid.xi, 3)
    Q = kdv_Q(grid.x)
    coeffs = np.fft.fft(profile)
    out = -D1 * coeffs + D1 * np.fft.fft(Q * profile) + D3 * coeffs
    if m != 0:
        out = out + j * j * inverse_derivative_symbol(grid.xi) * coeffs
    return np.fft.ifft(out)


def _nls_linear_part(modes: Modes, m: int, grid: Grid2D) -> np.ndarray:
    """(A u)_m = (d_xx - j^2 - 1) u_m + 2Q^2 u_m + Q^2 conj(u_{-m})."""
    j = m / grid.L
    Q2 = nls_Q(grid.x) ** 2
    u = modes[m]
    partner = np.conj(modes[-m]) if -m in modes else np.zeros_like(u)
    diffusion = np.fft.ifft((derivative_symbol(grid.xi, 2) - j * j - 1.0) * np.fft.fft(u))
    return diffusion + 2.0 * Q2 * u + Q2 * partner


def kp_mode_symbol(grid: Grid2D, m: int) -> np.ndarray:
    """i(xi + xi^3 + j^2/xi), zero at xi = 0 and Nyquist: the stiff part of -A_j."""
    j = m / grid.L
    xi = grid.xi
    symbol = derivative_symbol(xi, 1) - derivative_symbol(xi, 3)
    if m != 0:
        symbol = symbol - j * j * inverse_derivative_symbol(xi)
    return symbol


def nls_mode_symbol(grid: Grid2D, m: int) -> np.ndarray:
    j = m / grid.L
    return 1j * (derivative_symbol(grid.xi, 2) - j * j - 1.0)


def _x_dealias(grid: Grid2D) -> np.ndarray:
    return dealias_mask(Grid2D.line(grid.Nx, grid.X))[:, 0]


# --- Forcing ---

def kp_forcing(orders: Sequence[Modes], k: int, grid: Grid2D) -> Modes:
    """Modes of -1/2 (sum_{a+b=k-1} u^a u^b)_x from full (both-sign) mode dicts."""
    products: Modes = {}
    for a in range(k):
        _accumulate(products, _convolve(orders[a], orders[k - 1 - a]))
    D1 = derivative_symbol(grid.xi, 1)
    mask = _x_dealias(grid)
    return {m: np.fft.ifft(-0.5 * D1 * mask * np.fft.fft(p)) for m, p in products.items()}


def nls_forcing(orders: Sequence[Modes], k: int, grid: Grid2D) -> Modes:
    """Modes of the right-hand side of the order-k NLS iterate equation."""
    Q = nls_Q(grid.x)
    conj_orders = [_conjugate_field(o) for o in orders]
    total: Modes = {}
    for a in range(k):
        b = k - 1 - a
        _accumulate(total, _convolve(orders[a], conj_orders[b]), -2.0)
        _accumulate(total, _convolve(orders[a], orders[b]), -1.0)
    total = {m: Q * p for m, p in total.items()}
    for a in range(k - 1):
        for b in range(k - 1 - a):
            c = k - 2 - a - b
            _accumulate(total, _convolve(_convolve(orders[a], conj_orders[b]), orders[c]), -1.0)
    mask = _x_dealias(grid)
    return {m: np.fft.ifft(mask * np.fft.fft(p)) for m, p in total.items()}


def forcing(iterates: Sequence[Iterate], k: int, t: float) -> Modes:
    """Forcing of order k at time t from the stored lower orders."""
    orders = [it.full_modes(t) for it in iterates[:k]]
    grid = iterates[0].grid
    if iterates[0].equation == 'kp':
        return kp_forcing(orders, k, grid)
    return nls_forcing(orders, k, grid)


# --- Coupled iterate solve ---

def _slots(M: int, k0: int, equation: str) -> List[Tuple[int, int]]:
    slots = []
    for k in range(1, M + 1):
        for m in mode_support(k, k0):
            if equation == 'kp' and m < 0:
                continue
            slots.append((k, m))
    return slots


def _build_iterates(equation: str, M: int, seed: SeedIterate, times: np.ndarray,
                    substeps: int = 1) -> List[Iterate]:
    if M < 1:
        return [seed]
    grid = seed.grid
    if times.size < 2:
        raise ConfigError("The iterate time grid needs at least two nodes", field_path='expansion.time_grid')
    spacing = np.diff(times)
    if np.max(np.abs(spacing - spacing[0])) > 1e-9 * max(1.0, abs(spacing[0])) or times[0] != 0.0:
        raise ConfigError("The iterate time grid must be uniform and start at 0", field_path='expansion.time_grid')

    slots = _slots(M, seed.k0, equation)
    index = {slot: s for s, slot in enumerate(slots)}
    symbol_fn = kp_mode_symbol if equation == 'kp' else nls_mode_symbol
    symbol = np.stack([symbol_fn(grid, m) for _, m in slots])
    dt = float(spacing[0]) / substeps
    engine = ExponentialRK4(symbol, dt)

    D1 = derivative_symbol(grid.xi, 1)
    Qk = kdv_Q(grid.x)
    Q2 = nls_Q(grid.x) ** 2

    def orders_at(V: np.ndarray, t: float) -> List[Modes]:
        profiles = np.fft.ifft(V, axis=-1)
        orders: List[Modes] = [seed.at(t)] + [{} for _ in range(M)]
        for s, (k, m) in enumerate(slots):
            orders[k][m] = profiles[s]
        if equation == 'kp':
            orders = [_with_conjugates(o) for o in orders]
        return orders

    def rhs(V: np.ndarray, t: float) -> np.ndarray:
        orders = orders_at(V, t)
        out = np.empty_like(V)
        cache: Dict[int, Modes] = {}
        for s, (k, m) in enumerate(slots):
            if k not in cache:
                cache[k] = (kp_forcing if equation == 'kp' else nls_forcing)(orders, k, grid)
            f = cache[k].get(m)
            u = orders[k][m]
            if equation == 'kp':
                explicit = -D1 * np.fft.fft(Qk * u)
                if f is not None:
                    explicit = explicit + np.fft.fft(f)
            else:
                partner = np.conj(orders[k][-m]) if -m in orders[k] else 0.0
                coupling = 2.0 * Q2 * u + Q2 * partner
                if f is not None:
                    coupling = coupling - f
                explicit = 1j * np.fft.fft(coupling)
            out[s] = explicit
        return out

    stored = np.zeros((times.size, len(slots), grid.Nx), dtype=np.complex128)
    V = np.zeros((len(slots), grid.Nx), dtype=np.complex128)
    for n in range(1, times.size):
        t = times[n - 1]
        for sub in range(substeps):
            V = engine.step(V, t + sub * dt, rhs)
        stored[n] = np.fft.ifft(V, axis=-1)

    iterates: List[Iterate] = [seed]
    for k in range(1, M + 1):
        modes = {m: stored[:, index[(k, m)], :] for (kk, m) in slots if kk == k}
        if equation == 'kp' and 0 in modes:
            modes[0] = modes[0].real.astype(np.complex128)
        iterates.append(Iterate(k=k, equation=equation, grid=grid, times=times, modes=modes))
    log.info(f"Built {equation} iterates u^1..u^{M} on {times.size} nodes (t_end={times[-1]:.3f}, "
             f"{len(slots)} mode slots)")
    return iterates


def build_iterates_kp(M: int, L: float, time_grid: np.ndarray, grid: Optional[Grid2D] = None,
                      seed: Optional[SeedIterate] = None, substeps: int = 1) -> List[Iterate]:
    """[u^0, u^1, ..., u^M] for KP-I."""
    times = np.asarray(time_grid, dtype=float)
    seed = seed or seed_mode('kp', L, grid, times)
    return _build_iterates('kp', M, seed, times, substeps)


def build_iterates_nls(M: int, L: float, time_grid: np.ndarray, grid: Optional[Grid2D] = None,
                       seed: Optional[SeedIterate] = None, substeps: int = 1) -> List[Iterate]:
    """[u^0, u^1, ..., u^M] for cubic NLS."""
    times = np.asarray(time_grid, dtype=float)
    seed = seed or seed_mode('nls', L, grid, times)
    return _build_iterates('nls', M, seed, times, substeps)


def approximate_solution(equation: str, M: int, L: float, delta: float, time_grid: np.ndarray,
                         grid: Optional[Grid2D] = None, substeps: int = 1) -> ApproxSolution:
    if equation not in EQUATIONS:
        raise ConfigError(f"Unknown equation '{equation}'", field_path='run.equation')
    builder = build_iterates_kp if equation == 'kp' else build_iterates_nls
    iterates = builder(M, L, time_grid, grid, substeps=substeps)
    seed = iterates[0]
    return ApproxSolution(iterates=iterates, delta=delta, equation=equation, sigma0=seed.sigma,
                          k0=seed.k0, L=L)


# --- Assembly and residual ---

def _ap_modes(approx: ApproxSolution, t: float) -> Modes:
    total: Modes = {}
    for k, iterate in enumerate(approx.iterates):
        _accumulate(total, iterate.full_modes(t), approx.delta ** (k + 1))
    return total


def assemble(approx: ApproxSolution, t: float, grid: Optional[Grid2D] = None) -> Field:
    """u_ap(t) = delta (u^0 + sum delta^k u^k) on a cylinder grid."""
    grid = grid or approx.field_grid()
    kind = 'real' if approx.equation == 'kp' else 'complex'
    return field_from_modes(grid, _ap_modes(approx, t), kind)


def residual_modes(approx: ApproxSolution, t: float) -> Modes:
    """
    Modes of F = (d_t + A)u_ap + u_ap (u_ap)_x (kp) or
    F = (i d_t + A)u_ap + 2Q|u_ap|^2 + Q u_ap^2 + |u_ap|^2 u_ap (nls), with the time
    derivative of every iterate taken from its own equation.
    """
    grid = approx.grid
    M = approx.order
    orders = [it.full_modes(t) for it in approx.iterates]
    delta = approx.delta
    F: Modes = {}
    for k in range(1, M + 1):
        f = forcing(approx.iterates, k, t)
        _accumulate(F, f, delta ** (k + 1))
    u_ap = _ap_modes(approx, t)
    if approx.equation == 'kp':
        # +1/2 (u_ap^2)_x cancels the forcing terms up to order delta^{M+1}
        _accumulate(F, kp_forcing([u_ap], 1, grid), -1.0)
    else:
        Q = nls_Q(grid.x)
        conj_ap = _conjugate_field(u_ap)
        quadratic: Modes = {}
        _accumulate(quadratic, _convolve(u_ap, conj_ap), 2.0)
        _accumulate(quadratic, _convolve(u_ap, u_ap))
        nonlinear = {m: Q * p for m, p in quadratic.items()}
        _accumulate(nonlinear, _convolve(_convolve(u_ap, conj_ap), u_ap))
        mask = _x_dealias(grid)
        _accumulate(F, {m: np.fft.ifft(mask * np.fft.fft(p)) for m, p in nonlinear.items()})
    return F


def residual_F(approx: ApproxSolution, t: float, grid: Optional[Grid2D] = None) -> Field:
    grid = grid or approx.field_grid()
    kind = 'real' if approx.equation == 'kp' else 'complex'
    modes = {m: p for m, p in residual_modes(approx, t).items() if abs(m) <= grid.Ny // 2 - 1}
    return field_from_modes(grid, modes, kind)


def residual_norm(approx: ApproxSolution, t: float) -> float:
    """L2 norm of F over the cylinder, summed over all modes."""
    modes = residual_modes(approx, t)
    total = sum(float(np.sum(np.abs(p) ** 2)) for p in modes.values()) * approx.grid.dx
    return math.sqrt(2.0 * math.pi * approx.L * total)


# --- Growth diagnostics ---

def iterate_growth_rates(iterates: Sequence[Iterate], window: Optional[Tuple[float, float]] = None
                         ) -> Dict[int, LinearFit]:
    """Log-linear fit of |u^k(t)|_{L2} per order; expected slope (k+1) sigma0."""
    window = window or (10.0, 20.0)
    return {it.k: fit_growth_rate(it.times, it.l2_series(), window) for it in iterates}


def iterate_norm_rows(iterates: Sequence[Iterate], stride: int = 1) -> List[List[float]]:
    """Rows (t, k, m, |u^k_m(t)|_{L2(R)}) for the iterate dump."""
    rows = []
    for it in iterates:
        for m, series in it.mode_l2_series().items():
            for n in range(0, it.times.size, stride):
                rows.append([float(it.times[n]), it.k, m, float(series[n])])
    return rows
