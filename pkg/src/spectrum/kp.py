# /root/pkg/src/spectrum/kp.py

"""
KP-I Transverse Spectrum Module

Purpose:
Explicit transverse unstable eigenmodes of the KdV soliton under the KP-I
flow in the frame moving with the soliton:
- the instability branch 2 sigma = mu(mu-1)(2-mu), k = (sqrt3 L/4) mu(2-mu),
  mu in (1,2), and its inversion for integer transverse modes;
- the quartic P(mu) = mu^4 - 4mu^2 + 4 lam mu + 3 eta^2 and the decay
  condition C+(mu) = mu^3 + 2mu + lam - 3mu^2 = 0;
- the closed-form eigenprofile V(x) = g''(x/2), g(z) = 3mu^2 e^{mu z}(1 - tanh z);
- the linearized operators A (on fields) and A_j (per transverse mode),
  with A_j v = -v_x + (Qv)_x + v_xxx + j^2 dx^{-1} v;
- the operator Lw = -w_xx - Qw + w and resolvent diagnostics
  (gamma0 + i tau) w + A_j w = H_x with the energy identity
  gamma0((w,Lw) + j^2|dx^{-1}w|^2) = Re((H_x,Lw) + j^2(H,dx^{-1}w)).

Dependencies:
- numpy, scipy (external libraries)
- src.grid.domain, src.solitons.profiles, src.spectrum.operators
- src.core.settings, src.core.errors, src.utils.logger

Expected Input: transverse period L, integer modes k, grids.
Expected Output: DispersionPoint / UnstableModeKP objects, operator spectra,
resolvent sweep records.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg

from src.core import settings
from src.core.errors import (DomainError, NoSuchMode, NoUnstableMode,
                             SingularSystem, ZeroModeViolation)
from src.grid.domain import Field, Grid2D, Spectrum1D, antideriv_x, d_dx, d_dy, sobolev_norm_1d
from src.solitons.profiles import kdv_Q
from src.spectrum.operators import (antiderivative_matrix, derivative_matrix, dx,
                                    dx_inverse, l2_inner)
from src.utils.logger import log

SQRT3 = math.sqrt(3.0)
KP_THRESHOLD = 4.0 / SQRT3
MU_STAR = 1.0 + 1.0 / SQRT3
SIGMA_STAR = 1.0 / (3.0 * SQRT3)


@dataclass(frozen=True)
class DispersionPoint:
    mu: float
    lam: float
    sigma: float
    eta: float
    k: int
    L: float


@dataclass(frozen=True)
class UnstableModeKP:
    """phi(t,x,y) = e^{sigma t} e^{i k y/L} V(x), V normalized to unit L2 with V(0) > 0."""

    point: DispersionPoint
    grid: Grid2D
    V: np.ndarray
    g: np.ndarray

    @property
    def sigma(self) -> float:
        return self.point.sigma

    @property
    def k(self) -> int:
        return self.point.k

    @property
    def j(self) -> float:
        return self.point.k / self.point.L

    def profile(self) -> Spectrum1D:
        return Spectrum1D(self.grid, self.V, mode=self.point.k)


@dataclass
class AlgebraReport:
    point: DispersionPoint
    residuals: Dict[str, float] = field(default_factory=dict)

    def ok(self, tol: float = 1e-10) -> bool:
        return all(abs(v) < tol for v in self.residuals.values())


# --- Instability branch ---

def _check_branch(mu) -> np.ndarray:
    arr = np.asarray(mu, dtype=float)
    if np.any(arr < 1.0) or np.any(arr > 2.0):
        raise DomainError(f"mu must lie in [1, 2], got {mu}", mu=str(mu))
    return arr


def sigma_of_mu(mu):
    arr = _check_branch(mu)
    value = arr * (arr - 1.0) * (2.0 - arr) / 2.0
    return float(value) if np.ndim(value) == 0 else value


def k_of_mu(mu, L: float):
    arr = _check_branch(mu)
    value = SQRT3 * L / 4.0 * arr * (2.0 - arr)
    return float(value) if np.ndim(value) == 0 else value


def mu_of_k(k: float, L: float) -> float:
    ratio = 4.0 * k / (SQRT3 * L)
    if not 0.0 < ratio < 1.0:
        raise NoSuchMode(f"No unstable mu for k={k}, L={L}: 4k/(sqrt3 L) = {ratio:.6f} not in (0, 1)",
                         k=k, L=L)
    return 1.0 + math.sqrt(1.0 - ratio)


def dispersion_point(k: int, L: float) -> DispersionPoint:
    mu = mu_of_k(k, L)
    sigma = sigma_of_mu(mu)
    return DispersionPoint(mu=mu, lam=2.0 * sigma, sigma=sigma, eta=mu * (2.0 - mu), k=int(k), L=float(L))


def admissible_modes(L: float) -> List[DispersionPoint]:
    """All integer k with 0 < k < sqrt3 L / 4; empty when L <= 4/sqrt3."""
    if L <= 0:
        raise DomainError(f"L must be positive, got {L}", L=L)
    if L <= KP_THRESHOLD:
        log.info(f"L={L} is at or below the KP-I threshold 4/sqrt3={KP_THRESHOLD:.6f}: no unstable modes")
        return []
    points = []
    k = 1
    while 4.0 * k / (SQRT3 * L) < 1.0:
        points.append(dispersion_point(k, L))
        k += 1
    return points


def most_unstable_point(L: float) -> DispersionPoint:
    points = admissible_modes(L)
    if not points:
        raise NoUnstableMode(f"No transverse instability for L={L} <= 4/sqrt3", L=L)
    # max sigma, smallest k on ties
    return max(points, key=lambda p: (p.sigma, -p.k))


def brute_force_most_unstable(L: float, samples: int = 200001) -> DispersionPoint:
    """Scans a mu grid on (1, 2) and snaps each admissible k to its nearest sample."""
    mus = np.linspace(1.0, 2.0, samples)[1:-1]
    ks = SQRT3 * L / 4.0 * mus * (2.0 - mus)
    best = None
    for k in range(1, int(np.floor(ks.max())) + 1):
        if 4.0 * k / (SQRT3 * L) >= 1.0:
            continue
        # k(mu) is monotone on the branch, so the nearest sample is unique
        idx = int(np.argmin(np.abs(ks - k)))
        mu = float(mus[idx])
        sigma = mu * (mu - 1.0) * (2.0 - mu) / 2.0
        candidate = DispersionPoint(mu=mu, lam=2 * sigma, sigma=sigma, eta=mu * (2 - mu), k=k, L=float(L))
        if best is None or candidate.sigma > best.sigma:
            best = candidate
    if best is None:
        raise NoUnstableMode(f"Brute-force scan found no unstable mode for L={L}", L=L)
    return best


# --- Quartic and decay condition ---

def quartic_P(mu, lam, eta):
    mu = np.asarray(mu)
    return mu ** 4 - 4.0 * mu ** 2 + 4.0 * lam * mu + 3.0 * eta ** 2


def quartic_roots(lam, eta, polish_steps: int = 6) -> np.ndarray:
    """Companion-matrix roots of P, Newton-polished, sorted by real part."""
    coeffs = np.array([1.0, 0.0, -4.0, 4.0 * lam, 3.0 * eta ** 2], dtype=complex)
    roots = scipy.linalg.eigvals(scipy.linalg.companion(coeffs))
    for _ in range(polish_steps):
        value = quartic_P(roots, lam, eta)
        slope = 4.0 * roots ** 3 - 8.0 * roots + 4.0 * lam
        step = np.where(np.abs(slope) > 1e-14, value / np.where(slope == 0, 1.0, slope), 0.0)
        roots = roots - step
    order = np.lexsort((roots.imag, roots.real))
    return roots[order]


def C_plus(mu, lam):
    return mu ** 3 + 2.0 * mu + lam - 3.0 * mu ** 2


def verify_algebraic_system(point: DispersionPoint) -> AlgebraReport:
    mu, lam, eta, k, L = point.mu, point.lam, point.eta, point.k, point.L
    report = AlgebraReport(point=point)
    report.residuals = {
        'P': float(quartic_P(mu, lam, eta)),
        'C_plus': float(C_plus(mu, lam)),
        'lambda_elimination': lam + mu * (mu - 1.0) * (mu - 2.0),
        'eta_elimination': eta ** 2 - mu ** 2 * (mu - 2.0) ** 2,
        'eta_k': 3.0 * eta ** 2 - 16.0 * k ** 2 / L ** 2,
        'branch_k': k - SQRT3 * L / 4.0 * mu * (2.0 - mu),
        'branch_sigma': 2.0 * point.sigma - mu * (mu - 1.0) * (2.0 - mu),
    }
    if not report.ok():
        log.warning(f"Algebraic system residuals above tolerance for k={k}, L={L}: {report.residuals}")
    return report


# --- Eigenprofile ---

def _logcosh(z):
    a = np.abs(z)
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)


def g_mu(z, mu: float, lam: Optional[float] = None):
    """e^{mu z}(mu^3 + 2mu + lam - 3mu^2 tanh z); lam defaults to the C+ = 0 value."""
    if lam is None:
        lam = -mu * (mu - 1.0) * (mu - 2.0)
    z = np.asarray(z, dtype=float)
    value = np.exp(mu * z) * (C_plus(mu, lam) + 3.0 * mu ** 2 * (1.0 - np.tanh(z)))
    return value.astype(complex)


def g_decaying(z, mu: float):
    """3mu^2 e^{mu z}(1 - tanh z) = 3mu^2 e^{(mu-1)z}/cosh z, overflow-free."""
    z = np.asarray(z, dtype=float)
    return 3.0 * mu ** 2 * np.exp((mu - 1.0) * z - _logcosh(z))


def g_decaying_second(z, mu: float):
    """Closed-form z-second derivative of g_decaying."""
    z = np.asarray(z, dtype=float)
    t = np.tanh(z)
    e1 = np.exp((mu - 1.0) * z - _logcosh(z))        # e^{mu z}(1 - tanh z)
    e2 = np.exp(mu * z - 2.0 * _logcosh(z))          # e^{mu z} sech^2 z
    return 3.0 * mu ** 2 * (mu ** 2 * e1 - 2.0 * mu * e2 + 2.0 * e2 * t)


def box_half_period(mu: float, tail_tolerance: Optional[float] = None, minimum: Optional[float] = None) -> float:
    """Smallest multiple of 10 with e^{-(2-mu)X/2} below the tail tolerance."""
    tol = settings.TAIL_TOLERANCE if tail_tolerance is None else tail_tolerance
    floor = settings.X_DEFAULT if minimum is None else minimum
    needed = 2.0 * math.log(1.0 / tol) / (2.0 - mu)
    return float(max(floor, 10.0 * math.ceil(needed / 10.0)))


def mode_grid(point: DispersionPoint, Nx: Optional[int] = None, Ny: int = 1) -> Grid2D:
    return Grid2D(Nx=Nx or settings.NX, Ny=Ny, X=box_half_period(point.mu), L=point.L)


def eigenprofile(point: DispersionPoint, grid: Optional[Grid2D] = None) -> UnstableModeKP:
    if abs(C_plus(point.mu, point.lam)) > settings.STRUCTURAL_TOL:
        raise DomainError(f"C+(mu) = {C_plus(point.mu, point.lam):.3e} is not zero; the profile would not decay",
                          mu=point.mu, lam=point.lam)
    grid = grid or mode_grid(point)
    z = grid.x / 2.0
    V = g_decaying_second(z, point.mu)
    g = g_decaying(z, point.mu)
    norm = math.sqrt(float(np.sum(V ** 2)) * grid.dx)
    sign = 1.0 if V[grid.origin_index()] > 0 else -1.0
    scale = sign / norm
    tail = abs(V[-1]) * abs(scale)
    if tail > 10 * settings.TAIL_TOLERANCE:
        log.warning(f"Eigenmode tail {tail:.2e} at x=X={grid.X} exceeds tolerance; enlarge the box")
    log.debug(f"Eigenprofile k={point.k} L={point.L}: mu={point.mu:.6f}, sigma={point.sigma:.6f}, X={grid.X}")
    return UnstableModeKP(point=point, grid=grid, V=(V * scale).astype(complex), g=(g * scale).astype(complex))


def most_unstable(L: float, grid: Optional[Grid2D] = None) -> UnstableModeKP:
    point = most_unstable_point(L)
    log.info(f"Most unstable KP-I mode for L={L}: k0={point.k}, mu={point.mu:.6f}, sigma0={point.sigma:.6f}")
    return eigenprofile(point, grid)


# --- Linearized operators ---

def _check_mode_mean(values: np.ndarray, j: float, tol: Optional[float] = None) -> None:
    if j == 0:
        return
    tol = settings.STRUCTURAL_TOL if tol is None else tol
    mean = abs(np.mean(values))
    scale = max(1.0, float(np.max(np.abs(values))))
    if mean > tol * scale:
        raise ZeroModeViolation(f"Mode with j={j} has x-mean {mean:.3e}", j=j, mean=mean)


def apply_Aj(v: Spectrum1D, j: Optional[float] = None) -> Spectrum1D:
    """A_j v = -v_x + (Qv)_x + v_xxx + j^2 dx^{-1} v, matrix-free."""
    j = v.j if j is None else j
    grid = v.grid
    values = np.asarray(v.values)
    _check_mode_mean(values, j)
    Q = kdv_Q(grid.x)
    result = -dx(values, grid, 1) + dx(Q * values, grid, 1) + dx(values, grid, 3)
    if j != 0:
        result = result + j * j * dx_inverse(values, grid)
    return v.with_values(result)


def apply_A(f: Field) -> Field:
    """A u = -u_x + (Qu)_x + u_xxx - dx^{-1} u_yy on the cylinder."""
    Q = Field.from_profile(f.grid, kdv_Q(f.grid.x))
    transverse = antideriv_x(d_dy(f, 2))
    return -d_dx(f, 1) + d_dx(Q * f, 1) + d_dx(f, 3) - transverse


def A_matrix(j: float, grid: Grid2D) -> np.ndarray:
    D1 = derivative_matrix(grid, 1)
    Q = kdv_Q(grid.x)
    return -D1 + D1 * Q[None, :] + derivative_matrix(grid, 3) + j * j * antiderivative_matrix(grid)


def L_matrix(grid: Grid2D) -> np.ndarray:
    matrix = -derivative_matrix(grid, 2) - np.diag(kdv_Q(grid.x)) + np.eye(grid.Nx)
    return 0.5 * (matrix + matrix.T)


def mode_residual(mode: UnstableModeKP) -> float:
    """||sigma V + A_j V|| / ||V||."""
    AV = apply_Aj(mode.profile(), mode.j).values
    residual = mode.sigma * mode.V + AV
    return float(np.linalg.norm(residual) / np.linalg.norm(mode.V))


@dataclass
class OperatorSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def L_operator_eigenpairs(grid: Grid2D, threshold: float = 1.0) -> OperatorSpectrum:
    """Discrete eigenpairs of L below the continuum threshold, sorted."""
    values, vectors = scipy.linalg.eigh(L_matrix(grid))
    below = values < threshold
    return OperatorSpectrum(eigenvalues=values[below], eigenvectors=vectors[:, below])


def L_operator_spectrum(grid: Grid2D) -> np.ndarray:
    return L_operator_eigenpairs(grid).eigenvalues


# --- Resolvent diagnostics ---

@dataclass
class ResolventRecord:
    tau: float
    ratio_s0: float
    ratio_s1: float
    identity_residual: float
    kernel_component: float


def resolvent_solve(j: float, gamma0: float, tau: float, H: Spectrum1D,
                    sigma0: Optional[float] = None) -> Spectrum1D:
    """Solves (gamma0 + i tau) w + A_j w = H_x with a dense LU solve."""
    grid = H.grid
    if sigma0 is not None and gamma0 <= sigma0:
        log.warning(f"gamma0={gamma0} does not exceed sigma0={sigma0}; the system may be singular")
    if not np.any(np.asarray(H.values)):
        return H.with_values(np.zeros(grid.Nx, dtype=complex))

    system = A_matrix(j, grid).astype(complex) + (gamma0 + 1j * tau) * np.eye(grid.Nx)
    rhs = dx(np.asarray(H.values), grid, 1)
    with warnings.catch_warnings():
        warnings.simplefilter('error', scipy.linalg.LinAlgWarning)
        try:
            w = scipy.linalg.solve(system, rhs)
        except (scipy.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as e:
            raise SingularSystem(f"Resolvent system singular at j={j}, gamma0={gamma0}, tau={tau}: {e}",
                                 j=j, gamma0=gamma0, tau=tau) from e
    return H.with_values(w)


def conservation_identity_residual(w: Spectrum1D, H: Spectrum1D, j: float, gamma0: float) -> float:
    """Relative mismatch of gamma0((w,Lw) + j^2|W|^2) = Re((H_x,Lw) + j^2(H,W)), W = dx^{-1}w."""
    grid = w.grid
    wv, hv = np.asarray(w.values), np.asarray(H.values)
    Lw = L_matrix(grid) @ wv
    W = dx_inverse(wv, grid)
    energy = l2_inner(wv, Lw, grid).real
    transverse = j * j * l2_inner(W, W, grid).real
    forcing_L = l2_inner(dx(hv, grid, 1), Lw, grid)
    forcing_W = j * j * l2_inner(hv, W, grid)
    lhs = gamma0 * (energy + transverse)
    rhs = forcing_L.real + forcing_W.real
    scale = abs(gamma0) * (abs(energy) + transverse) + abs(forcing_L) + abs(forcing_W)
    if scale == 0.0:
        return 0.0
    return abs(lhs - rhs) / scale


def resolvent_sweep(j: float, gamma0: float, taus: Sequence[float], H: Spectrum1D,
                    sigma0: Optional[float] = None) -> List[ResolventRecord]:
    """Solves over a tau sweep; records |w|_s/|H|_{s+1} (s = 0, 1) and the identity residual."""
    grid = H.grid
    pairs = L_operator_eigenpairs(grid)
    # eigenvalue closest to zero: the kernel, proportional to Q_x
    kernel_vec = pairs.eigenvectors[:, int(np.argmin(np.abs(pairs.eigenvalues)))] if pairs.eigenvalues.size else None
    records = []
    for tau in taus:
        w = resolvent_solve(j, gamma0, tau, H, sigma0)
        wv = np.asarray(w.values)
        h1 = sobolev_norm_1d(H.values, grid, 1)
        h2 = sobolev_norm_1d(H.values, grid, 2)
        alpha = abs(np.vdot(kernel_vec, wv)) if kernel_vec is not None else 0.0
        record = ResolventRecord(
            tau=float(tau),
            ratio_s0=sobolev_norm_1d(wv, grid, 0) / h1 if h1 else 0.0,
            ratio_s1=sobolev_norm_1d(wv, grid, 1) / h2 if h2 else 0.0,
            identity_residual=conservation_identity_residual(w, H, j, gamma0),
            kernel_component=float(alpha),
        )
        log.debug(f"Resolvent tau={tau}: |w|_1/|H|_2={record.ratio_s1:.4e}, identity={record.identity_residual:.2e}")
        records.append(record)
    return records
