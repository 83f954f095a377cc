# /root/pkg/src/spectrum/nls.py

"""
NLS Transverse Spectrum Module

Purpose:
Linearization of the cubic NLS about the line ground state Q = sqrt2 sech x:
- L+ = -d_xx + 1 - 3Q^2 and L- = -d_xx + 1 - Q^2 as dense symmetric matrices;
- the transverse eigenproblem sigma V = J_eps V with
  J_eps = [[0, L- + eps^2], [-(L+ + eps^2), 0]], eps = k/L, solved as a
  dense 2Nx x 2Nx eigenproblem in the real (u, v) formulation;
- the small-eps bifurcation sigma = omega1 eps + ...: omega1 = 2 on the
  unstable branch and the purely imaginary pair 2 i theta eps,
  theta = |Q'|/|Q|, on the branch leaving the translation mode;
- the measured eps-cutoff and the smallest period L0 = 1/eps_c with an
  unstable k = 1 mode;
- resolvent solves for (gamma0 + i tau) W - J_eps W = H and their energy identity.

Dependencies:
- numpy, scipy (external libraries)
- src.grid.domain, src.solitons.profiles, src.spectrum.operators
- src.core.settings, src.core.errors, src.utils.logger

Expected Input: eps = k/L, periods L, 1-D grids.
Expected Output: UnstableModeNLS objects, spectra, bifurcation reports.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.optimize

from src.core import settings
from src.core.errors import DegenerateSpectrum, NoUnstableMode, SingularSystem
from src.grid.domain import Grid2D, Spectrum1D, sobolev_norm_1d
from src.solitons.profiles import nls_Q, nls_Q_prime
from src.spectrum.operators import derivative_matrix, l2_inner
from src.utils.logger import log

DEFAULT_EPSILONS = (0.01, 0.02, 0.04)


def default_grid() -> Grid2D:
    return Grid2D.line(settings.NLS_NX, settings.NLS_X)


@dataclass(frozen=True)
class UnstableModeNLS:
    """Phi = e^{sigma t} e^{iky/L} V + conj, V = (V1, V2) with unit L2 norm."""

    epsilon: float
    sigma: complex
    V1: np.ndarray
    V2: np.ndarray
    grid: Grid2D
    k: Optional[int] = None
    L: Optional[float] = None

    @property
    def growth_rate(self) -> float:
        return float(np.real(self.sigma))

    def complex_profile(self) -> np.ndarray:
        """V1 + i V2, the transverse profile of the complex perturbation."""
        return self.V1 + 1j * self.V2


@dataclass
class BifurcationReport:
    theta: float
    omega1_unstable: float
    omega1_stable_imag: float
    sigma_samples: Dict[float, complex] = field(default_factory=dict)
    stable_samples: Dict[float, float] = field(default_factory=dict)
    even_symmetric: bool = True
    max_unstable_count: int = 0

    def as_dict(self) -> dict:
        return {
            'theta': self.theta,
            'omega1_unstable': self.omega1_unstable,
            'omega1_stable_imag': self.omega1_stable_imag,
            'omega1_stable_expected': 2.0 * self.theta,
            'even_symmetric': self.even_symmetric,
            'max_unstable_count': self.max_unstable_count,
            'sigma_samples': {repr(k): [v.real, v.imag] for k, v in sorted(self.sigma_samples.items())},
        }


# --- Operators ---

@lru_cache(maxsize=8)
def assemble_Lpm(grid: Grid2D) -> Tuple[np.ndarray, np.ndarray]:
    """(L+, L-) as dense symmetric matrices on the x-line."""
    Q2 = nls_Q(grid.x) ** 2
    base = -derivative_matrix(grid, 2) + np.eye(grid.Nx)
    base = 0.5 * (base + base.T)
    Lplus = base - np.diag(3.0 * Q2)
    Lminus = base - np.diag(Q2)
    Lplus.setflags(write=False)
    Lminus.setflags(write=False)
    return Lplus, Lminus


def lpm_spectrum(grid: Grid2D, threshold: float = 1.0) -> Dict[str, np.ndarray]:
    """Eigenvalues of L+ and L- below the continuum threshold."""
    Lplus, Lminus = assemble_Lpm(grid)
    result = {}
    for name, matrix in (('plus', Lplus), ('minus', Lminus)):
        values = scipy.linalg.eigh(matrix, eigvals_only=True)
        result[name] = values[values < threshold]
        result[f'{name}_continuum_onset'] = values[values >= threshold][:1]
    return result


def block_matrix(epsilon: float, grid: Grid2D) -> np.ndarray:
    Lplus, Lminus = assemble_Lpm(grid)
    shift = epsilon * epsilon * np.eye(grid.Nx)
    zero = np.zeros_like(Lplus)
    return np.block([[zero, Lminus + shift], [-(Lplus + shift), zero]])


def block_spectrum(epsilon: float, grid: Optional[Grid2D] = None) -> np.ndarray:
    grid = grid or default_grid()
    return scipy.linalg.eigvals(block_matrix(epsilon, grid))


def _unstable_representatives(values: np.ndarray, threshold: float) -> np.ndarray:
    """Unstable eigenvalues, one per conjugate pair."""
    unstable = values[values.real > threshold]
    return unstable[unstable.imag >= -threshold]


def transverse_eigen(epsilon: float, grid: Optional[Grid2D] = None, k: Optional[int] = None,
                     L: Optional[float] = None) -> Optional[UnstableModeNLS]:
    """The unique unstable eigenmode at eps, or None."""
    grid = grid or default_grid()
    threshold = settings.UNSTABLE_THRESHOLD
    values, vectors = scipy.linalg.eig(block_matrix(epsilon, grid))
    reps = _unstable_representatives(values, threshold)
    if reps.size == 0:
        log.debug(f"eps={epsilon}: no unstable eigenvalue")
        return None
    if reps.size > 1:
        raise DegenerateSpectrum(f"{reps.size} unstable eigenvalue pairs at eps={epsilon}",
                                 epsilon=epsilon, eigenvalues=str(reps))

    idx = int(np.argmin(np.abs(values - reps[0])))
    vec = vectors[:, idx]
    n = grid.Nx
    V1, V2 = vec[:n], vec[n:]
    anchor = V2 if abs(V2[grid.origin_index()]) > abs(V1[grid.origin_index()]) else V1
    phase = anchor[grid.origin_index()] / abs(anchor[grid.origin_index()])
    norm = math.sqrt(float(np.sum(np.abs(V1) ** 2 + np.abs(V2) ** 2)) * grid.dx)
    V1 = V1 / (phase * norm)
    V2 = V2 / (phase * norm)
    sigma = complex(values[idx])
    if abs(sigma.imag) <= threshold:
        # real eigenvalue of a real matrix: eigenvector is real after the phase fix
        sigma = complex(sigma.real, 0.0)
        V1, V2 = V1.real.astype(complex), V2.real.astype(complex)
    log.debug(f"eps={epsilon}: unstable sigma={sigma}")
    return UnstableModeNLS(epsilon=float(epsilon), sigma=sigma, V1=V1, V2=V2, grid=grid, k=k, L=L)


def eigen_residual(mode: UnstableModeNLS) -> float:
    vec = np.concatenate([mode.V1, mode.V2])
    residual = block_matrix(mode.epsilon, mode.grid) @ vec - mode.sigma * vec
    return float(np.linalg.norm(residual) / np.linalg.norm(vec))


def conservation_identity(mode: UnstableModeNLS) -> float:
    """|Re sigma ((L+V1,V1) + (L-V2,V2) + eps^2|V|^2)| for a unit-norm mode."""
    Lplus, Lminus = assemble_Lpm(mode.grid)
    g = mode.grid
    quadratic = (l2_inner(Lplus @ mode.V1, mode.V1, g) + l2_inner(Lminus @ mode.V2, mode.V2, g)
                 + mode.epsilon ** 2 * (l2_inner(mode.V1, mode.V1, g) + l2_inner(mode.V2, mode.V2, g)))
    return abs(mode.sigma.real * quadratic.real)


# --- Bifurcation from eps = 0 ---

def theta_ratio() -> float:
    """|Q'|_{L2} / |Q|_{L2} by adaptive quadrature on the line."""
    opts = dict(epsabs=1e-14, epsrel=1e-13, limit=200)
    q_sq, _ = scipy.integrate.quad(lambda x: nls_Q(x) ** 2, -np.inf, np.inf, **opts)
    dq_sq, _ = scipy.integrate.quad(lambda x: nls_Q_prime(x) ** 2, -np.inf, np.inf, **opts)
    return math.sqrt(dq_sq / q_sq)


def richardson_slope(samples: Dict[float, float]) -> float:
    """Extrapolates lim f(eps)/eps from eps, 2eps, 4eps removing O(eps) and O(eps^2) terms."""
    eps = sorted(samples)
    if len(eps) != 3 or not (math.isclose(eps[1], 2 * eps[0]) and math.isclose(eps[2], 4 * eps[0])):
        raise ValueError(f"Richardson extrapolation needs eps, 2eps, 4eps; got {eps}")
    r = [samples[e] / e for e in eps]
    first = 2.0 * r[0] - r[1]
    second = 2.0 * r[1] - r[2]
    return (4.0 * first - second) / 3.0


def _stable_imaginary(values: np.ndarray, threshold: float, ceiling: float = 0.5) -> Optional[float]:
    near_axis = values[(np.abs(values.real) <= threshold) & (values.imag > threshold) & (values.imag < ceiling)]
    return float(np.min(near_axis.imag)) if near_axis.size else None


def bifurcation_check(grid: Optional[Grid2D] = None,
                      epsilons: Sequence[float] = DEFAULT_EPSILONS) -> BifurcationReport:
    grid = grid or default_grid()
    threshold = settings.UNSTABLE_THRESHOLD
    theta = theta_ratio()
    sigma_samples: Dict[float, complex] = {}
    stable_samples: Dict[float, float] = {}
    max_count = 0
    even = True
    for eps in epsilons:
        values = block_spectrum(eps, grid)
        reps = _unstable_representatives(values, threshold)
        max_count = max(max_count, int(reps.size))
        if reps.size != 1:
            raise DegenerateSpectrum(f"Expected one unstable eigenvalue at eps={eps}, found {reps.size}",
                                     epsilon=eps)
        sigma_samples[eps] = complex(reps[0])
        imag = _stable_imaginary(values, threshold)
        if imag is not None:
            stable_samples[eps] = imag
        mirrored = _unstable_representatives(block_spectrum(-eps, grid), threshold)
        even = even and mirrored.size == 1 and abs(mirrored[0] - reps[0]) <= 1e-12 * max(1.0, abs(reps[0]))

    omega_unstable = richardson_slope({e: s.real for e, s in sigma_samples.items()})
    omega_stable = richardson_slope(stable_samples) if len(stable_samples) == len(epsilons) else float('nan')
    log.info(f"Bifurcation: theta={theta:.8f}, omega1 unstable={omega_unstable:.6f}, "
             f"stable imaginary slope={omega_stable:.6f} (2 theta={2 * theta:.6f})")
    return BifurcationReport(theta=theta, omega1_unstable=omega_unstable, omega1_stable_imag=omega_stable,
                             sigma_samples=sigma_samples, stable_samples=stable_samples,
                             even_symmetric=even, max_unstable_count=max_count)


# --- Cutoff and most unstable mode ---

def max_growth(epsilon: float, grid: Grid2D) -> float:
    values = block_spectrum(epsilon, grid)
    return float(np.max(values.real))


@lru_cache(maxsize=8)
def epsilon_cutoff(grid: Optional[Grid2D] = None, lower: float = 0.05, upper: float = 2.0) -> float:
    """sup{eps : an unstable eigenvalue exists}, bracketed then refined with brentq."""
    grid = grid or default_grid()
    threshold = settings.UNSTABLE_THRESHOLD

    def excess(eps: float) -> float:
        return max_growth(eps, grid) - threshold

    if excess(lower) <= 0:
        raise NoUnstableMode(f"No unstable mode even at eps={lower}", epsilon=lower)
    while excess(upper) > 0:
        lower, upper = upper, 2.0 * upper
        if upper > 64:
            raise NoUnstableMode("Unstable band does not close below eps=64")
    cutoff = scipy.optimize.brentq(excess, lower, upper, xtol=settings.CUTOFF_TOL)
    log.info(f"Measured NLS eps cutoff {cutoff:.4f} (L0 = {1.0 / cutoff:.4f})")
    return float(cutoff)


def smallest_unstable_period(grid: Optional[Grid2D] = None) -> float:
    """L0 = 1/eps_c: the k = 1 mode is unstable exactly when L > L0."""
    return 1.0 / epsilon_cutoff(grid)


def most_unstable_nls(L: float, grid: Optional[Grid2D] = None,
                      cutoff: Optional[float] = None) -> UnstableModeNLS:
    grid = grid or default_grid()
    cutoff = epsilon_cutoff(grid) if cutoff is None else cutoff
    ks = []
    k = 1
    while k / L < cutoff:
        ks.append(k)
        k += 1
    if not ks:
        raise NoUnstableMode(f"No unstable NLS mode for L={L}: eps=1/L={1.0 / L:.4f} exceeds cutoff {cutoff:.4f}",
                             L=L, cutoff=cutoff)

    def solve(kk: int) -> Optional[UnstableModeNLS]:
        return transverse_eigen(kk / L, grid, k=kk, L=L)

    with ThreadPoolExecutor(max_workers=settings.WORKERS) as pool:
        modes = [m for m in pool.map(solve, ks) if m is not None]
    if not modes:
        raise NoUnstableMode(f"No unstable NLS mode for L={L}", L=L)
    best = max(modes, key=lambda m: (m.growth_rate, -m.k))
    log.info(f"Most unstable NLS mode for L={L}: k0={best.k}, eps={best.epsilon:.4f}, sigma0={best.sigma}")
    return best


def nls_sigma_table(L: float, grid: Optional[Grid2D] = None) -> List[Tuple[int, float, complex]]:
    """(k, eps, sigma) for every k with eps = k/L below the cutoff (sigma = 0 if stable)."""
    grid = grid or default_grid()
    cutoff = epsilon_cutoff(grid)
    rows = []
    k = 1
    while k / L < cutoff:
        mode = transverse_eigen(k / L, grid, k=k, L=L)
        rows.append((k, k / L, mode.sigma if mode else 0j))
        k += 1
    return rows


# --- Resolvent ---

def resolvent_solve_nls(epsilon: float, gamma0: float, tau: float, H1: Spectrum1D,
                        H2: Spectrum1D) -> Tuple[Spectrum1D, Spectrum1D]:
    """Solves (gamma0 + i tau) W + [[0, -(L- + eps^2)], [L+ + eps^2, 0]] W = H."""
    grid = H1.grid
    n = grid.Nx
    system = (gamma0 + 1j * tau) * np.eye(2 * n) - block_matrix(epsilon, grid)
    rhs = np.concatenate([np.asarray(H1.values), np.asarray(H2.values)])
    with warnings.catch_warnings():
        warnings.simplefilter('error', scipy.linalg.LinAlgWarning)
        try:
            w = scipy.linalg.solve(system, rhs)
        except (scipy.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as e:
            raise SingularSystem(f"NLS resolvent singular at eps={epsilon}, gamma0={gamma0}, tau={tau}: {e}",
                                 epsilon=epsilon, gamma0=gamma0, tau=tau) from e
    return H1.with_values(w[:n]), H2.with_values(w[n:])


def nls_conservation_identity_residual(w1: Spectrum1D, w2: Spectrum1D, H1: Spectrum1D, H2: Spectrum1D,
                                       epsilon: float, gamma0: float) -> float:
    """Relative mismatch of
    gamma0((L+w1,w1) + (L-w2,w2) + eps^2|W|^2) = Re((H1,(L+ + eps^2)w1) + (H2,(L- + eps^2)w2))."""
    grid = w1.grid
    Lplus, Lminus = assemble_Lpm(grid)
    a1, a2 = np.asarray(w1.values), np.asarray(w2.values)
    e2 = epsilon * epsilon
    P1 = Lplus @ a1 + e2 * a1
    P2 = Lminus @ a2 + e2 * a2
    energy = l2_inner(a1, P1, grid).real + l2_inner(a2, P2, grid).real
    f1 = l2_inner(np.asarray(H1.values), P1, grid)
    f2 = l2_inner(np.asarray(H2.values), P2, grid)
    scale = abs(gamma0) * abs(energy) + abs(f1) + abs(f2)
    if scale == 0.0:
        return 0.0
    return abs(gamma0 * energy - (f1.real + f2.real)) / scale


def nls_resolvent_ratio(w1: Spectrum1D, w2: Spectrum1D, H1: Spectrum1D, H2: Spectrum1D, s: int = 1) -> float:
    grid = w1.grid
    num = math.hypot(sobolev_norm_1d(w1.values, grid, s), sobolev_norm_1d(w2.values, grid, s))
    den = math.hypot(sobolev_norm_1d(H1.values, grid, s + 1), sobolev_norm_1d(H2.values, grid, s + 1))
    return num / den if den else 0.0
