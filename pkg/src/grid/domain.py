# /root/pkg/src/grid/domain.py

"""
Cylinder Grid and Field Module

Purpose:
Discrete representation of fields on the truncated cylinder
[-X, X) x [0, 2*pi*L): the periodic grid, immutable sampled fields with their
spectral twins, spectral differentiation and x-antidifferentiation, the
projection onto nonzero transverse modes, norms and 2/3-rule dealiasing.

Spectral coefficients are normalized so that a constant field c has the
single coefficient c at (xi=0, m=0); hence the L2 norm over the cylinder is
sqrt(area * sum |c_nm|^2) with area = 2X * 2*pi*L.

Dependencies:
- numpy (external library)
- src.core.errors
- src.core.settings (default tolerances)

Expected Input: Grid sizes, sampled arrays.
Expected Output: Field / SpectralField / Spectrum1D values and norms.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from src.core import settings
from src.core.errors import GridMismatch, ZeroModeViolation

KINDS = ('real', 'complex')


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid2D:
    """Periodic grid: Nx points on [-X, X), Ny points on [0, 2*pi*L)."""

    Nx: int
    Ny: int
    X: float
    L: float

    def __post_init__(self):
        if not (_is_power_of_two(self.Nx) and _is_power_of_two(self.Ny)):
            raise GridMismatch(f"Nx and Ny must be powers of two, got Nx={self.Nx}, Ny={self.Ny}",
                               Nx=self.Nx, Ny=self.Ny)
        if self.X <= 0 or self.L <= 0:
            raise GridMismatch(f"X and L must be positive, got X={self.X}, L={self.L}", X=self.X, L=self.L)

    @classmethod
    def line(cls, Nx: int, X: float) -> 'Grid2D':
        """One-dimensional grid (a single transverse sample)."""
        return cls(Nx=Nx, Ny=1, X=X, L=1.0)

    @property
    def shape(self):
        return (self.Nx, self.Ny)

    @property
    def dx(self) -> float:
        return 2.0 * self.X / self.Nx

    @property
    def dy(self) -> float:
        return 2.0 * np.pi * self.L / self.Ny

    @property
    def area(self) -> float:
        return 2.0 * self.X * 2.0 * np.pi * self.L

    @property
    def x(self) -> np.ndarray:
        return -self.X + self.dx * np.arange(self.Nx)

    @property
    def y(self) -> np.ndarray:
        return self.dy * np.arange(self.Ny)

    @property
    def xi(self) -> np.ndarray:
        """x-wavenumbers pi*n/X in FFT order."""
        return np.pi * np.fft.fftfreq(self.Nx, d=1.0 / self.Nx) / self.X

    @property
    def m(self) -> np.ndarray:
        """Integer transverse mode indices in FFT order."""
        return np.fft.fftfreq(self.Ny, d=1.0 / self.Ny).round().astype(int)

    @property
    def ky(self) -> np.ndarray:
        return self.m / self.L

    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing='ij')

    def spectral_mesh(self):
        return np.meshgrid(self.xi, self.ky, indexing='ij')

    def origin_index(self) -> int:
        """Index of x = 0."""
        return self.Nx // 2

    def with_transverse(self, Ny: int, L: float) -> 'Grid2D':
        return Grid2D(Nx=self.Nx, Ny=Ny, X=self.X, L=L)


def _check_kind(kind: str) -> str:
    if kind not in KINDS:
        raise GridMismatch(f"Unknown field kind '{kind}'", kind=kind)
    return kind


@dataclass(frozen=True)
class Field:
    """Immutable Nx x Ny samples on a Grid2D."""

    grid: Grid2D
    values: np.ndarray
    kind: str = 'real'

    def __post_init__(self):
        _check_kind(self.kind)
        dtype = np.float64 if self.kind == 'real' else np.complex128
        raw = np.asarray(self.values)
        if self.kind == 'real' and np.iscomplexobj(raw):
            raise GridMismatch("Complex samples given for a real field")
        arr = np.array(raw, dtype=dtype)
        if arr.ndim == 1 and self.grid.Ny == 1:
            arr = arr.reshape(self.grid.Nx, 1)
        if arr.shape != self.grid.shape:
            raise GridMismatch(f"Field shape {arr.shape} does not match grid {self.grid.shape}",
                               shape=arr.shape, expected=self.grid.shape)
        arr.setflags(write=False)
        object.__setattr__(self, 'values', arr)

    @classmethod
    def from_function(cls, grid: Grid2D, fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                      kind: str = 'real') -> 'Field':
        xx, yy = grid.mesh()
        return cls(grid, np.broadcast_to(fn(xx, yy), grid.shape), kind)

    @classmethod
    def from_profile(cls, grid: Grid2D, profile: np.ndarray, kind: str = 'real') -> 'Field':
        """y-independent field from an x-profile."""
        return cls(grid, np.repeat(np.asarray(profile).reshape(-1, 1), grid.Ny, axis=1), kind)

    @classmethod
    def zeros(cls, grid: Grid2D, kind: str = 'real') -> 'Field':
        return cls(grid, np.zeros(grid.shape), kind)

    def with_values(self, values: np.ndarray) -> 'Field':
        """Same grid and kind; complex input to a real field keeps the real part."""
        if self.kind == 'real':
            return Field(self.grid, np.real(values), 'real')
        return Field(self.grid, values, 'complex')

    def as_complex(self) -> 'Field':
        return Field(self.grid, self.values.astype(np.complex128), 'complex')

    def _coerce(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise GridMismatch("Fields live on different grids")
            return other.values, other.kind
        return other, ('complex' if np.iscomplexobj(other) else 'real')

    def _combine(self, other, op) -> 'Field':
        values, other_kind = self._coerce(other)
        kind = 'complex' if 'complex' in (self.kind, other_kind) else 'real'
        return Field(self.grid, op(self.values, values), kind)

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values, self.kind)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


@dataclass(frozen=True)
class SpectralField:
    """Normalized discrete Fourier coefficients of a Field."""

    grid: Grid2D
    coeffs: np.ndarray
    kind: str = 'real'

    def __post_init__(self):
        _check_kind(self.kind)
        arr = np.array(self.coeffs, dtype=np.complex128)
        if arr.shape != self.grid.shape:
            raise GridMismatch(f"Coefficient shape {arr.shape} does not match grid {self.grid.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, 'coeffs', arr)

    def hermitian_defect(self) -> float:
        """max |c(-n,-m) - conj c(n,m)|; zero for spectra of real fields."""
        c = self.coeffs
        flipped = np.roll(np.flip(c, axis=(0, 1)), shift=(1, 1), axis=(0, 1))
        return float(np.max(np.abs(flipped - np.conj(c))))


@dataclass(frozen=True)
class Spectrum1D:
    """Complex x-profile of a single transverse mode u_j(x)."""

    grid: Grid2D
    values: np.ndarray
    mode: int = 0

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.complex128).reshape(-1)
        if arr.shape != (self.grid.Nx,):
            raise GridMismatch(f"Profile length {arr.shape[0]} does not match Nx={self.grid.Nx}")
        arr.setflags(write=False)
        object.__setattr__(self, 'values', arr)

    @property
    def j(self) -> float:
        """Transverse wavenumber mode/L."""
        return self.mode / self.grid.L

    def coefficients(self) -> np.ndarray:
        return np.fft.fft(self.values) / self.grid.Nx

    def with_values(self, values: np.ndarray) -> 'Spectrum1D':
        return Spectrum1D(self.grid, values, self.mode)

    def l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.dx))


@dataclass
class FieldNorms:
    l2: float
    hs: float
    s: float
    z2: Optional[float] = None


@dataclass
class ModeNorms:
    """Per-mode H^s(R) norms of a field, u = sum_j u_j(x) e^{ijy/L}."""

    s: int
    per_mode: Dict[int, float] = field(default_factory=dict)

    @property
    def sup(self) -> float:
        return max(self.per_mode.values()) if self.per_mode else 0.0

    @property
    def rss(self) -> float:
        return float(np.sqrt(sum(v * v for v in self.per_mode.values())))


# --- Transforms ---

def transform_forward(f: Field) -> SpectralField:
    if f.values.shape != f.grid.shape:
        raise GridMismatch(f"Field shape {f.values.shape} does not match grid {f.grid.shape}")
    return SpectralField(f.grid, np.fft.fft2(f.values) / (f.grid.Nx * f.grid.Ny), f.kind)


def transform_inverse(F: SpectralField) -> Field:
    values = np.fft.ifft2(np.asarray(F.coeffs) * (F.grid.Nx * F.grid.Ny))
    if F.kind == 'real':
        return Field(F.grid, values.real, 'real')
    return Field(F.grid, values, 'complex')


def derivative_symbol(xi: np.ndarray, order: int) -> np.ndarray:
    """(i xi)^order with the Nyquist entry zeroed for odd orders."""
    symbol = (1j * xi) ** order
    if order % 2 == 1 and xi.size % 2 == 0:
        symbol = symbol.copy()
        symbol[xi.size // 2] = 0.0
    return symbol


def inverse_derivative_symbol(xi: np.ndarray) -> np.ndarray:
    """1/(i xi) with zero at xi = 0 and at the Nyquist entry."""
    symbol = np.zeros_like(xi, dtype=np.complex128)
    nonzero = xi != 0
    symbol[nonzero] = 1.0 / (1j * xi[nonzero])
    if xi.size % 2 == 0:
        symbol[xi.size // 2] = 0.0
    return symbol


def _apply_symbol(f: Field, symbol: np.ndarray) -> Field:
    F = transform_forward(f)
    return transform_inverse(SpectralField(f.grid, F.coeffs * symbol, f.kind))


def d_dx(f: Field, order: int = 1) -> Field:
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    return _apply_symbol(f, derivative_symbol(f.grid.xi, order)[:, None])


def d_dy(f: Field, order: int = 1) -> Field:
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    return _apply_symbol(f, derivative_symbol(f.grid.ky, order)[None, :])


def laplacian(f: Field) -> Field:
    XI, KY = f.grid.spectral_mesh()
    return _apply_symbol(f, -(XI ** 2) - KY ** 2)


def check_zero_modes(F: SpectralField, tol: Optional[float] = None) -> None:
    """Raises ZeroModeViolation if a mode m != 0 has an x-mean above tol."""
    tol = settings.STRUCTURAL_TOL if tol is None else tol
    scale = max(1.0, float(np.max(np.abs(F.coeffs))))
    means = np.abs(F.coeffs[0, :])
    bad = [int(m) for m, value in zip(F.grid.m, means) if m != 0 and value > tol * scale]
    if bad:
        raise ZeroModeViolation(f"Transverse modes {sorted(bad)} carry a nonzero x-mean",
                                modes=str(sorted(bad)), max_mean=float(np.max(means[F.grid.m != 0])))


def antideriv_x(f: Field, tol: Optional[float] = None) -> Field:
    F = transform_forward(f)
    check_zero_modes(F, tol)
    return transform_inverse(SpectralField(f.grid, F.coeffs * inverse_derivative_symbol(f.grid.xi)[:, None],
                                           f.kind))


def project_nonzero_y(f: Field) -> Field:
    """The projection removing the y-mean pointwise in x."""
    return Field(f.grid, f.values - f.values.mean(axis=1, keepdims=True), f.kind)


def inner(f: Field, g: Field) -> complex:
    """L2 inner product over the cylinder, conjugate-linear in g."""
    if f.grid != g.grid:
        raise GridMismatch("Fields live on different grids")
    return complex(np.sum(f.values * np.conj(g.values)) * f.grid.dx * f.grid.dy)


def l2_norm(f: Field) -> float:
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * f.grid.dx * f.grid.dy))


def spectral_norm(F: SpectralField) -> float:
    return float(np.sqrt(F.grid.area * np.sum(np.abs(F.coeffs) ** 2)))


def norms(f: Field, s: float = 1.0, with_z2: bool = True, tol: Optional[float] = None) -> FieldNorms:
    F = transform_forward(f)
    XI, KY = f.grid.spectral_mesh()
    power = np.abs(F.coeffs) ** 2
    hs = float(np.sqrt(f.grid.area * np.sum((1.0 + XI ** 2 + KY ** 2) ** s * power)))
    z2 = None
    if with_z2:
        check_zero_modes(F, tol)
        ratio = np.zeros_like(XI)
        nonzero = XI != 0
        ratio[nonzero] = KY[nonzero] / XI[nonzero]
        weight = (1.0 + XI ** 2 + ratio ** 2) ** 2
        z2 = float(np.sqrt(f.grid.area * np.sum(weight * power)))
    return FieldNorms(l2=l2_norm(f), hs=hs, s=s, z2=z2)


def sobolev_norm_1d(values: np.ndarray, grid: Grid2D, s: int) -> float:
    """|v|_s = (sum_{q<=s} |d^q v|^2_{L2(R)})^{1/2} on the x-line."""
    coeffs = np.fft.fft(np.asarray(values)) / grid.Nx
    weight = sum(grid.xi ** (2 * q) for q in range(int(s) + 1))
    return float(np.sqrt(2.0 * grid.X * np.sum(weight * np.abs(coeffs) ** 2)))


def mode_profiles(f: Field) -> Dict[int, np.ndarray]:
    """u_j(x) for every transverse mode index j present on the grid."""
    coeffs = np.fft.fft(f.values, axis=1) / f.grid.Ny
    return {int(m): coeffs[:, col] for col, m in enumerate(f.grid.m)}


def mode_sobolev_norms(f: Field, s: int = 0) -> ModeNorms:
    per_mode = {m: sobolev_norm_1d(profile, f.grid, s) for m, profile in mode_profiles(f).items()}
    return ModeNorms(s=s, per_mode=per_mode)


def field_from_modes(grid: Grid2D, modes: Dict[int, np.ndarray], kind: str = 'complex') -> Field:
    """Synthesizes sum_j u_j(x) e^{ijy/L} on the grid."""
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    index = {int(m): col for col, m in enumerate(grid.m)}
    for j, profile in modes.items():
        if j not in index:
            raise GridMismatch(f"Mode {j} is not representable with Ny={grid.Ny}", mode=j)
        coeffs[:, index[j]] += profile
    values = np.fft.ifft(coeffs * grid.Ny, axis=1)
    if kind == 'real':
        return Field(grid, values.real, 'real')
    return Field(grid, values, 'complex')


# --- Dealiasing ---

def dealias_mask(grid: Grid2D) -> np.ndarray:
    n = np.fft.fftfreq(grid.Nx, d=1.0 / grid.Nx)
    m = np.fft.fftfreq(grid.Ny, d=1.0 / grid.Ny)
    keep_x = np.abs(n) <= grid.Nx // 3
    # Ny <= 2 keeps only the y-mean
    keep_y = np.abs(m) <= grid.Ny // 3
    return keep_x[:, None] & keep_y[None, :]


def dealias(F: SpectralField) -> SpectralField:
    return SpectralField(F.grid, F.coeffs * dealias_mask(F.grid), F.kind)
