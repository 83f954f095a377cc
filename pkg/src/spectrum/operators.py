# /root/pkg/src/spectrum/operators.py

"""
Dense Spectral Operators

Purpose:
Builds dense Nx x Nx matrices of Fourier multipliers on the x-line
(F^{-1} diag(symbol) F) and applies the same multipliers matrix-free with
FFTs. Shared by the KP and NLS linearizations so dense eigensolves, resolvent
solves and matrix-free evolution use one discretization.

Dependencies:
- numpy (external library)
- src.grid.domain (symbols with the Nyquist convention)

Expected Input: Grid2D (x-part only), symbol arrays.
Expected Output: Dense real matrices / transformed profiles.
"""

from functools import lru_cache

import numpy as np

from src.grid.domain import Grid2D, derivative_symbol, inverse_derivative_symbol


def multiplier_matrix(symbol: np.ndarray) -> np.ndarray:
    """Dense matrix of the Fourier multiplier; real because symbol(-xi) = conj symbol(xi)."""
    n = symbol.size
    fourier_identity = np.fft.fft(np.eye(n), axis=0)
    return np.real(np.fft.ifft(symbol[:, None] * fourier_identity, axis=0))


@lru_cache(maxsize=32)
def derivative_matrix(grid: Grid2D, order: int) -> np.ndarray:
    matrix = multiplier_matrix(derivative_symbol(grid.xi, order))
    matrix.setflags(write=False)
    return matrix


@lru_cache(maxsize=32)
def antiderivative_matrix(grid: Grid2D) -> np.ndarray:
    matrix = multiplier_matrix(inverse_derivative_symbol(grid.xi))
    matrix.setflags(write=False)
    return matrix


def apply_multiplier(values: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    """Applies a multiplier along the last axis."""
    return np.fft.ifft(np.fft.fft(values, axis=-1) * symbol, axis=-1)


def dx(values: np.ndarray, grid: Grid2D, order: int = 1) -> np.ndarray:
    return apply_multiplier(values, derivative_symbol(grid.xi, order))


def dx_inverse(values: np.ndarray, grid: Grid2D) -> np.ndarray:
    return apply_multiplier(values, inverse_derivative_symbol(grid.xi))


def l2_inner(f: np.ndarray, g: np.ndarray, grid: Grid2D) -> complex:
    """Line inner product (f, g) = sum f conj(g) dx."""
    return complex(np.sum(f * np.conj(g)) * grid.dx)
