# tests/spectrum/test_operators.py

import numpy as np
import pytest

from src.grid.domain import Grid2D
from src.spectrum.operators import antiderivative_matrix, derivative_matrix, dx, dx_inverse, l2_inner

GRID = Grid2D.line(64, 10.0)


def _wave(n=1):
    return np.cos(n * np.pi * GRID.x / GRID.X)


class TestDenseOperators:

    def test_derivative_of_a_wave(self):
        kx = 3.0 * np.pi / GRID.X
        expected = -kx * np.sin(kx * GRID.x)
        assert np.max(np.abs(derivative_matrix(GRID, 1) @ _wave(3) - expected)) < 1e-11

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_matches_matrix_free(self, order):
        values = np.random.default_rng(7).standard_normal(GRID.Nx)
        dense = derivative_matrix(GRID, order) @ values
        assert np.max(np.abs(dense - dx(values, GRID, order).real)) < 1e-10
        assert np.max(np.abs(dx(values, GRID, order).imag)) < 1e-10

    def test_cached_and_read_only(self):
        matrix = derivative_matrix(GRID, 2)
        assert derivative_matrix(Grid2D.line(64, 10.0), 2) is matrix
        assert matrix.dtype == np.float64
        with pytest.raises(ValueError):
            matrix[0, 0] = 1.0

    def test_antiderivative_drops_the_mean(self):
        values = _wave(2) + 0.3
        recovered = derivative_matrix(GRID, 1) @ (antiderivative_matrix(GRID) @ values)
        assert np.max(np.abs(recovered - _wave(2))) < 1e-11
        assert np.max(np.abs(dx(dx_inverse(values, GRID), GRID).real - _wave(2))) < 1e-11


def test_l2_inner():
    assert l2_inner(np.ones(GRID.Nx), np.ones(GRID.Nx), GRID) == pytest.approx(2.0 * GRID.X)
    assert abs(l2_inner(_wave(1), _wave(2), GRID)) < 1e-12
    assert l2_inner(1j * np.ones(GRID.Nx), np.ones(GRID.Nx), GRID) == pytest.approx(2j * GRID.X)
