# tests/lab/test_distance.py

import math

import numpy as np
import pytest

from src.evolution.invariants import transverse_l2
from src.grid.domain import Field, Grid2D
from src.lab.distance import kp_orbit, nls_orbit, orbital_distance_kp, orbital_distance_nls
from src.solitons.profiles import kdv_Q, nls_Q

KP_GRID = Grid2D(Nx=512, Ny=4, X=40.0, L=4.0)
NLS_GRID = Grid2D(Nx=256, Ny=4, X=24.0, L=2.0)


class TestKPOrbit:

    def test_soliton_is_on_orbit(self):
        point = kp_orbit(KP_GRID).locate(Field.from_profile(KP_GRID, kdv_Q(KP_GRID.x)))
        assert point.distance < 1e-10
        assert point.shift == pytest.approx(0.0, abs=1e-8)

    @pytest.mark.parametrize("a", [1.3, -7.05])
    def test_translate_is_on_orbit(self, a):
        u = Field.from_profile(KP_GRID, kdv_Q(KP_GRID.x - a))
        point = kp_orbit(u).locate(u)
        assert point.distance < 1e-8
        assert point.shift == pytest.approx(a, abs=1e-8)

    def test_transverse_part_adds_in_quadrature(self):
        X, Y = KP_GRID.mesh()
        u = Field(KP_GRID, kdv_Q(X) + 0.01 * np.exp(-X ** 2) * np.cos(Y / KP_GRID.L))
        assert orbital_distance_kp(u) == pytest.approx(transverse_l2(u), rel=1e-10)

    def test_amplitude_mismatch(self):
        u = Field.from_profile(KP_GRID, 1.01 * kdv_Q(KP_GRID.x))
        # |Q|^2 over the cylinder is 24 * 2 pi L
        expected = 0.01 * math.sqrt(24.0 * 2 * math.pi * KP_GRID.L)
        assert orbital_distance_kp(u) == pytest.approx(expected, rel=1e-8)

    def test_wrong_resolution(self):
        orbit = kp_orbit(Grid2D.line(256, 40.0))
        with pytest.raises(ValueError):
            orbit(Field.from_profile(KP_GRID, kdv_Q(KP_GRID.x)))

    def test_custom_profile(self):
        u = Field.from_profile(KP_GRID, 2.0 * kdv_Q(KP_GRID.x))
        assert orbital_distance_kp(u, profile=2.0 * kdv_Q(KP_GRID.x)) < 1e-10


class TestNLSOrbit:

    def test_phase_and_shift(self):
        u = Field.from_profile(NLS_GRID, np.exp(0.7j) * nls_Q(NLS_GRID.x + 2.0), 'complex')
        point = nls_orbit(u).locate(u)
        assert point.distance < 1e-8
        assert point.shift == pytest.approx(-2.0, abs=1e-8)
        assert point.phase == pytest.approx(0.7, abs=1e-8)

    def test_phase_is_ignored_by_distance(self):
        u = Field.from_profile(NLS_GRID, -1j * nls_Q(NLS_GRID.x), 'complex')
        assert orbital_distance_nls(u) < 1e-10
