# tests/evolution/test_invariants.py

import math

import numpy as np
import pytest

from src.evolution.invariants import kp_hamiltonian, mass, nls_hamiltonian, transverse_l2
from src.grid.domain import Field, Grid2D
from src.solitons.profiles import kdv_Q, nls_Q

GRID = Grid2D(Nx=512, Ny=4, X=40.0, L=4.0)
AREA_Y = 2 * math.pi * GRID.L


class TestMass:

    def test_real_field_integrates_u(self):
        # integral of 3 sech^2(x/2) is 12
        Q = Field.from_profile(GRID, kdv_Q(GRID.x))
        assert mass(Q) == pytest.approx(12.0 * AREA_Y, rel=1e-12)

    def test_complex_field_integrates_modulus_squared(self):
        Q = Field.from_profile(GRID, nls_Q(GRID.x), 'complex')
        assert mass(Q) == pytest.approx(4.0 * AREA_Y, rel=1e-12)


class TestHamiltonians:

    def test_kp_soliton_energy(self):
        # u^2 -> 24, u^3 -> 288/5, u_x^2 -> 24/5
        Q = Field.from_profile(GRID, kdv_Q(GRID.x))
        assert kp_hamiltonian(Q) == pytest.approx(4.8 * AREA_Y, rel=1e-10)
        assert kp_hamiltonian(Q, frame_speed=0.0) == pytest.approx(-7.2 * AREA_Y, rel=1e-10)

    def test_nls_ground_state_energy(self):
        # |Q'|^2 -> 4/3, |Q|^2 -> 4, |Q|^4/2 -> 8/3
        Q = Field.from_profile(GRID, nls_Q(GRID.x), 'complex')
        assert nls_hamiltonian(Q) == pytest.approx((4.0 / 3.0 + 4.0 - 8.0 / 3.0) * AREA_Y, rel=1e-10)

    def test_phase_invariance(self):
        Q = Field.from_profile(GRID, nls_Q(GRID.x), 'complex')
        assert nls_hamiltonian(Q * np.exp(0.3j)) == pytest.approx(nls_hamiltonian(Q), rel=1e-13)


class TestTransverseL2:

    def test_y_independent_field(self):
        assert transverse_l2(Field.from_profile(GRID, kdv_Q(GRID.x))) < 1e-12

    def test_single_mode(self):
        X, Y = GRID.mesh()
        profile = np.exp(-X ** 2)
        f = Field(GRID, kdv_Q(X) + profile * np.cos(Y / GRID.L))
        # integral of cos^2 over one period is pi L
        expected = math.sqrt(np.sum(np.exp(-2 * GRID.x ** 2)) * GRID.dx * math.pi * GRID.L)
        assert transverse_l2(f) == pytest.approx(expected, rel=1e-12)
