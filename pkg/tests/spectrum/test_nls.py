# tests/spectrum/test_nls.py

import math

import numpy as np
import pytest

from src.core.errors import NoUnstableMode
from src.grid.domain import Grid2D, Spectrum1D
from src.spectrum import nls

GRID = Grid2D.line(256, 24.0)
SQRT3 = math.sqrt(3.0)


class TestOperators:

    def test_lpm_discrete_eigenvalues(self):
        spectrum = nls.lpm_spectrum(GRID)
        assert np.allclose(np.sort(spectrum['plus'])[:2], [-3.0, 0.0], atol=1e-6)
        assert np.sort(spectrum['minus'])[0] == pytest.approx(0.0, abs=1e-6)
        # the second L- eigenvalue, if any, is a threshold state at the continuum edge
        assert np.all(np.sort(spectrum['minus'])[1:] > 0.9)

    def test_operators_are_symmetric(self):
        Lplus, Lminus = nls.assemble_Lpm(GRID)
        assert np.max(np.abs(Lplus - Lplus.T)) == 0.0
        assert np.max(np.abs(Lminus - Lminus.T)) == 0.0

    def test_eigenvalues_come_in_quadruples(self):
        values = nls.block_spectrum(0.5, GRID)
        sigma = values[np.argmax(values.real)]
        assert sigma.real > 0
        assert np.min(np.abs(values + sigma)) < 1e-8
        assert np.min(np.abs(values - np.conj(sigma))) < 1e-8


class TestTransverseEigen:

    def test_small_epsilon_slope(self):
        mode = nls.transverse_eigen(0.02, GRID)
        assert mode is not None
        assert mode.sigma.imag == 0.0
        assert mode.growth_rate / 0.02 == pytest.approx(2.0, rel=0.05)

    @pytest.mark.parametrize("epsilon", [2.0, 10.0])
    def test_large_epsilon_is_stable(self, epsilon):
        assert nls.transverse_eigen(epsilon, GRID) is None

    def test_mode_quality(self):
        mode = nls.transverse_eigen(0.5, GRID, k=1, L=2.0)
        assert (mode.k, mode.L) == (1, 2.0)
        assert nls.eigen_residual(mode) < 1e-8
        assert nls.conservation_identity(mode) < 1e-8
        norm = math.sqrt(np.sum(np.abs(mode.V1) ** 2 + np.abs(mode.V2) ** 2) * GRID.dx)
        assert norm == pytest.approx(1.0, rel=1e-12)

    def test_complex_profile(self):
        mode = nls.transverse_eigen(0.5, GRID)
        np.testing.assert_allclose(mode.complex_profile(), mode.V1 + 1j * mode.V2)


class TestBifurcation:

    def test_theta(self):
        assert nls.theta_ratio() == pytest.approx(1.0 / SQRT3, abs=1e-8)

    def test_richardson_removes_linear_and_quadratic_terms(self):
        samples = {e: 2 * e + 3 * e ** 2 + 5 * e ** 3 for e in (0.01, 0.02, 0.04)}
        assert nls.richardson_slope(samples) == pytest.approx(2.0, abs=1e-12)

    def test_richardson_needs_doubling_samples(self):
        with pytest.raises(ValueError):
            nls.richardson_slope({0.01: 0.02, 0.03: 0.06, 0.04: 0.08})

    def test_unstable_slope(self):
        report = nls.bifurcation_check(GRID)
        assert report.omega1_unstable == pytest.approx(2.0, rel=0.02)
        assert report.max_unstable_count == 1
        assert report.even_symmetric
        assert report.as_dict()['omega1_stable_expected'] == pytest.approx(2.0 / SQRT3, abs=1e-8)


@pytest.fixture(scope='module')
def cutoff():
    return nls.epsilon_cutoff(GRID)


class TestCutoff:

    def test_cutoff_near_sqrt3(self, cutoff):
        assert cutoff == pytest.approx(SQRT3, abs=5e-3)
        assert nls.smallest_unstable_period(GRID) == pytest.approx(1.0 / cutoff)

    def test_large_period_has_unstable_mode(self):
        grid = Grid2D.line(128, 24.0)
        mode = nls.most_unstable_nls(50.0, grid, cutoff=SQRT3)
        assert mode.k >= 1
        assert mode.growth_rate > 0
        assert mode.epsilon == pytest.approx(mode.k / 50.0)

    def test_small_period_is_stable(self):
        with pytest.raises(NoUnstableMode):
            nls.most_unstable_nls(0.1, GRID, cutoff=SQRT3)

    def test_sigma_table(self, cutoff):
        rows = nls.nls_sigma_table(2.0, GRID)
        assert [k for k, _, _ in rows] == [1, 2, 3]
        assert all(sigma.real > 0 for _, _, sigma in rows)


class TestResolvent:

    def test_conservation_identity(self):
        mode = nls.transverse_eigen(0.5, GRID)
        H1 = Spectrum1D(GRID, np.exp(-GRID.x ** 2))
        H2 = Spectrum1D(GRID, GRID.x * np.exp(-GRID.x ** 2))
        gamma0 = mode.growth_rate + 0.1
        for tau in (0.0, 1.0, 10.0):
            w1, w2 = nls.resolvent_solve_nls(0.5, gamma0, tau, H1, H2)
            assert nls.nls_conservation_identity_residual(w1, w2, H1, H2, 0.5, gamma0) < 1e-10
            assert nls.nls_resolvent_ratio(w1, w2, H1, H2) > 0
