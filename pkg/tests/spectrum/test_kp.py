# tests/spectrum/test_kp.py

import logging
import math

import numpy as np
import pytest

from src.core.errors import DomainError, NoSuchMode, NoUnstableMode, ZeroModeViolation
from src.grid.domain import Field, Grid2D, Spectrum1D
from src.solitons.profiles import kdv_Q_prime
from src.spectrum import kp
from src.spectrum.operators import dx

L4_MU = 1.650115
L4_SIGMA = 0.187672


@pytest.fixture(scope='module')
def point_L4():
    return kp.most_unstable_point(4.0)


@pytest.fixture(scope='module')
def mode_L4(point_L4):
    return kp.eigenprofile(point_L4, kp.mode_grid(point_L4, 1024))


class TestBranch:

    def test_sigma_vanishes_at_branch_ends(self):
        assert kp.sigma_of_mu(1.0) == 0.0
        assert kp.sigma_of_mu(2.0) == 0.0

    def test_mu_outside_branch(self):
        with pytest.raises(DomainError):
            kp.sigma_of_mu(2.5)

    def test_peak_of_branch(self):
        mus = np.linspace(1.0, 2.0, 200001)
        best = mus[np.argmax(kp.sigma_of_mu(mus))]
        assert best == pytest.approx(kp.MU_STAR, abs=1e-5)
        assert kp.sigma_of_mu(kp.MU_STAR) == pytest.approx(kp.SIGMA_STAR, rel=1e-12)

    @pytest.mark.parametrize("mu", [1.1, 1.5, 1.650115, 1.9])
    def test_k_mu_round_trip(self, mu):
        assert kp.mu_of_k(kp.k_of_mu(mu, 4.0), 4.0) == pytest.approx(mu, abs=1e-12)

    @pytest.mark.parametrize("k, L", [(3, 4.0), (2, 2.0)])
    def test_mode_off_branch(self, k, L):
        with pytest.raises(NoSuchMode):
            kp.mu_of_k(k, L)


class TestAdmissibleModes:

    def test_threshold(self):
        assert kp.admissible_modes(2.0) == []
        assert [p.k for p in kp.admissible_modes(2.5)] == [1]
        assert kp.KP_THRESHOLD == pytest.approx(2.309401, abs=1e-6)

    def test_threshold_is_strict(self):
        assert kp.admissible_modes(kp.KP_THRESHOLD) == []

    def test_mode_count_grows_with_L(self):
        assert [p.k for p in kp.admissible_modes(10.0)] == [1, 2, 3, 4]

    def test_L8_table(self):
        points = kp.admissible_modes(8.0)
        assert [p.k for p in points] == [1, 2, 3]
        assert [p.sigma for p in points] == pytest.approx([0.121734, 0.187672, 0.158494], abs=1e-6)
        assert kp.most_unstable_point(8.0).k == 2

    def test_non_positive_period(self):
        with pytest.raises(DomainError):
            kp.admissible_modes(0.0)

    def test_no_unstable_mode_below_threshold(self, caplog):
        caplog.set_level(logging.INFO, logger="transverse_lab")
        with pytest.raises(NoUnstableMode):
            kp.most_unstable_point(2.0)
        assert "threshold" in caplog.text


class TestDispersionAlgebra:

    def test_L4_values(self, point_L4):
        assert point_L4.k == 1
        assert point_L4.mu == pytest.approx(L4_MU, abs=1e-6)
        assert point_L4.sigma == pytest.approx(L4_SIGMA, abs=1e-6)
        assert point_L4.lam == pytest.approx(2 * point_L4.sigma)

    @pytest.mark.parametrize("L", [2.5, 4.0, 8.0, 10.0])
    def test_algebraic_system_holds_for_every_mode(self, L):
        for point in kp.admissible_modes(L):
            assert kp.verify_algebraic_system(point).ok()

    def test_perturbed_mu_breaks_decay_condition(self, point_L4):
        assert abs(kp.C_plus(point_L4.mu + 0.01, point_L4.lam)) > 1e-4

    def test_quartic_roots(self, point_L4):
        roots = kp.quartic_roots(point_L4.lam, point_L4.eta)
        assert abs(np.sum(roots)) < 1e-10
        assert np.max(np.abs(kp.quartic_P(roots, point_L4.lam, point_L4.eta))) < 1e-10
        assert np.min(np.abs(roots - point_L4.mu)) < 1e-10
        assert np.sum(roots.real > 0) == 2
        assert np.sum(roots.real < 0) == 2
        assert list(roots.real) == sorted(roots.real)

    @pytest.mark.parametrize("L", [4.0, 8.0, 10.0])
    def test_brute_force_agrees(self, L):
        closed = kp.most_unstable_point(L)
        brute = kp.brute_force_most_unstable(L)
        assert brute.k == closed.k
        assert brute.mu == pytest.approx(closed.mu, abs=1e-4)


class TestEigenprofile:

    def test_g_at_origin(self, point_L4):
        assert complex(kp.g_mu(0.0, point_L4.mu)) == pytest.approx(3 * point_L4.mu ** 2)
        assert float(kp.g_decaying(0.0, point_L4.mu)) == pytest.approx(3 * point_L4.mu ** 2)

    def test_g_decays_at_both_ends(self, point_L4):
        assert kp.g_decaying(60.0, point_L4.mu) < 1e-6
        assert kp.g_decaying(-60.0, point_L4.mu) < 1e-6

    def test_box_is_derived_from_tail(self, point_L4):
        X = kp.box_half_period(point_L4.mu, tail_tolerance=1e-10)
        assert X == 140.0
        assert math.exp(-(2 - point_L4.mu) * X / 2) < 1e-10

    def test_box_never_below_minimum(self):
        assert kp.box_half_period(1.01, tail_tolerance=1e-2, minimum=40.0) == 40.0

    def test_normalization(self, mode_L4):
        V = mode_L4.V
        assert math.sqrt(np.sum(np.abs(V) ** 2) * mode_L4.grid.dx) == pytest.approx(1.0, rel=1e-12)
        assert V[mode_L4.grid.origin_index()].real > 0

    def test_residual(self, mode_L4):
        assert kp.mode_residual(mode_L4) < 1e-8

    def test_spectral_convergence(self, point_L4, mode_L4):
        coarse = kp.eigenprofile(point_L4, kp.mode_grid(point_L4, 512))
        assert kp.mode_residual(coarse) >= 10 * kp.mode_residual(mode_L4)

    def test_closed_form_second_derivative(self, point_L4):
        grid = Grid2D(Nx=2048, Ny=1, X=kp.box_half_period(point_L4.mu, tail_tolerance=1e-14), L=4.0)
        z = grid.x / 2
        g = kp.g_decaying(z, point_L4.mu)
        spectral = 4.0 * dx(g.astype(complex), grid, 2).real
        exact = kp.g_decaying_second(z, point_L4.mu)
        assert np.max(np.abs(spectral - exact)) < 1e-9 * np.max(np.abs(exact))

    def test_rejects_point_off_decay_condition(self, point_L4):
        bad = kp.DispersionPoint(mu=point_L4.mu + 0.01, lam=point_L4.lam, sigma=point_L4.sigma,
                                 eta=point_L4.eta, k=point_L4.k, L=point_L4.L)
        with pytest.raises(DomainError):
            kp.eigenprofile(bad, Grid2D.line(64, 40.0))


class TestOperators:

    def test_matrix_matches_matrix_free(self):
        grid = Grid2D(Nx=64, Ny=1, X=30.0, L=4.0)
        v = Spectrum1D(grid, kdv_Q_prime(grid.x), mode=1)
        dense = kp.A_matrix(v.j, grid) @ v.values
        assert np.max(np.abs(dense - kp.apply_Aj(v).values)) < 1e-10

    def test_translation_mode_is_in_kernel(self):
        grid = Grid2D.line(512, 40.0)
        v = Spectrum1D(grid, kdv_Q_prime(grid.x), mode=0)
        assert np.max(np.abs(kp.apply_Aj(v).values)) < 1e-8

    def test_linearity(self):
        grid = Grid2D(Nx=128, Ny=1, X=30.0, L=4.0)
        f = np.exp(-grid.x ** 2) * grid.x
        g = np.exp(-(grid.x - 1) ** 2) - np.exp(-(grid.x + 1) ** 2)
        combined = kp.apply_Aj(Spectrum1D(grid, 2 * f - 3j * g, mode=1)).values
        separate = 2 * kp.apply_Aj(Spectrum1D(grid, f, mode=1)).values \
            - 3j * kp.apply_Aj(Spectrum1D(grid, g, mode=1)).values
        assert np.max(np.abs(combined - separate)) < 1e-10

    def test_cylinder_operator_acts_per_mode(self):
        grid = Grid2D(Nx=128, Ny=4, X=30.0, L=4.0)
        X, Y = grid.mesh()
        f = Field(grid, kdv_Q_prime(X) * np.cos(Y / grid.L))
        line = Grid2D(Nx=128, Ny=1, X=30.0, L=4.0)
        profile = kp.apply_Aj(Spectrum1D(line, kdv_Q_prime(line.x), mode=1)).values.real
        expected = profile[:, None] * np.cos(Y / grid.L)
        assert np.max(np.abs(kp.apply_A(f).values - expected)) < 1e-10

    def test_mean_rejected_for_transverse_mode(self):
        grid = Grid2D(Nx=64, Ny=1, X=20.0, L=4.0)
        with pytest.raises(ZeroModeViolation):
            kp.apply_Aj(Spectrum1D(grid, np.ones(64), mode=1))

    def test_L_discrete_spectrum(self):
        values = np.sort(kp.L_operator_spectrum(Grid2D.line(1024, 40.0)))
        assert values.size == 3
        assert np.allclose(values, [-1.25, 0.0, 0.75], atol=1e-6)

    def test_L_kernel_is_soliton_derivative(self):
        grid = Grid2D.line(512, 40.0)
        pairs = kp.L_operator_eigenpairs(grid)
        kernel = pairs.eigenvectors[:, np.argmin(np.abs(pairs.eigenvalues))]
        derivative = kdv_Q_prime(grid.x)
        cosine = abs(np.dot(kernel, derivative)) / (np.linalg.norm(kernel) * np.linalg.norm(derivative))
        assert cosine > 1 - 1e-8


@pytest.fixture(scope='module')
def sweep(point_L4):
    grid = kp.mode_grid(point_L4, 512)
    H = Spectrum1D(grid, np.exp(-grid.x ** 2 / 16.0), mode=point_L4.k)
    return kp.resolvent_sweep(point_L4.k / point_L4.L, point_L4.sigma + 0.1, [0.0, 1.0, 10.0, 100.0], H,
                              point_L4.sigma)


class TestResolvent:

    def test_conservation_identity(self, sweep):
        assert max(r.identity_residual for r in sweep) < 1e-10

    def test_ratios_stay_bounded(self, sweep):
        ratios = [r.ratio_s1 for r in sweep]
        assert ratios[-1] <= max(ratios[:-1])

    def test_zero_forcing_gives_zero(self):
        grid = Grid2D.line(64, 20.0)
        w = kp.resolvent_solve(0.5, 1.0, 0.0, Spectrum1D(grid, np.zeros(64)))
        assert not np.any(w.values)

    def test_warns_when_shift_below_growth_rate(self, caplog):
        grid = Grid2D(Nx=64, Ny=1, X=20.0, L=4.0)
        H = Spectrum1D(grid, np.exp(-grid.x ** 2), mode=1)
        kp.resolvent_solve(0.25, 0.1, 5.0, H, sigma0=0.187672)
        assert "does not exceed sigma0" in caplog.text
