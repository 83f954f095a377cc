# tests/solitons/test_profiles.py

import math

import numpy as np
import pytest
from scipy import integrate

from src.core.errors import DomainError
from src.grid.domain import Grid2D
from src.solitons.profiles import (SolitonSpec, kdv_Q, kdv_Q_prime, nls_Q, nls_Q_prime, sample_soliton,
                                   stationarity_residual)


def test_kdv_value_at_two():
    assert kdv_Q(2.0) == pytest.approx(3.0 / math.cosh(1.0) ** 2, rel=1e-14)
    assert kdv_Q(2.0) == pytest.approx(1.259923, abs=1e-6)


def test_profiles_do_not_overflow_far_out():
    x = np.array([-1e4, 0.0, 1e4])
    with np.errstate(over='raise'):
        values = kdv_Q(x)
        ground = nls_Q(x)
    assert values[0] == 0.0 and values[1] == 3.0
    assert ground[1] == pytest.approx(math.sqrt(2.0))


def test_nls_norms_by_quadrature():
    q_sq, _ = integrate.quad(lambda x: nls_Q(x) ** 2, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13)
    dq_sq, _ = integrate.quad(lambda x: nls_Q_prime(x) ** 2, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13)
    assert q_sq == pytest.approx(4.0, rel=1e-10)
    assert dq_sq == pytest.approx(4.0 / 3.0, rel=1e-10)


def test_kdv_scaling_family():
    x = np.linspace(-5, 5, 11)
    c = 2.5
    assert np.allclose(kdv_Q(x, c), c * kdv_Q(math.sqrt(c) * x))
    assert np.allclose(kdv_Q_prime(x, c), c ** 1.5 * kdv_Q_prime(math.sqrt(c) * x))


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_non_positive_scale_rejected(bad):
    with pytest.raises(DomainError):
        kdv_Q(0.0, bad)
    with pytest.raises(DomainError):
        nls_Q(0.0, bad)
    with pytest.raises(DomainError):
        SolitonSpec('kdv', scale=bad)


def test_unknown_family():
    with pytest.raises(DomainError):
        SolitonSpec('kdv2')


@pytest.mark.parametrize("family", ['kdv', 'nls'])
def test_stationarity_residual(family):
    grid = Grid2D.line(1024, 40.0)
    assert stationarity_residual(SolitonSpec(family), grid) < 1e-8


@pytest.mark.parametrize("spec", [SolitonSpec('kdv', scale=1.7), SolitonSpec('nls', scale=0.8, phase=0.3)])
def test_scaled_members_are_stationary(spec):
    grid = Grid2D.line(1024, 40.0)
    assert stationarity_residual(spec, grid) < 1e-8


def test_sampled_nls_soliton_is_complex_and_y_independent():
    grid = Grid2D(Nx=64, Ny=4, X=10.0, L=1.0)
    f = sample_soliton(SolitonSpec('nls', phase=math.pi / 2), grid)
    assert f.kind == 'complex'
    assert np.allclose(f.values[:, 0], f.values[:, 3])
    assert np.allclose(f.values[:, 0].real, 0.0, atol=1e-15)


def test_shifted_profile():
    spec = SolitonSpec('kdv', center=1.5)
    assert spec.profile(np.array([1.5]))[0] == pytest.approx(3.0)
