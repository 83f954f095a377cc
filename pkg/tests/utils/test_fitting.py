# tests/utils/test_fitting.py

import numpy as np
import pytest

from src.core.errors import DomainError
from src.utils.fitting import fit_growth_rate, linear_fit


class TestLinearFit:

    def test_exact_line(self):
        x = np.linspace(0.0, 5.0, 11)
        fit = linear_fit(x, 3.0 * x - 2.0)
        assert fit.slope == pytest.approx(3.0)
        assert fit.intercept == pytest.approx(-2.0)
        assert fit.r_squared == pytest.approx(1.0)
        assert fit.samples == 11

    def test_as_dict_keys(self):
        fit = linear_fit([0.0, 1.0, 2.0], [1.0, 2.0, 3.5])
        assert set(fit.as_dict()) == {'slope', 'intercept', 'r_squared', 'stderr', 'samples'}

    @pytest.mark.parametrize("x, y", [
        ([1.0], [1.0]),
        ([1.0, 2.0], [1.0, 2.0, 3.0]),
    ])
    def test_rejects_bad_samples(self, x, y):
        with pytest.raises(DomainError):
            linear_fit(x, y)


class TestGrowthRate:

    def test_exponential(self):
        t = np.linspace(0.0, 10.0, 51)
        fit = fit_growth_rate(t, 1e-4 * np.exp(0.25 * t))
        assert fit.slope == pytest.approx(0.25)
        assert np.exp(fit.intercept) == pytest.approx(1e-4)

    def test_sign_and_zeros_ignored(self):
        t = np.array([0.0, 1.0, 2.0, 3.0])
        values = np.array([0.0, -np.exp(0.5), np.exp(1.0), -np.exp(1.5)])
        fit = fit_growth_rate(t, values)
        assert fit.samples == 3
        assert fit.slope == pytest.approx(0.5)

    def test_window_inclusive(self):
        t = np.linspace(0.0, 20.0, 21)
        values = np.where(t < 10.0, np.exp(0.1 * t), np.exp(0.3 * t))
        fit = fit_growth_rate(t, values, window=(10.0, 20.0))
        assert fit.samples == 11
        assert fit.slope == pytest.approx(0.3)
