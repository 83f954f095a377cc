# tests/core/test_run_config.py

import pytest

from src.core.errors import ConfigError
from src.core.run_config import SECTIONS, RunConfig


class TestRunConfig:

    def test_minimal_spectrum(self):
        config = RunConfig(command='spectrum', L=4.0)
        assert config.equation == 'kp'
        assert config.integrator().dt == 0.02
        assert config.integrator(t_end=3.0).t_end == 3.0

    def test_nls_spectrum_without_period(self):
        assert RunConfig(command='nls-spectrum', equation='nls').L is None

    @pytest.mark.parametrize("kwargs, path", [
        ({'command': 'plot'}, 'run.command'),
        ({'command': 'spectrum', 'L': 4.0, 'equation': 'kdv'}, 'run.equation'),
        ({'command': 'evolve'}, 'run.L'),
        ({'command': 'spectrum', 'L': -1.0}, 'run.L'),
        ({'command': 'evolve', 'L': 4.0, 'delta': -1e-3}, 'run.delta'),
        ({'command': 'sweep', 'L': 4.0, 'deltas': (1e-3,)}, 'run.deltas'),
        ({'command': 'sweep', 'L': 4.0, 'deltas': (1e-3, 0.0)}, 'run.deltas'),
        ({'command': 'spectrum', 'L': 4.0, 'Nx': 1000}, 'grid.Nx'),
        ({'command': 'spectrum', 'L': 4.0, 'Ny': 0}, 'grid.Ny'),
        ({'command': 'spectrum', 'L': 4.0, 'X': 0.0}, 'grid.X'),
        ({'command': 'expand', 'L': 4.0, 'M': -1}, 'expansion.M'),
        ({'command': 'instability', 'L': 4.0, 'kappa': 0.0}, 'experiment.kappa'),
        ({'command': 'instability', 'L': 4.0, 'eta': -1.0}, 'experiment.eta'),
        ({'command': 'evolve', 'L': 4.0, 'dt': 0.0}, 'integrator.dt'),
        ({'command': 'evolve', 'L': 4.0, 'scheme': 'rk45'}, 'integrator.scheme'),
    ])
    def test_validation_names_field(self, kwargs, path):
        with pytest.raises(ConfigError) as excinfo:
            RunConfig(**kwargs)
        assert excinfo.value.field_path == path

    def test_every_field_has_a_section(self):
        config = RunConfig(command='verify', quick=True)
        assert set(config.as_dict()) == set(SECTIONS)
        assert config.field_path('quick') == 'runtime.quick'
