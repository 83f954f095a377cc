# Inside tests/core/test_settings.py

import importlib
import logging
from pathlib import Path

import pytest

import src.core.settings as settings


def _reload_with(monkeypatch, setup):
    """Reloads settings with `setup` applied, then restores the real module."""
    try:
        with monkeypatch.context() as m:
            setup(m)
            importlib.reload(settings)
            return {name: getattr(settings, name) for name in
                    ('config', 'config_loaded', 'WORKERS', 'NX', 'DT_KP', 'TAIL_TOLERANCE', 'DELTAS')}
    finally:
        importlib.reload(settings)


def test_defaults_from_config_ini():
    assert settings.config_loaded is True
    assert settings.NX == 1024
    assert settings.NY == 16
    assert settings.TAIL_TOLERANCE == pytest.approx(1e-12)
    assert settings.DELTAS == [1e-3, 3e-4, 1e-4, 3e-5, 1e-5]
    assert settings.SCHEME_KP == 'exponential-rk4'
    assert settings.DEALIAS is True


def test_config_missing(monkeypatch):
    """Missing config.ini falls back to built-in defaults."""
    expected_config_path = settings.BASE_DIR / 'config.ini'
    original_exists = Path.exists

    def mock_exists(path_instance):
        if path_instance == expected_config_path:
            return False
        return original_exists(path_instance)

    values = _reload_with(monkeypatch, lambda m: m.setattr(Path, "exists", mock_exists))

    assert values['config'] is None
    assert values['config_loaded'] is False
    assert values['NX'] == 1024
    assert values['DT_KP'] == pytest.approx(0.02)


def test_get_config_value_required_missing():
    with pytest.raises(ValueError, match="NoSuchKey"):
        settings.get_config_value('Grid', 'NoSuchKey', required=True)
    assert settings.get_config_value('Grid', 'NoSuchKey', default='x') == 'x'


def test_bad_number_falls_back(monkeypatch, caplog):
    monkeypatch.setattr(settings.config, 'get', lambda section, key, fallback=None: 'many')
    with caplog.at_level(logging.WARNING, logger='transverse_lab'):
        assert settings._int('Grid', 'Nx', 64) == 64
        assert settings._float('Grid', 'X', 2.5) == 2.5
    assert "is not an integer" in caplog.text
    assert "is not a number" in caplog.text


@pytest.mark.parametrize("raw, expected", [("4", 4), ("0", 1), ("lots", 1)])
def test_workers_from_environment(monkeypatch, raw, expected):
    setup = lambda m: m.setenv("TRANSVERSE_LAB_WORKERS", raw)
    assert _reload_with(monkeypatch, setup)['WORKERS'] == expected
