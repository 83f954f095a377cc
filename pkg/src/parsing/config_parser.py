# /root/pkg/src/parsing/config_parser.py

"""
Run Configuration Parser

Purpose:
Resolves a RunConfig from three layers, later layers winning:
1. project defaults (src.core.settings, i.e. config.ini),
2. a run file: INI sections [run], [grid], [integrator], [expansion],
   [experiment], [runtime] (YAML with the same sections is also accepted),
3. command-line flags (argparse Namespace or mapping; None means "not given").
Also writes a resolved RunConfig back as INI so that it re-parses to an
identical object.

Dependencies:
- configparser (standard Python library)
- PyYAML (external library)
- src.core.run_config, src.core.settings, src.core.errors, src.utils.logger

Expected Input: parsed CLI arguments, optional run-file path.
Expected Output: RunConfig.
"""

import configparser
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import yaml

from src.core import settings
from src.core.errors import ConfigError
from src.core.run_config import SECTIONS, RunConfig
from src.utils.logger import log

FLOATS = {'L', 'delta', 'X', 'dt', 't_end', 'kappa', 'eta', 't_max'}
INTS = {'Nx', 'Ny', 'sample_stride', 'M'}
BOOLS = {'dealias', 'quick'}
OPTIONAL = {'L', 'X', 'eta', 'run_id'}
# CLI spellings that differ from field names
CLI_ALIASES = {'config': None, 'log_level': 'log_level', 'output': 'output_dir'}


def default_values(command: str, equation: str) -> Dict[str, Any]:
    """Bottom layer: project settings, with the time step and scheme picked per equation."""
    nls = equation == 'nls' or command == 'nls-spectrum'
    return {
        'command': command,
        'equation': equation,
        'L': settings.NLS_L if (nls and command != 'nls-spectrum') else None,
        'delta': 1e-4,
        'deltas': tuple(settings.DELTAS),
        'run_id': None,
        'output_dir': str(settings.OUTPUT_DIR),
        'Nx': settings.NLS_NX if nls else settings.NX,
        'Ny': settings.NY,
        'X': None,
        'dt': settings.DT_NLS if nls else settings.DT_KP,
        'scheme': settings.SCHEME_NLS if nls else settings.SCHEME_KP,
        't_end': 10.0,
        'dealias': settings.DEALIAS,
        'sample_stride': settings.SAMPLE_STRIDE,
        'M': settings.ORDER_M,
        'kappa': settings.KAPPA,
        'eta': None,
        't_max': settings.T_MAX,
        'log_level': settings.LOG_LEVEL,
        'quick': False,
    }


def _convert(name: str, raw: Any) -> Any:
    """Converts a raw (string or native) value to the field's type."""
    path = f"{SECTIONS[name]}.{name}"
    if raw is None or (isinstance(raw, str) and raw.strip() == ''):
        if name in OPTIONAL:
            return None
        if name == 'deltas':
            return ()
        raise ConfigError(f"Empty value for {name}", field_path=path)
    try:
        if name in FLOATS:
            return float(raw)
        if name in INTS:
            value = float(raw)
            if value != int(value):
                raise ValueError(f"{raw!r} is not an integer")
            return int(value)
        if name in BOOLS:
            if isinstance(raw, bool):
                return raw
            return str(raw).strip().lower() == 'true'
        if name == 'deltas':
            items = raw if isinstance(raw, (list, tuple)) else str(raw).split(',')
            return tuple(float(item) for item in items if str(item).strip())
        return str(raw).strip()
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid value {raw!r} for {name}: {e}", field_path=path) from e


def read_run_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Reads a run file into {field: raw value}; unknown keys raise ConfigError."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Run file not found: {path}", field_path='config')
    if path.suffix.lower() in ('.yaml', '.yml'):
        try:
            data = yaml.safe_load(path.read_text(encoding='utf-8')) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Could not parse {path}: {e}", field_path='config') from e
        sections = {str(k): (v or {}) for k, v in data.items()}
    else:
        parser = configparser.ConfigParser()
        parser.optionxform = str
        try:
            parser.read(path, encoding='utf-8')
        except configparser.Error as e:
            raise ConfigError(f"Could not parse {path}: {e}", field_path='config') from e
        sections = {name: dict(parser.items(name)) for name in parser.sections()}

    raw: Dict[str, Any] = {}
    for section, entries in sections.items():
        if not isinstance(entries, Mapping):
            raise ConfigError(f"Section [{section}] must hold key = value pairs", field_path=section)
        for key, value in entries.items():
            if SECTIONS.get(key) != section:
                raise ConfigError(f"Unknown key '{key}' in section [{section}]", field_path=f"{section}.{key}")
            raw[key] = value
    log.debug(f"Read {len(raw)} keys from run file {path}")
    return raw


def _cli_values(args: Union[None, Mapping[str, Any], Any]) -> Dict[str, Any]:
    if args is None:
        return {}
    items = dict(args) if isinstance(args, Mapping) else vars(args)
    values = {}
    for key, value in items.items():
        name = CLI_ALIASES.get(key, key)
        if name is None or name not in SECTIONS or value is None:
            continue
        values[name] = value
    return values


def parse_config(args: Union[None, Mapping[str, Any], Any] = None,
                 file: Optional[Union[str, Path]] = None) -> RunConfig:
    """
    Resolves the configuration: CLI flag beats run file beats project default.
    Raises ConfigError naming the offending field.
    """
    cli = _cli_values(args)
    file_values = read_run_file(file) if file else {}

    command = cli.get('command', file_values.get('command'))
    if not command:
        raise ConfigError("No command given", field_path='run.command')
    equation = str(cli.get('equation', file_values.get('equation', 'kp'))).strip()

    resolved = default_values(str(command).strip(), equation)
    for layer in (file_values, cli):
        for name, raw in layer.items():
            resolved[name] = _convert(name, raw)

    names = {f.name for f in fields(RunConfig)}
    config = RunConfig(**{k: v for k, v in resolved.items() if k in names})
    log.debug(f"Resolved run config: {config.as_dict()}")
    return config


def _format(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ', '.join(repr(float(v)) for v in value)
    return str(value)


def config_to_ini(config: RunConfig) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    for name, value in config.as_dict().items():
        section = SECTIONS[name]
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, name, _format(value))
    return parser


def write_config(config: RunConfig, path: Union[str, Path]) -> Path:
    """Writes the resolved config as INI; parse_config(file=path) restores it exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as handle:
        config_to_ini(config).write(handle)
    return path
