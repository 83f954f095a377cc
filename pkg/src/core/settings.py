# /root/pkg/src/core/settings.py

"""
Configuration Loading Module

Purpose:
Loads project-wide defaults from environment variables (.env file) and the
configuration file (config.ini). Exposes them as module-level constants used
as the bottom layer of run configuration (flag > run file > these defaults).

Dependencies:
- os (standard Python library)
- configparser (standard Python library)
- python-dotenv (external library)
- src.utils.logger

Expected Input:
- .env file in the project root or 'secrets/' (worker-pool size).
- config.ini file in the project root.

Expected Output:
- Constants containing configuration values.
"""

import configparser
import os
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from src.utils.logger import log

# --- Determine Base Directory ---
# settings.py lives in src/core
BASE_DIR = Path(__file__).resolve().parent.parent.parent

# --- Load Environment Variables (.env) ---
env_path = BASE_DIR / '.env'
secrets_env_path = BASE_DIR / 'secrets' / '.env'

# Secrets first, then root .env. Existing env vars win (monkeypatch.setenv friendly).
if secrets_env_path.exists():
    log.debug(f"Loading environment variables from {secrets_env_path}")
    load_dotenv(dotenv_path=secrets_env_path, override=False)
elif env_path.exists():
    log.debug(f"Loading environment variables from {env_path}")
    load_dotenv(dotenv_path=env_path, override=False)
else:
    log.debug(f".env file not found at {env_path} or {secrets_env_path}. Relying on existing environment variables.")

# --- Load Configuration File (config.ini) ---
CONFIG_FILE_PATH = BASE_DIR / 'config.ini'
config: Optional[configparser.ConfigParser] = configparser.ConfigParser()
config_loaded = False

if not CONFIG_FILE_PATH.exists():
    log.warning(f"Configuration file not found: {CONFIG_FILE_PATH}. Using built-in defaults.")
    config = None
else:
    try:
        read_files = config.read(CONFIG_FILE_PATH, encoding='utf-8')
        if not read_files:
            log.error(f"Configuration file exists but could not be read or is empty: {CONFIG_FILE_PATH}")
            config = None
        else:
            log.debug(f"Loaded configuration from: {CONFIG_FILE_PATH}")
            config_loaded = True
    except configparser.Error as e:
        log.error(f"Error reading configuration file {CONFIG_FILE_PATH}: {e}. Using built-in defaults.")
        config = None

# Distinguishes missing keys from None values
_sentinel = object()


def get_config_value(section, key, default=None, required=False):
    """
    Safely retrieves a value from the loaded configparser object.
    Raises ValueError if 'required' is True and the value cannot be found.
    """
    if config is None or not config_loaded:
        if required:
            reason = "config read error or empty" if Path(CONFIG_FILE_PATH).exists() else "config file not found"
            log.error(f"Required configuration missing: section='{section}', key='{key}' ({reason}).")
            raise ValueError(f"Missing required config: [{section}] {key} ({reason}, path: {CONFIG_FILE_PATH}).")
        return default

    value = config.get(section, key, fallback=_sentinel)
    if value is _sentinel or value == '':
        if required:
            log.error(f"Required configuration key not found: section='{section}', key='{key}'.")
            raise ValueError(f"Missing required config key: [{section}] {key} in {CONFIG_FILE_PATH}")
        return default
    return value


def _float(section: str, key: str, default: float) -> float:
    raw = get_config_value(section, key, default=None)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        log.warning(f"Config [{section}] {key}={raw!r} is not a number, using default {default}")
        return default


def _int(section: str, key: str, default: int) -> int:
    raw = get_config_value(section, key, default=None)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        log.warning(f"Config [{section}] {key}={raw!r} is not an integer, using default {default}")
        return default


def _float_list(raw: str) -> List[float]:
    return [float(item) for item in raw.split(',') if item.strip()]


# --- Define Settings Constants ---

# Grid
NX = _int('Grid', 'Nx', 1024)
NY = _int('Grid', 'Ny', 16)
X_DEFAULT = _float('Grid', 'X', 40.0)
TAIL_TOLERANCE = _float('Grid', 'TailTolerance', 1e-12)
NLS_NX = _int('Grid', 'NlsNx', 512)
NLS_X = _float('Grid', 'NlsX', 24.0)

# Tolerances
STRUCTURAL_TOL = _float('Tolerances', 'Structural', 1e-10)
ALGEBRAIC_TOL = _float('Tolerances', 'Algebraic', 1e-12)
UNSTABLE_THRESHOLD = _float('Tolerances', 'UnstableThreshold', 1e-6)
CUTOFF_TOL = _float('Tolerances', 'CutoffTolerance', 1e-3)

# Integrator
SCHEME_KP = get_config_value('Integrator', 'SchemeKp', default='exponential-rk4').lower()
SCHEME_NLS = get_config_value('Integrator', 'SchemeNls', default='exponential-rk4').lower()
DT_KP = _float('Integrator', 'DtKp', 0.02)
DT_NLS = _float('Integrator', 'DtNls', 0.005)
SAMPLE_STRIDE = _int('Integrator', 'SampleStride', 10)
dealias_str = get_config_value('Integrator', 'Dealias', default='true')
DEALIAS = dealias_str.lower() == 'true'
BLOWUP_FACTOR = _float('Integrator', 'BlowUpFactor', 10.0)
CONTOUR_POINTS = _int('Integrator', 'ContourPoints', 32)

# Expansion
ORDER_M = _int('Expansion', 'Order', 3)

# Experiment
KAPPA = _float('Experiment', 'Kappa', 0.1)
T_MAX = _float('Experiment', 'TMax', 80.0)
DELTAS = _float_list(get_config_value('Experiment', 'Deltas', default='1e-3, 3e-4, 1e-4, 3e-5, 1e-5'))
NLS_L = _float('Experiment', 'NlsL', 4.0)

# Paths
OUTPUT_DIR_REL = get_config_value('Paths', 'Output', default='data/output')
SECRETS_DIR_REL = get_config_value('Paths', 'Secrets', default='secrets')
OUTPUT_DIR = Path(OUTPUT_DIR_REL) if Path(OUTPUT_DIR_REL).is_absolute() else BASE_DIR / OUTPUT_DIR_REL
SECRETS_DIR = BASE_DIR / SECRETS_DIR_REL

# Runtime
LOG_LEVEL = get_config_value('Runtime', 'LogLevel', default='INFO').upper()

workers_str = os.getenv('TRANSVERSE_LAB_WORKERS', '1')
try:
    WORKERS = max(1, int(workers_str))
except ValueError:
    log.warning(f"TRANSVERSE_LAB_WORKERS={workers_str!r} is not an integer, using 1 worker.")
    WORKERS = 1

# --- Validate Settings ---
for _name, _value in (('Nx', NX), ('Ny', NY), ('NlsNx', NLS_NX)):
    if _value < 1 or _value & (_value - 1):
        log.warning(f"[Grid] {_name}={_value} is not a power of two; grids built from it will be rejected.")

log.debug("Settings loading process completed.")
