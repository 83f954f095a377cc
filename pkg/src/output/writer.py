# /root/pkg/src/output/writer.py

"""
Run Directory Writer

Purpose:
Persists the artifacts of one command under
<output_root>/<run_id or timestamp>-<command>/:
    config.ini          resolved RunConfig
    tables/<name>.csv   versioned CSV tables ('# schema: <name> v<version>')
    fields/<name>.bin   binary field snapshots
    report.json         structured summary (sorted keys)
    error.json          machine-readable error record (failed runs only)
    run.log             log of the run
Tables, fields, config and report hold no timestamps, so identical configs give
byte-identical files.

Dependencies:
- csv, json, datetime (standard Python library)
- numpy (external library)
- src.grid.serialization, src.parsing.config_parser, src.core.errors, src.utils.logger
"""

import csv
import json
import math
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence, Union

import numpy as np

from src.core.errors import LabError
from src.core.run_config import RunConfig
from src.grid.domain import Field
from src.grid.serialization import write_field as write_field_file
from src.parsing.config_parser import write_config as write_config_file
from src.utils.logger import add_file_handler, log

# name -> (version, columns)
SCHEMAS: Dict[str, tuple] = {
    'kp-dispersion': (1, ['k', 'mu', 'lambda', 'sigma', 'eta', 'L']),
    'kp-resolvent': (1, ['tau', 'ratio_s0', 'ratio_s1', 'identity_residual', 'kernel_component']),
    'nls-sigma': (1, ['k', 'epsilon', 'sigma_re', 'sigma_im']),
    'nls-bifurcation': (1, ['epsilon', 'sigma_re', 'sigma_im']),
    'trajectory': (1, ['t', 'l2', 'mass', 'transverse_l2', 'sup', 'hamiltonian']),
    'iterate-norms': (1, ['t', 'k', 'm', 'l2']),
    'iterate-growth': (1, ['k', 'slope', 'expected', 'r_squared']),
    'residual': (1, ['t', 'residual_l2']),
    'escape-series': (1, ['t', 'distance', 'transverse_l2', 'remainder']),
    'escape-sweep': (1, ['delta', 'ln_inv_delta', 'T_measured', 'T_predicted']),
    'verify': (1, ['check', 'tier', 'value', 'target', 'passed']),
}


def _plain(value: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (complex, np.complexfloating)):
        return [_plain(value.real), _plain(value.imag)]
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _cell(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


class RunWriter:
    """Owns one run directory; every artifact of a command goes through it."""

    def __init__(self, output_root: Union[str, Path], command: str, run_id: Optional[str] = None,
                 log_to_file: bool = True):
        stamp = run_id or datetime.now().strftime('%Y%m%dT%H%M%S')
        self.root = Path(output_root) / f"{stamp}-{command}"
        self.tables_dir = self.root / 'tables'
        self.fields_dir = self.root / 'fields'
        self.tables_dir.mkdir(parents=True, exist_ok=True)
        self.fields_dir.mkdir(parents=True, exist_ok=True)
        if log_to_file:
            add_file_handler(self.root / 'run.log')
        log.info(f"Run directory: {self.root}")

    def write_table(self, name: str, rows: Iterable[Sequence[Any]], header: Optional[Sequence[str]] = None,
                    schema: Optional[str] = None) -> Path:
        schema = schema or name
        version, columns = SCHEMAS.get(schema, (1, None))
        header = list(header or columns or [])
        if not header:
            raise ValueError(f"No columns known for table '{name}' (schema '{schema}')")
        path = self.tables_dir / f"{name}.csv"
        with open(path, 'w', encoding='utf-8', newline='') as handle:
            handle.write(f"# schema: {schema} v{version}\n")
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
        log.debug(f"Wrote table {path}")
        return path

    def write_report(self, payload: Dict[str, Any]) -> Path:
        path = self.root / 'report.json'
        with open(path, 'w', encoding='utf-8') as handle:
            json.dump(_plain(payload), handle, indent=2, sort_keys=True)
            handle.write('\n')
        return path

    def write_field(self, name: str, field: Field) -> Path:
        return write_field_file(self.fields_dir / f"{name}.bin", field)

    def write_config(self, config: RunConfig) -> Path:
        return write_config_file(config, self.root / 'config.ini')

    def write_error(self, exc: BaseException) -> Path:
        if isinstance(exc, LabError):
            record = exc.to_record()
        else:
            record = {'error': type(exc).__name__, 'code': 'unexpected', 'message': str(exc), 'details': {}}
        path = self.root / 'error.json'
        with open(path, 'w', encoding='utf-8') as handle:
            json.dump(_plain(record), handle, indent=2, sort_keys=True)
            handle.write('\n')
        return path
