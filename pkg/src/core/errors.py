# /root/pkg/src/core/errors.py

"""
Error Types Module

Purpose:
Defines the exception hierarchy raised by the numerical modules. Every error
carries a stable `error_code` and can render itself as a machine-readable
record, which the command-line front end writes next to the run outputs.

Dependencies: None

Expected Input: Raised by grid, spectrum, evolution and configuration code.
Expected Output: Exceptions with `to_record()` dictionaries.
"""

from typing import Any, Dict, Optional


class LabError(Exception):
    """Base class for all domain errors of the lab."""

    error_code = 'lab_error'

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def to_record(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            'error': type(self).__name__,
            'code': self.error_code,
            'message': self.message,
        }
        if self.details:
            record['details'] = {k: _plain(v) for k, v in sorted(self.details.items())}
        return record


def _plain(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return repr(value)


class GridMismatch(LabError, ValueError):
    """Array shape does not match the grid."""

    error_code = 'grid_mismatch'


class ZeroModeViolation(LabError):
    """A nonzero transverse mode carries a nonzero x-mean (outside discrete Z²)."""

    error_code = 'zero_mode_violation'


class DomainError(LabError, ValueError):
    """Argument outside the domain of a closed-form relation."""

    error_code = 'domain_error'


class NoSuchMode(LabError):
    """Requested transverse mode is not on the instability branch."""

    error_code = 'no_such_mode'


class NoUnstableMode(LabError):
    """No transverse mode is unstable for the given period."""

    error_code = 'no_unstable_mode'


class SingularSystem(LabError):
    """A resolvent system is numerically singular."""

    error_code = 'singular_system'


class DegenerateSpectrum(LabError):
    """More than one unstable eigenvalue pair was found."""

    error_code = 'degenerate_spectrum'


class CFLViolation(LabError):
    """Time step exceeds the stability bound of the scheme."""

    error_code = 'cfl_violation'


class BlowUpSuspected(LabError):
    """Sup-norm growth beyond the guard factor during NLS evolution."""

    error_code = 'blowup_suspected'


class ConfigError(LabError, ValueError):
    """Invalid or missing run configuration value."""

    error_code = 'config_error'

    def __init__(self, message: str, field_path: Optional[str] = None, **details: Any):
        super().__init__(message, field_path=field_path, **details)
        self.field_path = field_path
