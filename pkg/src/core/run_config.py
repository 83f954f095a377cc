# /root/pkg/src/core/run_config.py

"""
Run Configuration Model

Purpose:
Defines the RunConfig data structure: one fully resolved, validated set of
parameters for a single command of the lab. Every field belongs to an INI
section so a resolved config can be written next to the outputs and read
back unchanged.

Dependencies:
- dataclasses (standard Python library)
- src.core.errors
- src.evolution.integrators (IntegratorConfig)
"""

from dataclasses import dataclass, fields
from typing import Dict, Optional, Tuple

from src.core.errors import ConfigError
from src.evolution.integrators import IntegratorConfig

COMMANDS = ('spectrum', 'nls-spectrum', 'evolve', 'expand', 'instability', 'sweep', 'verify')
EQUATIONS = ('kp', 'nls')
NEEDS_L = ('spectrum', 'evolve', 'expand', 'instability', 'sweep')

# field name -> INI section
SECTIONS: Dict[str, str] = {
    'command': 'run', 'equation': 'run', 'L': 'run', 'delta': 'run', 'deltas': 'run', 'run_id': 'run',
    'output_dir': 'run',
    'Nx': 'grid', 'Ny': 'grid', 'X': 'grid',
    'dt': 'integrator', 'scheme': 'integrator', 't_end': 'integrator', 'dealias': 'integrator',
    'sample_stride': 'integrator',
    'M': 'expansion',
    'kappa': 'experiment', 'eta': 'experiment', 't_max': 'experiment',
    'log_level': 'runtime', 'quick': 'runtime',
}


@dataclass(frozen=True)
class RunConfig:
    """Resolved parameters of one lab command."""

    command: str
    equation: str = 'kp'
    L: Optional[float] = None
    delta: float = 1e-4
    deltas: Tuple[float, ...] = ()
    run_id: Optional[str] = None
    output_dir: str = 'data/output'
    Nx: int = 1024
    Ny: int = 16
    X: Optional[float] = None
    dt: float = 0.02
    scheme: str = 'exponential-rk4'
    t_end: float = 10.0
    dealias: bool = True
    sample_stride: int = 10
    M: int = 3
    kappa: float = 0.1
    eta: Optional[float] = None
    t_max: float = 80.0
    log_level: str = 'INFO'
    quick: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"Unknown command '{self.command}'", field_path='run.command')
        if self.equation not in EQUATIONS:
            raise ConfigError(f"equation must be one of {EQUATIONS}, got '{self.equation}'",
                              field_path='run.equation')
        if self.command in NEEDS_L and self.L is None:
            raise ConfigError(f"Command '{self.command}' needs the transverse period L", field_path='run.L')
        if self.L is not None and self.L <= 0:
            raise ConfigError(f"L must be positive, got {self.L}", field_path='run.L')
        if self.delta < 0:
            raise ConfigError(f"delta must be >= 0, got {self.delta}", field_path='run.delta')
        if any(d <= 0 for d in self.deltas):
            raise ConfigError("Every sweep delta must be positive", field_path='run.deltas')
        if self.command == 'sweep' and len(self.deltas) < 2:
            raise ConfigError("sweep needs at least two deltas", field_path='run.deltas')
        for name in ('Nx', 'Ny'):
            value = getattr(self, name)
            if value < 1 or value & (value - 1):
                raise ConfigError(f"{name} must be a power of two, got {value}", field_path=f'grid.{name}')
        if self.X is not None and self.X <= 0:
            raise ConfigError(f"X must be positive, got {self.X}", field_path='grid.X')
        if self.M < 0:
            raise ConfigError(f"M must be >= 0, got {self.M}", field_path='expansion.M')
        if self.kappa <= 0:
            raise ConfigError(f"kappa must be positive, got {self.kappa}", field_path='experiment.kappa')
        if self.eta is not None and self.eta <= 0:
            raise ConfigError(f"eta must be positive, got {self.eta}", field_path='experiment.eta')
        # integrator fields are checked by IntegratorConfig itself
        self.integrator()

    def integrator(self, t_end: Optional[float] = None) -> IntegratorConfig:
        return IntegratorConfig(dt=self.dt, scheme=self.scheme, t_end=self.t_end if t_end is None else t_end,
                                dealias=self.dealias, sample_stride=self.sample_stride)

    def field_path(self, name: str) -> str:
        return f"{SECTIONS[name]}.{name}"

    def as_dict(self) -> Dict[str, object]:
        return {f.name: getattr(self, f.name) for f in fields(self)}
