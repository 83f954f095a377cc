# /root/pkg/src/utils/fitting.py

"""
Least-Squares Fits

Purpose:
Linear and log-linear regressions used for growth rates (log |u| against t),
residual scaling and the escape-time law (T against ln(1/delta)).

Dependencies:
- numpy, scipy (external libraries)
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from src.core.errors import DomainError


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float
    stderr: float
    samples: int

    def as_dict(self) -> dict:
        return {'slope': self.slope, 'intercept': self.intercept, 'r_squared': self.r_squared,
                'stderr': self.stderr, 'samples': self.samples}


def linear_fit(x: Sequence[float], y: Sequence[float]) -> LinearFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or x.size != y.size:
        raise DomainError(f"A linear fit needs at least two paired samples, got {x.size} and {y.size}")
    result = stats.linregress(x, y)
    return LinearFit(slope=float(result.slope), intercept=float(result.intercept),
                     r_squared=float(result.rvalue ** 2), stderr=float(result.stderr), samples=int(x.size))


def fit_growth_rate(times: Sequence[float], values: Sequence[float],
                    window: Optional[Tuple[float, float]] = None) -> LinearFit:
    """Fits log(values) = rate * t + c over the window (inclusive)."""
    times = np.asarray(times, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    keep = values > 0
    if window is not None:
        keep &= (times >= window[0] - 1e-12) & (times <= window[1] + 1e-12)
    return linear_fit(times[keep], np.log(values[keep]))
