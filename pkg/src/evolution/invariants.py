# /root/pkg/src/evolution/invariants.py

"""
Conserved Quantities

Purpose:
Quadratures of the quantities conserved by the two flows, used as
trajectory diagnostics:
- KP-I (frame speed c): integral of u, integral of u^2, and the Hamiltonian
  E = integral of c u^2/2 - u^3/6 + u_x^2/2 + (dx^{-1} u_y)^2/2;
- NLS: mass integral |u|^2 and H = integral |grad u|^2 + |u|^2 - |u|^4/2.

Dependencies:
- numpy (external library)
- src.grid.domain
"""

import numpy as np

from src.grid.domain import Field, antideriv_x, d_dx, d_dy, l2_norm, laplacian, project_nonzero_y


def _integral(values: np.ndarray, f: Field) -> float:
    return float(np.real(np.sum(values)) * f.grid.dx * f.grid.dy)


def mass(f: Field) -> float:
    """Integral of u (real fields) or of |u|^2 (complex fields)."""
    if f.kind == 'real':
        return _integral(f.values, f)
    return _integral(np.abs(f.values) ** 2, f)


def kp_hamiltonian(f: Field, frame_speed: float = 1.0) -> float:
    u = f.values
    ux = d_dx(f, 1).values
    w = antideriv_x(d_dy(f, 1)).values
    density = 0.5 * frame_speed * u ** 2 - u ** 3 / 6.0 + 0.5 * ux ** 2 + 0.5 * w ** 2
    return _integral(density, f)


def nls_hamiltonian(f: Field) -> float:
    u = f.values
    # integral |grad u|^2 = -Re integral conj(u) Laplacian u
    gradient = -np.real(np.conj(u) * laplacian(f).values)
    density = gradient + np.abs(u) ** 2 - 0.5 * np.abs(u) ** 4
    return _integral(density, f)


def transverse_l2(f: Field) -> float:
    """L2 norm of the part of u carried by nonzero transverse modes."""
    return l2_norm(project_nonzero_y(f))
