# /root/pkg/src/grid/serialization.py

"""
Field Serialization Module

Purpose:
Writes and reads fields in a flat little-endian binary container and exports
1-D slices as CSV.

Container layout:
    magic  b'TLF1'            4 bytes
    Nx, Ny                    2 x int32
    X, L                      2 x float64
    kind                      int32 (0 = real, 1 = complex)
    samples                   row-major (x-major) float64 / complex128

Dependencies:
- numpy (external library)
- struct, csv (standard Python library)
- src.grid.domain

Expected Input: Field objects / container paths.
Expected Output: Files on disk / Field objects.
"""

import csv
import struct
from pathlib import Path
from typing import Union

import numpy as np

from src.core.errors import GridMismatch
from src.grid.domain import Field, Grid2D
from src.utils.logger import log

MAGIC = b'TLF1'
HEADER = struct.Struct('<4siiddi')
KIND_CODES = {'real': 0, 'complex': 1}
SLICE_SCHEMA = '# schema: field-slice v1'


def write_field(path: Union[str, Path], f: Field) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    g = f.grid
    dtype = '<f8' if f.kind == 'real' else '<c16'
    with open(path, 'wb') as handle:
        handle.write(HEADER.pack(MAGIC, g.Nx, g.Ny, float(g.X), float(g.L), KIND_CODES[f.kind]))
        handle.write(np.ascontiguousarray(f.values, dtype=dtype).tobytes(order='C'))
    log.debug(f"Wrote field {g.Nx}x{g.Ny} ({f.kind}) to {path}")
    return path


def read_field(path: Union[str, Path]) -> Field:
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise GridMismatch(f"File {path} is too short for a field header")
    magic, nx, ny, X, L, kind_code = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise GridMismatch(f"File {path} is not a field container", magic=repr(magic))
    kind = 'real' if kind_code == 0 else 'complex'
    dtype = '<f8' if kind == 'real' else '<c16'
    samples = np.frombuffer(data, dtype=dtype, offset=HEADER.size)
    if samples.size != nx * ny:
        raise GridMismatch(f"File {path} holds {samples.size} samples, header says {nx * ny}")
    return Field(Grid2D(Nx=nx, Ny=ny, X=X, L=L), samples.reshape(nx, ny), kind)


def export_slice_csv(path: Union[str, Path], f: Field, axis: str = 'x', index: int = 0) -> Path:
    """
    Writes the slice along `axis` at the given index of the other axis.
    Columns: coordinate, real, imag.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if axis == 'x':
        coords, samples = f.grid.x, f.values[:, index]
    elif axis == 'y':
        coords, samples = f.grid.y, f.values[index, :]
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")

    with open(path, 'w', newline='', encoding='utf-8') as handle:
        handle.write(SLICE_SCHEMA + '\n')
        writer = csv.writer(handle)
        writer.writerow([axis, 'real', 'imag'])
        for c, v in zip(coords, samples):
            writer.writerow([repr(float(c)), repr(float(np.real(v))), repr(float(np.imag(v)))])
    return path
