# tests/grid/test_serialization.py

import numpy as np
import pytest

from src.core.errors import GridMismatch
from src.grid.domain import Field, Grid2D
from src.grid.serialization import SLICE_SCHEMA, export_slice_csv, read_field, write_field


@pytest.fixture
def complex_field():
    grid = Grid2D(Nx=32, Ny=4, X=8.0, L=3.0)
    return Field.from_function(grid, lambda x, y: np.exp(-x ** 2) * np.exp(1j * y / 3.0), kind='complex')


def test_binary_container_restores_field(tmp_path, complex_field):
    path = write_field(tmp_path / 'u.bin', complex_field)
    restored = read_field(path)
    assert restored.grid == complex_field.grid
    assert restored.kind == 'complex'
    assert np.array_equal(restored.values, complex_field.values)


def test_writing_twice_is_byte_identical(tmp_path, complex_field):
    a = write_field(tmp_path / 'a.bin', complex_field).read_bytes()
    b = write_field(tmp_path / 'b.bin', complex_field).read_bytes()
    assert a == b


def test_foreign_file_is_rejected(tmp_path):
    path = tmp_path / 'bad.bin'
    path.write_bytes(b'NOPE' + bytes(64))
    with pytest.raises(GridMismatch):
        read_field(path)


def test_truncated_file_is_rejected(tmp_path, complex_field):
    data = write_field(tmp_path / 'u.bin', complex_field).read_bytes()
    (tmp_path / 'short.bin').write_bytes(data[:-16])
    with pytest.raises(GridMismatch):
        read_field(tmp_path / 'short.bin')


def test_slice_export(tmp_path, complex_field):
    path = export_slice_csv(tmp_path / 'slice.csv', complex_field, axis='y', index=3)
    lines = path.read_text(encoding='utf-8').splitlines()
    assert lines[0] == SLICE_SCHEMA
    assert lines[1] == 'y,real,imag'
    assert len(lines) == 2 + complex_field.grid.Ny


def test_slice_export_rejects_unknown_axis(tmp_path, complex_field):
    with pytest.raises(ValueError):
        export_slice_csv(tmp_path / 'slice.csv', complex_field, axis='z')
