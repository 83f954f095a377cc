# tests/output/test_writer.py

import json
import logging

import numpy as np
import pytest

from src.core.errors import NoUnstableMode
from src.core.run_config import RunConfig
from src.grid.domain import Field, Grid2D
from src.grid.serialization import read_field
from src.output.writer import SCHEMAS, RunWriter
from src.parsing.config_parser import parse_config
from src.utils.logger import LOGGER_NAME, remove_file_handlers


@pytest.fixture
def writer(tmp_path):
    return RunWriter(tmp_path, 'spectrum', run_id='test', log_to_file=False)


class TestRunWriter:

    def test_layout(self, writer, tmp_path):
        assert writer.root == tmp_path / 'test-spectrum'
        assert writer.tables_dir.is_dir()
        assert writer.fields_dir.is_dir()

    def test_table_schema_header(self, writer):
        path = writer.write_table('kp-dispersion', [[1, 1.65, 0.5, 0.18, 0.1, 4.0], [2, np.float64(1.2), 0.1, 0.05,
                                                                                    0.01, 4.0]])
        lines = path.read_text(encoding='utf-8').splitlines()
        assert lines[0] == '# schema: kp-dispersion v1'
        assert lines[1] == ','.join(SCHEMAS['kp-dispersion'][1])
        assert lines[2] == '1,1.65,0.5,0.18,0.1,4.0'
        assert lines[3].startswith('2,1.2,')

    def test_table_cells(self, writer):
        path = writer.write_table('checks', [['kp_threshold', 'trivial', None, 'x', True]], schema='verify')
        assert path.name == 'checks.csv'
        assert path.read_text(encoding='utf-8').splitlines()[2] == 'kp_threshold,trivial,,x,true'

    def test_table_needs_columns(self, writer):
        with pytest.raises(ValueError):
            writer.write_table('unknown', [[1.0]])
        custom = writer.write_table('unknown', [[1.0]], header=['a'])
        assert custom.read_text(encoding='utf-8').splitlines()[1] == 'a'

    def test_report_is_plain_json(self, writer):
        path = writer.write_report({'sigma0': np.float64(0.187672), 'k0': np.int64(1), 'sigma': 1 + 2j,
                                    'missing': float('nan'), 'values': np.array([1.0, 2.0]), 'ok': np.bool_(True)})
        report = json.loads(path.read_text(encoding='utf-8'))
        assert report == {'sigma0': 0.187672, 'k0': 1, 'sigma': [1.0, 2.0], 'missing': None,
                          'values': [1.0, 2.0], 'ok': True}

    def test_report_is_deterministic(self, tmp_path):
        payload = {'b': 1.0, 'a': [0.1, 0.2]}
        first = RunWriter(tmp_path / 'one', 'evolve', run_id='r', log_to_file=False).write_report(payload)
        second = RunWriter(tmp_path / 'two', 'evolve', run_id='r', log_to_file=False).write_report(dict(reversed(
            list(payload.items()))))
        assert first.read_bytes() == second.read_bytes()

    def test_field_snapshot(self, writer):
        grid = Grid2D(Nx=16, Ny=2, X=4.0, L=1.0)
        field = Field(grid, np.arange(32, dtype=float).reshape(grid.shape))
        restored = read_field(writer.write_field('final', field))
        np.testing.assert_array_equal(restored.values, field.values)

    def test_config_round_trip(self, writer):
        config = RunConfig(command='spectrum', L=4.0, run_id='test')
        assert parse_config(file=writer.write_config(config)) == config

    def test_lab_error_record(self, writer):
        path = writer.write_error(NoUnstableMode("No transverse instability for L=2", L=2.0))
        record = json.loads(path.read_text(encoding='utf-8'))
        assert record['code'] == 'no_unstable_mode'
        assert record['details'] == {'L': 2.0}

    def test_unexpected_error_record(self, writer):
        record = json.loads(writer.write_error(RuntimeError("boom")).read_text(encoding='utf-8'))
        assert record == {'error': 'RuntimeError', 'code': 'unexpected', 'message': 'boom', 'details': {}}

    def test_run_log(self, tmp_path):
        writer = RunWriter(tmp_path, 'verify', run_id='logged')
        try:
            logging.getLogger(LOGGER_NAME).warning("written to the run log")
        finally:
            remove_file_handlers()
        assert "written to the run log" in (writer.root / 'run.log').read_text(encoding='utf-8')
