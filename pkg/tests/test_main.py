# tests/test_main.py

import csv
import json
import logging

import pytest

from src.core.errors import LabError
from src.lab.instability import EscapeReport
from src.main import EXIT_LAB_ERROR, EXIT_OK, EXIT_UNEXPECTED, build_parser, main
from src.verify.acceptance import CheckResult


def run_main(argv):
    """Runs main(), catching SystemExit and returning the exit code."""
    try:
        main(argv)
    except SystemExit as e:
        return e.code
    except Exception as e:
        pytest.fail(f"main() raised unexpected exception: {type(e).__name__}: {e}")
    pytest.fail("main() returned without calling sys.exit")


@pytest.fixture
def output(tmp_path):
    return tmp_path / 'runs'


def _read_table(path):
    lines = path.read_text(encoding='utf-8').splitlines()
    return lines[0], list(csv.DictReader(lines[1:]))


class TestParser:

    def test_common_options(self):
        args = build_parser().parse_args(['sweep', '--L', '4', '--deltas', '1e-3,1e-4', '--t-max', '50',
                                          '--no-dealias'])
        assert (args.command, args.L, args.deltas, args.t_max, args.dealias) == ('sweep', 4.0, '1e-3,1e-4', 50.0,
                                                                                  False)

    def test_unset_flags_are_none(self):
        args = build_parser().parse_args(['spectrum'])
        assert args.L is None and args.dealias is None and args.Nx is None

    def test_quick_only_for_verify(self):
        assert build_parser().parse_args(['verify', '--quick']).quick is True
        with pytest.raises(SystemExit):
            build_parser().parse_args(['spectrum', '--quick'])


class TestMain:

    def test_spectrum_success(self, output):
        code = run_main(['spectrum', '--L', '4', '--Nx', '512', '--output', str(output), '--run-id', 'ok'])
        assert code == EXIT_OK

        root = output / 'ok-spectrum'
        report = json.loads((root / 'report.json').read_text(encoding='utf-8'))
        assert report['k0'] == 1
        assert report['sigma0'] == pytest.approx(0.187672, abs=1e-6)
        assert report['mu'] == pytest.approx(1.650115, abs=1e-6)

        header, rows = _read_table(root / 'tables' / 'kp-dispersion.csv')
        assert header == '# schema: kp-dispersion v1'
        assert [row['k'] for row in rows] == ['1']
        assert (root / 'fields' / 'eigenmode.bin').is_file()
        assert (root / 'config.ini').is_file()
        assert not (root / 'error.json').exists()

    def test_below_threshold_is_lab_error(self, output):
        code = run_main(['spectrum', '--L', '2', '--Nx', '256', '--output', str(output), '--run-id', 'low'])
        assert code == EXIT_LAB_ERROR
        error = json.loads((output / 'low-spectrum' / 'error.json').read_text(encoding='utf-8'))
        assert error['code'] == 'no_unstable_mode'
        _, rows = _read_table(output / 'low-spectrum' / 'tables' / 'kp-dispersion.csv')
        assert rows == []

    def test_config_error(self, output, caplog):
        with caplog.at_level(logging.CRITICAL, logger='transverse_lab'):
            code = run_main(['evolve', '--output', str(output), '--run-id', 'bad'])
        assert code == EXIT_LAB_ERROR
        assert "Invalid configuration" in caplog.text
        error = json.loads((output / 'bad-config-error' / 'error.json').read_text(encoding='utf-8'))
        assert error['details']['field_path'] == 'run.L'

    def test_run_file(self, output, tmp_path, mocker):
        handler = mocker.patch.dict('src.main.HANDLERS', {'evolve': mocker.Mock(return_value=EXIT_OK)})
        run_file = tmp_path / 'run.ini'
        run_file.write_text("[run]\nL = 6.0\n\n[grid]\nNx = 256\n", encoding='utf-8')
        code = run_main(['evolve', '--config', str(run_file), '--Nx', '128', '--output', str(output),
                         '--run-id', 'file'])
        assert code == EXIT_OK
        config = handler['evolve'].call_args.args[0]
        assert (config.L, config.Nx) == (6.0, 128)

    def test_instability_writes_remainder(self, output, mocker):
        report = EscapeReport(equation='kp', L=4.0, delta=1e-4, kappa=0.1, sigma0=0.187672, k0=1, eta=0.05,
                              c_s=1.0, escaped=True, T_delta_measured=30.0, T_delta_predicted=36.8,
                              times=[0.0, 0.2], distance_series=[1e-4, 1.1e-4],
                              transverse_series=[1e-4, 1.04e-4], remainder_series=[0.0, 3e-9],
                              remainder_norm=3e-9)
        experiment = mocker.patch('src.main.run_experiment', return_value=report)
        code = run_main(['instability', '--L', '4', '--delta', '1e-4', '--output', str(output), '--run-id', 'w'])
        assert code == EXIT_OK
        assert experiment.call_args.args[0].track_remainder is True

        _, rows = _read_table(output / 'w-instability' / 'tables' / 'escape-series.csv')
        assert [float(row['remainder']) for row in rows] == [0.0, 3e-9]
        summary = json.loads((output / 'w-instability' / 'report.json').read_text(encoding='utf-8'))
        assert summary['remainder_norm'] == 3e-9

    def test_unexpected_error(self, output, mocker):
        mocker.patch('src.spectrum.kp.admissible_modes', side_effect=RuntimeError("unexpected"))
        code = run_main(['spectrum', '--L', '4', '--output', str(output), '--run-id', 'crash'])
        assert code == EXIT_UNEXPECTED
        error = json.loads((output / 'crash-spectrum' / 'error.json').read_text(encoding='utf-8'))
        assert error['code'] == 'unexpected'

    def test_lab_error_from_handler(self, output, mocker):
        mocker.patch.dict('src.main.HANDLERS', {'expand': mocker.Mock(side_effect=LabError("iterate failed"))})
        code = run_main(['expand', '--L', '4', '--output', str(output), '--run-id', 'x'])
        assert code == EXIT_LAB_ERROR

    @pytest.mark.parametrize("passed, expected", [(True, EXIT_OK), (False, EXIT_UNEXPECTED)])
    def test_verify_exit_code(self, output, mocker, capsys, passed, expected):
        results = [CheckResult('nls_theta', 'trivial', 0.57735, '1/sqrt3 within 1e-8', passed)]
        suite = mocker.patch('src.main.run_suite', return_value=results)
        code = run_main(['verify', '--quick', '--output', str(output), '--run-id', 'v'])
        assert code == expected
        suite.assert_called_once_with(quick=True)
        assert 'nls_theta' in capsys.readouterr().out
        report = json.loads((output / 'v-verify' / 'report.json').read_text(encoding='utf-8'))
        assert report['passed'] == int(passed)

    @pytest.mark.parametrize("level_arg", ["DEBUG", "WARNING", "ERROR"])
    def test_log_level(self, output, mocker, level_arg):
        mocker.patch.dict('src.main.HANDLERS', {'spectrum': mocker.Mock(return_value=EXIT_OK)})
        set_level = mocker.patch('src.main.set_level')
        run_main(['spectrum', '--L', '4', '--log-level', level_arg, '--output', str(output)])
        set_level.assert_any_call(level_arg)
        assert set_level.call_count == 2
