# /root/pkg/src/main.py

"""
Main Application Entry Point

Purpose:
Command-line front end of the transverse-instability lab. Resolves the run
configuration, runs one command and persists its artifacts in a fresh run
directory (config.ini, tables/*.csv, fields/*.bin, report.json, run.log).

Workflow:
1. Parse command-line arguments and set the logging level.
2. Resolve the RunConfig (flag > run file > config.ini defaults).
3. Open the run directory and write the resolved config.
4. Execute the command; every step logs its start and failure.
5. On failure write error.json; exit 0 on success, 2 on a lab error,
   1 on an unexpected error or failed acceptance checks.

Commands:
    spectrum       KP-I dispersion table, unstable eigenmode, resolvent sweep
    nls-spectrum   NLS bifurcation check, cutoff and sigma table
    evolve         evolution of Q + delta u^0
    expand         iterates u^0..u^M of the approximate solution and its residual
    instability    single escape-time experiment with remainder tracking
    sweep          delta sweep and fit of T_delta against ln(1/delta)
    verify         acceptance suite (--quick: trivial tier only)

Execution:
transverse-lab spectrum --L 4 [--config run.ini] [--log-level DEBUG]
"""

import argparse
import sys
from typing import List, Optional

import numpy as np

from src.core import settings
from src.core.errors import LabError
from src.core.run_config import COMMANDS, EQUATIONS, RunConfig
from src.evolution.steppers import SCHEMES
from src.expansion.grenier import (approximate_solution, iterate_growth_rates, iterate_norm_rows,
                                   residual_norm, uniform_time_grid)
from src.grid.domain import Field, Grid2D, Spectrum1D
from src.lab.instability import ExperimentSpec, run_experiment, scaling_fit, seeded_trajectory
from src.output.writer import RunWriter
from src.parsing.config_parser import parse_config
from src.spectrum import kp as kp_spectrum
from src.spectrum import nls as nls_spectrum
from src.utils.logger import log, remove_file_handlers, set_level
from src.verify.acceptance import format_table, run_suite

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_LAB_ERROR = 2
RESOLVENT_TAUS = (0.0, 1.0, 10.0, 100.0)


# --- Commands ---

def run_spectrum(config: RunConfig, writer: RunWriter) -> int:
    points = kp_spectrum.admissible_modes(config.L)
    writer.write_table('kp-dispersion', [[p.k, p.mu, p.lam, p.sigma, p.eta, p.L] for p in points])
    # raises NoUnstableMode below the threshold
    point = kp_spectrum.most_unstable_point(config.L)
    algebra = kp_spectrum.verify_algebraic_system(point)
    mode = kp_spectrum.eigenprofile(point, kp_spectrum.mode_grid(point, config.Nx))
    writer.write_field('eigenmode', Field.from_profile(mode.grid, np.real(mode.V)))

    grid = mode.grid
    H = Spectrum1D(grid, np.exp(-grid.x ** 2 / 16.0).astype(complex), mode=point.k)
    records = kp_spectrum.resolvent_sweep(mode.j, point.sigma + 0.1, RESOLVENT_TAUS, H, point.sigma)
    writer.write_table('kp-resolvent', [[r.tau, r.ratio_s0, r.ratio_s1, r.identity_residual, r.kernel_component]
                                        for r in records])
    L_values = kp_spectrum.L_operator_spectrum(Grid2D.line(config.Nx, config.X or settings.X_DEFAULT))
    writer.write_report({
        'command': config.command,
        'L': config.L,
        'threshold': kp_spectrum.KP_THRESHOLD,
        'k0': point.k, 'mu': point.mu, 'lambda': point.lam, 'sigma0': point.sigma, 'eta': point.eta,
        'algebra_residuals': algebra.residuals,
        'eigenmode_residual': kp_spectrum.mode_residual(mode),
        'box_half_period': grid.X,
        'L_operator_eigenvalues': sorted(L_values.tolist()),
    })
    log.info(f"Most unstable mode k0={point.k}: mu={point.mu:.6f}, sigma0={point.sigma:.6f}")
    return EXIT_OK


def run_nls_spectrum(config: RunConfig, writer: RunWriter) -> int:
    grid = Grid2D.line(config.Nx, config.X or settings.NLS_X)
    report = nls_spectrum.bifurcation_check(grid)
    writer.write_table('nls-bifurcation', [[eps, s.real, s.imag] for eps, s in sorted(report.sigma_samples.items())])
    cutoff = nls_spectrum.epsilon_cutoff(grid)
    payload = {
        'command': config.command,
        'bifurcation': report.as_dict(),
        'epsilon_cutoff': cutoff,
        'L0': 1.0 / cutoff,
        'Lpm_eigenvalues': {name: values.tolist() for name, values in nls_spectrum.lpm_spectrum(grid).items()},
    }
    if config.L is not None:
        rows = nls_spectrum.nls_sigma_table(config.L, grid)
        writer.write_table('nls-sigma', [[k, eps, s.real, s.imag] for k, eps, s in rows])
        payload['L'] = config.L
    writer.write_report(payload)
    return EXIT_OK


def experiment_spec(config: RunConfig, delta: Optional[float] = None, t_end: Optional[float] = None,
                    track_remainder: bool = False) -> ExperimentSpec:
    delta = config.delta if delta is None else delta
    return ExperimentSpec(equation=config.equation, L=config.L, delta=delta,
                          integrator=config.integrator(t_end or config.t_max), M=config.M,
                          eta_threshold=config.eta, t_max=t_end or config.t_max,
                          kappa=max(config.kappa, delta), Nx=config.Nx, Ny=config.Ny,
                          track_remainder=track_remainder)


def run_evolve(config: RunConfig, writer: RunWriter) -> int:
    spec = experiment_spec(config, t_end=config.t_end)
    trajectory, seed = seeded_trajectory(spec, t_end=config.t_end)
    writer.write_table('trajectory', trajectory.rows(), header=['t'] + trajectory.columns())
    writer.write_field('final', trajectory.final)
    writer.write_report({
        'command': config.command, 'equation': config.equation, 'L': config.L, 'delta': config.delta,
        'sigma0': seed.sigma, 'k0': seed.k0, 't_end': trajectory.times[-1],
        'final': trajectory.diagnostics[-1],
    })
    return EXIT_OK


def _growth_window(t_end: float):
    return (10.0, 20.0) if t_end >= 20.0 else (0.5 * t_end, t_end)


def run_expand(config: RunConfig, writer: RunWriter) -> int:
    stride = config.sample_stride
    times = uniform_time_grid(config.t_end, config.dt * stride)
    approx = approximate_solution(config.equation, config.M, config.L, config.delta, times, substeps=stride)
    writer.write_table('iterate-norms', iterate_norm_rows(approx.iterates))

    fits = iterate_growth_rates(approx.iterates, _growth_window(config.t_end))
    writer.write_table('iterate-growth', [[k, fit.slope, (k + 1) * approx.sigma0, fit.r_squared]
                                          for k, fit in sorted(fits.items())])
    writer.write_table('residual', [[float(t), residual_norm(approx, float(t))] for t in times])
    writer.write_report({
        'command': config.command, 'equation': config.equation, 'L': config.L, 'delta': config.delta,
        'M': config.M, 'sigma0': approx.sigma0, 'k0': approx.k0,
        'growth_fits': {str(k): fit.as_dict() for k, fit in sorted(fits.items())},
        'residual_scaling_exponent': config.M + 2,
    })
    return EXIT_OK


def run_instability(config: RunConfig, writer: RunWriter) -> int:
    report = run_experiment(experiment_spec(config, track_remainder=True))
    remainder = report.remainder_series or [None] * len(report.times)
    writer.write_table('escape-series', list(zip(report.times, report.distance_series,
                                                 report.transverse_series, remainder)))
    writer.write_report({'command': config.command, **report.summary()})
    return EXIT_OK


def run_sweep(config: RunConfig, writer: RunWriter) -> int:
    result = scaling_fit(experiment_spec(config, delta=max(config.deltas)), config.deltas)
    writer.write_table('escape-sweep', result.rows())
    writer.write_report({
        'command': config.command, 'equation': config.equation, 'L': config.L,
        'fit': result.fit.as_dict(),
        'expected_slope': result.expected_slope,
        'relative_slope_error': result.relative_slope_error,
        'kappa_calibrated': result.kappa_calibrated,
        'runs': [r.summary() for r in result.reports],
    })
    return EXIT_OK


def run_verify(config: RunConfig, writer: RunWriter) -> int:
    results = run_suite(quick=config.quick)
    writer.write_table('verify', [r.row() for r in results])
    writer.write_report({
        'command': config.command, 'quick': config.quick,
        'passed': sum(r.passed for r in results), 'total': len(results),
        'failures': {r.name: r.detail or r.target for r in results if not r.passed},
    })
    print(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_UNEXPECTED


HANDLERS = {
    'spectrum': run_spectrum,
    'nls-spectrum': run_nls_spectrum,
    'evolve': run_evolve,
    'expand': run_expand,
    'instability': run_instability,
    'sweep': run_sweep,
    'verify': run_verify,
}


def run(config: RunConfig) -> int:
    """Runs one command in its own run directory and returns the exit code."""
    writer = RunWriter(config.output_dir, config.command, config.run_id)
    try:
        writer.write_config(config)
        log.info(f"--- Starting command: {config.command} ---")
        try:
            code = HANDLERS[config.command](config, writer)
        except LabError as e:
            log.critical(f"Command {config.command} failed: {e}", exc_info=True)
            writer.write_error(e)
            return EXIT_LAB_ERROR
        except Exception as e:
            log.critical(f"An unexpected error occurred in {config.command}: {e}", exc_info=True)
            writer.write_error(e)
            return EXIT_UNEXPECTED
        log.info(f"--- Command {config.command} finished (exit {code}) ---")
        return code
    finally:
        remove_file_handlers()


# --- Argument parsing ---

def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='Run file (INI or YAML) with [run], [grid], ... sections.')
    common.add_argument('--equation', choices=EQUATIONS)
    common.add_argument('--L', type=float, help='Transverse period L.')
    common.add_argument('--delta', type=float, help='Seed amplitude delta.')
    common.add_argument('--deltas', help='Comma-separated deltas for a sweep.')
    common.add_argument('--run-id', dest='run_id', help='Run directory prefix (default: timestamp).')
    common.add_argument('--output', help='Root directory for run directories.')
    common.add_argument('--Nx', type=int)
    common.add_argument('--Ny', type=int)
    common.add_argument('--X', type=float, help='x half-period.')
    common.add_argument('--dt', type=float)
    common.add_argument('--scheme', choices=SCHEMES)
    common.add_argument('--t-end', dest='t_end', type=float)
    common.add_argument('--no-dealias', dest='dealias', action='store_const', const=False, default=None)
    common.add_argument('--sample-stride', dest='sample_stride', type=int)
    common.add_argument('--M', type=int, help='Order of the approximate solution.')
    common.add_argument('--kappa', type=float)
    common.add_argument('--eta', type=float, help='Escape threshold (default: derived).')
    common.add_argument('--t-max', dest='t_max', type=float)
    common.add_argument('--log-level', dest='log_level',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
                        help='Set the logging level (default: from config.ini).')
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='transverse-lab',
                                     description="Numerical lab for transverse soliton instability (KP-I, NLS).")
    commands = parser.add_subparsers(dest='command', required=True)
    common = _common_options()
    for name in COMMANDS:
        sub = commands.add_parser(name, parents=[common])
        if name == 'verify':
            sub.add_argument('--quick', action='store_const', const=True, default=None,
                             help='Run the trivial tier only.')
    return parser


def main(argv: Optional[List[str]] = None) -> None:
    """Parses arguments, resolves the configuration and exits with the run's code."""
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_level(args.log_level)

    try:
        config = parse_config(args, file=args.config)
    except LabError as e:
        log.critical(f"Invalid configuration: {e}")
        writer = RunWriter(args.output or settings.OUTPUT_DIR, 'config-error', args.run_id, log_to_file=False)
        writer.write_error(e)
        sys.exit(EXIT_LAB_ERROR)

    set_level(config.log_level)
    log.info("=================================================")
    log.info(f"Transverse instability lab: {config.command} ({config.equation})")
    log.info("=================================================")
    exit_code = run(config)
    if exit_code == EXIT_OK:
        log.info("Run finished successfully")
    else:
        log.error(f"Run finished with errors (exit {exit_code})")
    sys.exit(exit_code)


if __name__ == "__main__":
    main()
