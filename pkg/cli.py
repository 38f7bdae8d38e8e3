"""
Investor-inertia price model - command line.

Runs the pipeline from a price CSV to returns, calibrated fits, simulated
paths and the model comparison report, and exposes the lattice and PDE
solvers for density studies. Every command is deterministic for a given seed.
"""
import functools
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

from calibration import CalibrationConfig, MomentTargets, calibrate_normal, calibrate_retention
from config import (
    APP_VERSION, DEFAULT_OUTPUT_DIR, DEFAULT_SEED, FIXTURE_CONFIG, LATTICE_CONFIG, OUTPUT_DIR_ENV,
    SIMULATION_CONFIG,
)
from data_loader import load_fit_json, load_run_config
from diagnostics import ReportConfig, build_fit_report
from distributions import StudentTSpec, t_proxy_from_moments
from errors import ModelError, NotLeptokurticError, ParseError
from lattice import (
    AsymmetricRule, SymmetricRetentionRule, ThreeStateRule, delta_state, evolve, lattice_moments,
)
from market_data import CsvSchema, load_price_csv, load_returns_csv, log_returns
from pde import (
    AdvectionDiffusionParams, GridConfig, RetentionParams, SpectralConfig, solve_advection_diffusion,
    solve_retention,
)
from simulate import (
    MODEL_GAUSSIAN, MODEL_T_PROXY, paths_for_report, simulate_gaussian, simulate_t_proxy,
    synthetic_price_series,
)
from stats import histogram, sample_moments
from writers import (
    write_grid, write_histogram, write_json, write_lattice_state, write_moment_table, write_overlay,
    write_path_summary, write_paths, write_price_series, write_qq, write_report, write_return_series,
)

logger = logging.getLogger(__name__)


def reports_errors(func):
    """Turns project errors into a message on stderr and the matching exit code."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ModelError as e:
            logger.debug("Command failed", exc_info=True)
            click.echo(f"Error: {e}", err=True)
            sys.exit(e.exit_code)
    return wrapper


def seed_option(func):
    return click.option('--seed', type=int, default=DEFAULT_SEED, show_default=True,
                        help='Random seed')(func)


def timestamp_option(func):
    return click.option('--no-timestamp', is_flag=True, default=False,
                        help='Leave the timestamp out of JSON outputs')(func)


def output_dir_option(func):
    return click.option('--output-dir', type=click.Path(file_okay=False), envvar=OUTPUT_DIR_ENV,
                        default=DEFAULT_OUTPUT_DIR, show_default=True,
                        help=f'Output directory (or ${OUTPUT_DIR_ENV})')(func)


def _output_path(output: str | None, output_dir: str, default_name: str) -> Path:
    return Path(output) if output else Path(output_dir) / default_name


def _meta(seed: int, no_timestamp: bool) -> dict:
    meta = {'version': APP_VERSION, 'seed': seed}
    if not no_timestamp:
        meta['timestamp'] = datetime.now(timezone.utc).isoformat(timespec='seconds')
    return meta


def _print_table(title: str, rows: list[tuple]) -> None:
    table = Table(title=title)
    table.add_column('Quantity')
    table.add_column('Value', justify='right')
    for name, value in rows:
        table.add_row(name, value if isinstance(value, str) else f'{value:.6g}')
    Console().print(table)


@click.group()
@click.version_option(APP_VERSION)
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None,
              help='JSON file with per-command option defaults')
@click.option('--verbose', '-v', is_flag=True, help='Debug logging')
@click.pass_context
def cli(ctx, config_path, verbose):
    """Two-stage asset price model: Gaussian diffusion and diffusion with retention."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )
    try:
        ctx.default_map = load_run_config(config_path)
    except ModelError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(e.exit_code)


@cli.command()
@click.argument('input_csv', type=click.Path(dir_okay=False))
@click.option('--output', '-o', type=click.Path(dir_okay=False), default=None,
              help='Returns CSV (default <output-dir>/returns.csv)')
@output_dir_option
@click.option('--date-column', default=CsvSchema().date_column, show_default=True)
@click.option('--price-column', default=CsvSchema().price_column, show_default=True)
@reports_errors
def returns(input_csv, output, output_dir, date_column, price_column):
    """Compute daily log-returns from a price CSV."""
    prices, dropped = load_price_csv(input_csv, CsvSchema(date_column, price_column))
    r = log_returns(prices)
    path = write_return_series(r, _output_path(output, output_dir, 'returns.csv'))
    click.echo(f"Wrote {len(r)} returns to {path} ({dropped} rows dropped)")


@cli.command()
@click.argument('returns_csv', type=click.Path(dir_okay=False))
@click.option('--output', '-o', type=click.Path(dir_okay=False), default=None,
              help='Fit JSON (default <output-dir>/fit.json)')
@output_dir_option
@seed_option
@timestamp_option
@click.option('--n-starts', type=int, default=CalibrationConfig().n_starts, show_default=True)
@click.option('--pin-k2/--full-search', default=CalibrationConfig().pin_k2, show_default=True,
              help='Solve K2 from the variance, or search all three parameters')
@click.option('--n-jobs', type=int, default=SIMULATION_CONFIG['n_jobs'], show_default=True)
@reports_errors
def calibrate(returns_csv, output, output_dir, seed, no_timestamp, n_starts, pin_k2, n_jobs):
    """Fit the Gaussian and retention models to a returns CSV."""
    r = load_returns_csv(returns_csv)
    summary = sample_moments(r)
    normal = calibrate_normal(r)
    excess = summary.require_excess_kurtosis()
    fit = {
        'empirical': summary.to_dict(),
        'normal_fit': {'params': normal.to_dict()},
    }
    try:
        result = calibrate_retention(
            MomentTargets.from_summary(summary, r.dt),
            CalibrationConfig(n_starts=n_starts, seed=seed, pin_k2=pin_k2, n_jobs=n_jobs),
        )
    except NotLeptokurticError as e:
        click.echo(f"Warning: {e} Only the normal model applies.", err=True)
        fit['retention_fit'] = {'applicable': False, 'reason': str(e), 'excess_kurtosis': excess}
    else:
        proxy = t_proxy_from_moments(summary.mean, summary.variance, excess)
        fit['retention_fit'] = {'applicable': True, **result.to_dict(), 'proxy': proxy.to_dict()}
    fit['meta'] = _meta(seed, no_timestamp)

    path = write_json(fit, _output_path(output, output_dir, 'fit.json'))
    rows = [('D', normal.D), ('V', normal.V), ('excess kurtosis', excess)]
    if fit['retention_fit']['applicable']:
        params = fit['retention_fit']['params']
        rows += [('k', params['k']), ('K2', params['K2']), ('K4', params['K4']),
                 ('objective', fit['retention_fit']['objective'])]
    else:
        rows.append(('retention', 'not applicable'))
    _print_table('Calibration', rows)
    click.echo(f"Wrote fit to {path}")


def _model_from_fit(fit: dict, model: str):
    try:
        if model == MODEL_GAUSSIAN:
            return AdvectionDiffusionParams(**fit['normal_fit']['params'])
        retention = fit['retention_fit']
        if not retention.get('applicable'):
            raise NotLeptokurticError(retention.get('excess_kurtosis', 0.0))
        proxy = retention['proxy']
        return StudentTSpec(proxy['df'], proxy['loc'], proxy['scale'])
    except (KeyError, TypeError) as e:
        raise ParseError(f"Fit file is missing field {e}.") from e


@cli.command()
@click.argument('fit_json', type=click.Path(dir_okay=False))
@click.option('--model', type=click.Choice([MODEL_GAUSSIAN, MODEL_T_PROXY]), default=MODEL_GAUSSIAN,
              show_default=True)
@click.option('--n-paths', type=int, default=SIMULATION_CONFIG['n_paths'], show_default=True)
@click.option('--n-steps', type=int, default=SIMULATION_CONFIG['n_steps'], show_default=True)
@click.option('--s0', type=float, default=SIMULATION_CONFIG['s0'], show_default=True)
@click.option('--drift', type=float, default=None, help='t-proxy drift (default: fitted mean)')
@click.option('--output', '-o', type=click.Path(dir_okay=False), default=None,
              help='Paths CSV (default <output-dir>/paths_<model>.csv)')
@output_dir_option
@seed_option
@click.option('--n-jobs', type=int, default=SIMULATION_CONFIG['n_jobs'], show_default=True)
@reports_errors
def simulate(fit_json, model, n_paths, n_steps, s0, drift, output, output_dir, seed, n_jobs):
    """Simulate price paths from a fit JSON."""
    params = _model_from_fit(load_fit_json(fit_json), model)
    if model == MODEL_GAUSSIAN:
        pathset = simulate_gaussian(params, n_steps, n_paths, s0, seed, n_jobs)
    else:
        pathset = simulate_t_proxy(params.df, params.scale, params.loc if drift is None else drift,
                                   n_steps, n_paths, s0, seed, n_jobs)
    path = write_paths(pathset, _output_path(output, output_dir, f'paths_{model}.csv'))
    click.echo(f"Wrote {n_paths} paths to {path}")


@cli.command()
@click.argument('input_csv', type=click.Path(dir_okay=False))
@output_dir_option
@seed_option
@timestamp_option
@click.option('--n-paths', type=int, default=SIMULATION_CONFIG['n_paths'], show_default=True)
@click.option('--bins', default='auto', show_default=True, help="Histogram bins, or 'auto'")
@click.option('--n-jobs', type=int, default=SIMULATION_CONFIG['n_jobs'], show_default=True)
@reports_errors
def report(input_csv, output_dir, seed, no_timestamp, n_paths, bins, n_jobs):
    """Full comparison: fits, overlay and Q-Q tables, and simulated paths."""
    if bins != 'auto':
        if not bins.isdigit() or int(bins) < 1:
            raise ParseError(f"--bins must be a positive integer or 'auto', got {bins!r}.")
        bins = int(bins)
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)

    # 1. Data
    prices, dropped = load_price_csv(input_csv)
    r = log_returns(prices)
    write_return_series(r, out / 'returns.csv')

    # 2. Fits and tables
    config = ReportConfig(
        seed=seed, bins=bins, include_timestamp=not no_timestamp,
        calibration=CalibrationConfig(seed=seed, n_jobs=n_jobs),
    )
    fit_report = build_fit_report(r, config, prices)
    fit_report.meta['dropped_rows'] = dropped
    write_report(fit_report, out / 'report.json')
    write_histogram(histogram(r, bins), out / 'histogram.csv')
    write_overlay(fit_report.overlay, out / 'overlay.csv')
    write_qq(fit_report.qq_normal, out / 'qq_normal.csv')
    if fit_report.qq_t is not None:
        write_qq(fit_report.qq_t, out / 'qq_t.csv')
    write_moment_table(fit_report.moment_table, out / 'moments.csv')

    # 3. Simulated paths next to the normalised real series
    normal = calibrate_normal(r)
    models = {MODEL_GAUSSIAN: normal}
    if fit_report.retention_applicable:
        proxy = fit_report.retention_fit['proxy']
        models[MODEL_T_PROXY] = StudentTSpec(proxy['df'], proxy['loc'], proxy['scale'])
    for name, params in models.items():
        pathset, real = paths_for_report(prices, params, n_paths, seed, n_jobs=n_jobs)
        write_paths(pathset, out / f'paths_{name}.csv')
        write_path_summary(pathset, out / f'path_summary_{name}.csv')
    write_price_series(real, out / 'real_normalized.csv')

    rows = [(f'score {name}', score) for name, score in fit_report.scores.items()]
    rows.append(('excess kurtosis', fit_report.empirical['excess_kurtosis']))
    _print_table('Fit report', rows)
    click.echo(f"Wrote report to {out}")


def _lattice_rule(rule: str, k: float, alpha: float | None, beta: float | None):
    if rule == 'symmetric':
        return SymmetricRetentionRule(k)
    if rule == 'asymmetric':
        return AsymmetricRule(k)
    if alpha is None or beta is None:
        raise ParseError("The three-state rule needs --alpha and --beta.")
    return ThreeStateRule(alpha, k, beta)


@cli.command()
@click.option('--rule', type=click.Choice(['symmetric', 'asymmetric', 'three-state']),
              default='symmetric', show_default=True)
@click.option('--k', type=float, default=0.0, show_default=True,
              help='Retention fraction (asymmetry for the asymmetric rule)')
@click.option('--alpha', type=float, default=None, help='Down-step probability (three-state)')
@click.option('--beta', type=float, default=None, help='Up-step probability (three-state)')
@click.option('--steps', type=int, default=200, show_default=True)
@click.option('--dx', type=float, default=LATTICE_CONFIG['dx'], show_default=True)
@click.option('--output', '-o', type=click.Path(dir_okay=False), default=None,
              help='Density CSV (default <output-dir>/lattice.csv)')
@output_dir_option
@reports_errors
def lattice(rule, k, alpha, beta, steps, dx, output, output_dir):
    """Exact lattice evolution of a delta under a redistribution rule."""
    state = evolve(delta_state(dx), _lattice_rule(rule, k, alpha, beta), steps)
    path = write_lattice_state(state, _output_path(output, output_dir, 'lattice.csv'))
    moments = lattice_moments(state)
    click.echo(f"Wrote {state.masses.size} cells to {path} (variance {moments.variance:.10g})")


@cli.command()
@click.option('--model', type=click.Choice(['advection', 'retention']), default='advection',
              show_default=True)
@click.option('--D', 'drift', type=float, default=0.0, show_default=True)
@click.option('--V', 'diffusion', type=float, default=0.5, show_default=True)
@click.option('--k', type=float, default=0.0, show_default=True)
@click.option('--K2', 'k2', type=float, default=1.0, show_default=True)
@click.option('--K4', 'k4', type=float, default=0.1, show_default=True)
@click.option('--sign', type=click.Choice(['minus', 'plus']), default='minus', show_default=True)
@click.option('--xi-max', type=float, default=None, help='Frequency cutoff (plus variant)')
@click.option('--dx', type=float, default=0.02, show_default=True)
@click.option('--dt', type=float, default=1e-4, show_default=True)
@click.option('--t-end', type=float, default=1.0, show_default=True)
@click.option('--x0', type=float, default=0.0, show_default=True)
@output_dir_option
@reports_errors
def pde(model, drift, diffusion, k, k2, k4, sign, xi_max, dx, dt, t_end, x0, output_dir):
    """Solve the advection-diffusion or retention equation from a delta."""
    grid_config = GridConfig(dx=dx, dt=dt, t_end=t_end, x0=x0)
    if model == 'advection':
        grid = solve_advection_diffusion(AdvectionDiffusionParams(drift, diffusion), grid_config)
    else:
        spectral = SpectralConfig(xi_max) if xi_max is not None else None
        grid = solve_retention(RetentionParams(k, k2, k4), grid_config, sign, spectral)
    written = write_grid(grid, output_dir, stem=model)
    click.echo(f"Wrote {len(written) - 1} slices to {output_dir}")


@cli.command()
@click.option('--output', '-o', type=click.Path(dir_okay=False), default=None,
              help='Price CSV (default <output-dir>/fixture_prices.csv)')
@output_dir_option
@click.option('--seed', type=int, default=FIXTURE_CONFIG['seed'], show_default=True)
@click.option('--n-days', type=int, default=FIXTURE_CONFIG['n_days'], show_default=True)
@reports_errors
def fixture(output, output_dir, seed, n_days):
    """Write a synthetic t-distributed price series for end-to-end runs."""
    prices = synthetic_price_series(n_days=n_days, seed=seed)
    path = write_price_series(prices, _output_path(output, output_dir, 'fixture_prices.csv'),
                              column=CsvSchema().price_column)
    click.echo(f"Wrote {len(prices)} prices to {path}")


if __name__ == '__main__':
    cli()
