#!/usr/bin/env python3
"""
ruij-lab - Main CLI Interface

Evaluate double-sine kernels and wave functions of the hyperbolic
Ruijsenaars system, run the verification suites and export sweep data.

Exit codes: 0 success, 1 usage error, 2 domain error, 3 tolerance error,
4 failed verification.
"""

import sys
import time
from functools import wraps
from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

from config import Config
from src.cli_config import CliConfig, filter_from_text, format_complex, parse_complex, read_config_file
from src.model import ModelParams
from src.services.evaluation_service import SWEEP_AXES, TARGETS, EvalRequest, evaluate, sweep
from src.services.report_service import ReportService
from src.utils.errors import DomainError, ParameterError, StrategyError, ToleranceError
from src.utils.logging import APP_LOGGER, log_exception, setup_logger
from src.verify import CHECK_FAMILIES, run_all

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_TOLERANCE = 3
EXIT_FAILED = 4

console = Console()
logger = setup_logger(APP_LOGGER)


class LabGroup(click.Group):
    """Click group that maps usage errors to exit code 1"""

    def main(self, *args, **kwargs):
        kwargs['standalone_mode'] = False
        try:
            result = super().main(*args, **kwargs)
        except click.exceptions.Abort:
            console.print("[red]Aborted[/red]")
            sys.exit(EXIT_USAGE)
        except click.ClickException as exc:
            exc.show()
            sys.exit(EXIT_USAGE)
        sys.exit(result if isinstance(result, int) else EXIT_OK)


def exit_codes(func):
    """Translate library errors into the documented exit codes"""
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except StrategyError as exc:
            console.print(f"[red]✗ Strategy error:[/red] {exc}")
            sys.exit(EXIT_USAGE)
        except DomainError as exc:
            console.print(f"[red]✗ Domain error:[/red] {exc}")
            sys.exit(EXIT_DOMAIN)
        except ToleranceError as exc:
            log_exception(logger, exc, func.__name__)
            console.print(f"[red]✗ Tolerance error:[/red] {exc}")
            sys.exit(EXIT_TOLERANCE)
    return wrapper


def common_options(func):
    """Parameter, quadrature and output options shared by every command"""
    options = [
        click.option('--config', 'config_file', type=click.Path(exists=True, dir_okay=False),
                     help='key=value configuration file (flags override it)'),
        click.option('--omega1', default=None, help='First period, e.g. 1 or 1+0.2i'),
        click.option('--omega2', default=None, help='Second period'),
        click.option('--g', 'g', default=None, help='Coupling constant'),
        click.option('--rel-tol', 'rel_tol', default=None, help='Relative quadrature tolerance'),
        click.option('--abs-tol', 'abs_tol', default=None, help='Absolute quadrature tolerance'),
        click.option('--strategy', 'multi_dim_strategy', default=None,
                     type=click.Choice(['nested_adaptive', 'tensor_fixed', 'quasi_monte_carlo']),
                     help='Multi-dimensional integration strategy'),
        click.option('--seed', type=int, default=None, help='Random seed'),
        click.option('--output', '-o', 'output_path', default=None, help='Output file or directory'),
        click.option('--format', 'output_format', type=click.Choice(['json', 'csv']), default=None,
                     help='Output format'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def build_config(command: str, config_file, **flags) -> CliConfig:
    """Merge the config file with the given flags; parse problems are usage errors"""
    try:
        file_values = read_config_file(Path(config_file)) if config_file else {}
        return CliConfig.merged(command, file_values, flags)
    except (ParameterError, ValueError) as exc:
        raise click.UsageError(str(exc))


def build_params(config: CliConfig) -> ModelParams:
    try:
        values = [parse_complex(v) for v in (config.omega1, config.omega2, config.g)]
    except ParameterError as exc:
        raise click.UsageError(str(exc))
    return ModelParams.from_values(*values)


def parse_points(values, label: str):
    try:
        return tuple(parse_complex(part) for value in values for part in value.split(',') if part.strip())
    except ParameterError as exc:
        raise click.BadParameter(str(exc), param_hint=f"--{label}")


def point_options(func):
    options = [
        click.option('--z', 'z', default='0', help='Argument of s2'),
        click.option('--x', 'x', multiple=True, help='Coordinates (repeat or comma-separate)'),
        click.option('--lambda', 'lam', multiple=True, help='Spectral values (repeat or comma-separate)'),
        click.option('--n', 'n', type=int, default=1, help='Number of particles for psi'),
        click.option('--eps', 'epsilon', type=float, default=0.5, help='Strip parameter in (0, 1)'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def build_request(target: str, config: CliConfig, z, x, lam, n, epsilon) -> EvalRequest:
    params = build_params(config)
    try:
        spec = config.quadrature_spec()
    except (ParameterError, ValueError) as exc:
        raise click.UsageError(str(exc))
    try:
        z_value = parse_complex(z)
    except ParameterError as exc:
        raise click.BadParameter(str(exc), param_hint='--z')
    return EvalRequest(target, params, spec, z=z_value, x=parse_points(x, 'x'), lam=parse_points(lam, 'lambda'),
                       n=n, epsilon=epsilon)


@click.group(cls=LabGroup)
def cli():
    """ruij-lab - hyperbolic Ruijsenaars wave functions and identity checks"""
    try:
        Config.validate()
    except ValueError as exc:
        raise click.UsageError(str(exc))


@cli.command('eval')
@click.argument('target', type=click.Choice(TARGETS))
@point_options
@common_options
@exit_codes
def eval_command(target, z, x, lam, n, epsilon, config_file, **flags):
    """Evaluate s2, mu, k, khat, psi or psi_dual at a point"""
    config = build_config('eval', config_file, **flags)
    request = build_request(target, config, z, x, lam, n, epsilon)

    started = time.perf_counter()
    value, err = evaluate(request)
    runtime_ms = 1000.0 * (time.perf_counter() - started)

    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Target", style="cyan")
    table.add_column("Value", style="green")
    table.add_column("err_est", style="yellow")
    table.add_column("Runtime", style="white")
    table.add_row(target, format_complex(value, 15), f"{err:.3e}", f"{runtime_ms:.1f} ms")
    console.print(table)

    if config.output_path is not None:
        service = ReportService(config.output_path.parent)
        record = request.to_dict()
        record.update({'value': [value.real, value.imag], 'err_est': err, 'runtime_ms': runtime_ms})
        path = service.write_json(record, config.output_path.name)
        console.print(f"[green]✓[/green] Record saved to {path}")
    return EXIT_OK


@cli.command('verify')
@click.option('--filter', 'check_filter', multiple=True,
              help=f"Check families to run (repeat or comma-separate): {', '.join(CHECK_FAMILIES)}")
@click.option('--threads', type=int, default=None, help='Worker threads (defaults to RUIJ_LAB_THREADS)')
@common_options
@exit_codes
def verify_command(check_filter, threads, config_file, **flags):
    """Run the verification suites and write JSON + CSV reports"""
    flags['check_filter'] = filter_from_text(check_filter)
    config = build_config('verify', config_file, **flags)
    unknown = sorted(set(config.check_filter or ()) - set(CHECK_FAMILIES))
    if unknown:
        raise click.BadParameter(f"unknown check families {unknown}", param_hint='--filter')
    try:
        spec = config.quadrature_spec()
    except (ParameterError, ValueError) as exc:
        raise click.UsageError(str(exc))

    console.print("\n[bold blue]ruij-lab verification[/bold blue]\n")
    summary = run_all(config.check_filter, seed=config.seed, threads=threads, spec=spec)

    output_dir = config.output_path or Config.OUTPUT_DIR
    service = ReportService(output_dir)
    json_path = service.write_reports(summary.reports, f"reports_seed{config.seed}")
    csv_path = service.write_summary(summary.reports, f"summary_seed{config.seed}")

    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Relation", style="cyan")
    table.add_column("Max rel err", style="yellow")
    table.add_column("Status", style="green")
    failed_relations = {r.relation_id for r in summary.reports if not r.passed}
    for relation, worst in sorted(summary.max_errors().items()):
        status = "[red]FAIL[/red]" if relation in failed_relations else "[green]✓[/green]"
        table.add_row(relation, f"{worst:.2e}", status)
    console.print(table)

    counts = summary.counts
    console.print(f"\n{counts['passed']}/{counts['total']} reports passed")
    console.print(f"[green]✓[/green] Reports saved to {json_path} and {csv_path}\n")
    return EXIT_OK if summary.passed else EXIT_FAILED


@cli.command('sweep')
@click.argument('target', type=click.Choice(TARGETS))
@click.option('--axis', type=click.Choice(SWEEP_AXES), default='x', help='Axis to sweep')
@click.option('--start', type=float, required=True, help='First axis value')
@click.option('--stop', type=float, required=True, help='Last axis value')
@click.option('--steps', type=int, default=101, help='Number of points')
@point_options
@common_options
@exit_codes
def sweep_command(target, axis, start, stop, steps, z, x, lam, n, epsilon, config_file, **flags):
    """Evaluate a target along one axis and write plot-ready data"""
    if steps < 1:
        raise click.BadParameter("a sweep needs at least one step", param_hint='--steps')
    config = build_config('sweep', config_file, **flags)
    request = build_request(target, config, z, x, lam, n, epsilon)

    rows = sweep(request, axis, start, stop, steps)
    output = config.output_path or (Config.OUTPUT_DIR / f"sweep_{target}_{axis}.{config.output_format}")
    service = ReportService(output.parent)
    if config.output_format == 'json':
        path = service.write_json({'request': request.to_dict(), 'axis': axis, 'rows': rows}, output.name)
    else:
        path = service.write_records(rows, output.name)

    worst = max(row['err_est'] for row in rows)
    console.print(f"[green]✓[/green] {len(rows)} points, largest err_est {worst:.2e}, saved to {path}")
    return EXIT_OK


@cli.command('report')
@click.argument('reports_file', type=click.Path(exists=True, dir_okay=False))
@common_options
@exit_codes
def report_command(reports_file, config_file, **flags):
    """Summarize a JSON report file (and optionally write the CSV summary)"""
    config = build_config('report', config_file, **flags)
    try:
        reports = ReportService.load_reports(Path(reports_file))
    except (ValueError, KeyError) as exc:
        raise click.UsageError(f"cannot read {reports_file}: {exc}")

    frame = ReportService.summary_frame(reports)
    table = Table(show_header=True, header_style="bold magenta")
    for column in frame.columns:
        table.add_column(str(column), style="cyan" if column == 'relation_id' else "white")
    for row in frame.itertuples(index=False):
        table.add_row(*(f"{v:.2e}" if isinstance(v, float) else str(v) for v in row))
    console.print(table)

    if config.output_path is not None:
        path = ReportService(config.output_path.parent).write_summary(reports, config.output_path.name)
        console.print(f"[green]✓[/green] Summary saved to {path}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


if __name__ == '__main__':
    cli()
