#!/usr/bin/env python3

"""hyperfrac: tabulate, check and solve the fractional Laplacian on H^n."""

from __future__ import annotations

import functools
import logging
from pathlib import Path
import sys
import time
from typing import Optional

import click
import humanize
import numpy as np

from src.cli import checks as suites
from src.cli.config import FORMATS, RunConfig, build_config
from src.cli.output import render_csv, render_json, sidecar_path, write_text
from src.core.errors import DomainError, HyperfracError, ParameterError
from src.core.kernels import ProblemParams, green, singular_kernel
from src.core.settings import configure_logging
from src.core.solver import SPACINGS, check_exponent, picard_solve, radial_green_matrix
from src.core.diagnostics import decay_check
from src.core.spectral import plancherel_density, spherical_table


_LOGGER = logging.getLogger(__name__)

EXIT_NONCONVERGED = 3
EXIT_CHECK_FAILED = 1
TABLE_KINDS = ("green", "kernel", "spherical", "density")


def shared_options(command):
    """Options common to every subcommand; unset values fall back to the settings file."""

    options = [
        click.option("--n", "n", type=int, default=None, help="Dimension of H^n (>= 2)."),
        click.option("--s", "s", type=float, default=None, help="Fractional order in (0, 1)."),
        click.option("--p", "p", type=float, default=None, help="Nonlinearity exponent (> 1)."),
        click.option("--rho-min", type=float, default=None, help="First positive grid radius."),
        click.option("--rho-max", type=float, default=None, help="Last grid radius."),
        click.option("--nodes", type=int, default=None, help="Number of grid nodes."),
        click.option(
            "--spacing", type=click.Choice(SPACINGS), default=None, help="Radial grid spacing."
        ),
        click.option("--lambda-max", type=float, default=None, help="Spectral truncation."),
        click.option("--lambda-panels", type=int, default=None, help="Spectral quadrature panels."),
        click.option("--tol", type=float, default=None, help="Solver tolerance."),
        click.option(
            "--format", "fmt", type=click.Choice(FORMATS), default="csv", show_default=True,
            help="Output format.",
        ),
        click.option(
            "--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
            help="Output file (stdout when omitted).",
        ),
        click.option("--debug", is_flag=True, default=False, help="Enable debug logging."),
        click.option(
            "--settings", "settings_path", type=click.Path(dir_okay=False, path_type=Path),
            default=None, help="JSON file merged over settings.default.json.",
        ),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def run_guarded(func):
    """Map library errors onto the exit-code contract (usage errors exit with 2)."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (ParameterError, DomainError) as exc:
            raise click.UsageError(str(exc)) from exc
        except HyperfracError as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _config(subcommand: str, options: dict) -> RunConfig:
    settings_path = options.pop("settings_path", None)
    config = build_config(subcommand, options, settings_path)
    configure_logging(config.debug)
    return config


def _summary(what: str, count: int, started: float) -> None:
    elapsed = time.monotonic() - started
    click.echo(
        f"{what}: {humanize.intcomma(count)} rows in "
        f"{humanize.precisedelta(elapsed, minimum_unit='seconds')}",
        err=True,
    )


@click.group()
def main() -> None:
    """Fractional Laplacian on hyperbolic space H^n."""


@main.command()
@click.argument("kind", type=click.Choice(TABLE_KINDS))
@click.option("--lambda", "lam", type=float, default=1.0, show_default=True,
              help="Spectral parameter for KIND=spherical.")
@shared_options
@run_guarded
def tabulate(kind: str, lam: float, **options) -> None:
    """Tabulate G_s, K_(n,s), a spherical function or the Plancherel density."""

    started = time.monotonic()
    config = _config("tabulate", options)
    params = ProblemParams(config.n, config.s)
    if kind == "density":
        if config.nodes < 2:
            raise click.UsageError("The density table needs at least two nodes")
        axis = np.linspace(0.0, config.lambda_max, config.nodes)
        values = np.asarray(plancherel_density(config.n, axis))
        header = ("lambda", "value")
    else:
        axis = config.grid()
        if kind == "green":
            axis = axis[1:]
            values = np.asarray(green(params, axis))
        elif kind == "kernel":
            axis = axis[1:]
            values = np.asarray(singular_kernel(params, axis))
        else:
            values = spherical_table(config.n, [lam], axis)[0]
        header = ("rho", "value")

    rows = list(zip(axis.tolist(), values.tolist()))
    if config.fmt == "csv":
        text = render_csv(header, rows)
    else:
        text = render_json({
            "kind": kind, "n": config.n, "s": config.s,
            "columns": list(header), "rows": rows,
        })
    write_text(text, config.out)
    _summary(f"Tabulated {kind}", len(rows), started)


@main.command()
@click.argument("suite", type=click.Choice(tuple(suites.SUITES)))
@click.option("--lambda-exp", type=float, default=1.0, show_default=True,
              help="HLS kernel exponent in (0, n).")
@shared_options
@run_guarded
def check(suite: str, lambda_exp: float, **options) -> None:
    """Run a verification suite and write a claim-by-claim report."""

    started = time.monotonic()
    config = _config("check", options)
    if suite == "hls":
        if not 0.0 < lambda_exp < config.n:
            raise click.UsageError(f"--lambda-exp must lie in (0, {config.n}), got {lambda_exp:g}")
        claims = suites.hls(config, lambda_exp)
    else:
        claims = suites.SUITES[suite](config)

    passed = all(c.passed for c in claims)
    for c in claims:
        _LOGGER.info("%s %s: measured %.6g (tolerance %.3g)", "PASS" if c.passed else "FAIL",
                     c.claim, c.measured, c.tolerance)
    if config.fmt == "json":
        text = render_json({
            "suite": suite, "config": config.as_dict(), "passed": passed,
            "claims": [c.as_dict() for c in claims],
        })
    else:
        text = render_csv(
            ("claim", "measured", "tolerance", "passed"),
            [(c.claim, c.measured, c.tolerance, c.passed) for c in claims],
        )
    write_text(text, config.out)
    _summary(f"Checked {suite}", len(claims), started)
    if not passed:
        sys.exit(EXIT_CHECK_FAILED)


@main.command()
@click.option("--allow-critical", is_flag=True, default=False,
              help="Run at p = (n+2s)/(n-2s), where convergence is not guaranteed.")
@click.option("--max-iter", type=int, default=None, help="Iteration cap.")
@shared_options
@run_guarded
def solve(allow_critical: bool, max_iter: Optional[int], **options) -> None:
    """Solve u = int G_s u^p dV for a positive radial profile."""

    started = time.monotonic()
    config = _config("solve", {**options, "allow_critical": allow_critical, "max_iter": max_iter})
    params = config.params
    check_exponent(params, config.allow_critical)
    grid = config.grid()
    matrix = radial_green_matrix(params, grid, workers=config.workers)
    report = picard_solve(
        params, grid, config.tol, config.max_iter,
        allow_critical=config.allow_critical, damping=config.damping, matrix=matrix,
    )
    decay = decay_check(report.profile, params)
    summary = {**report.as_dict(), "decay": decay.as_dict(), "config": config.as_dict()}
    rows = list(zip(grid.tolist(), report.profile.values.tolist()))

    if config.fmt == "json":
        write_text(render_json({"report": summary, "rho": grid, "u": report.profile.values}), config.out)
    else:
        write_text(render_csv(("rho", "u"), rows), config.out)
        if config.out is not None:
            write_text(render_json(summary), sidecar_path(config.out))
        else:
            click.echo(render_json(summary), err=True, nl=False)
    _summary("Solved", len(rows), started)
    if not report.converged:
        click.echo(
            f"Not converged after {report.iterations} iterations "
            f"(residual {report.residual:.3e}, change {report.change:.3e})",
            err=True,
        )
        sys.exit(EXIT_NONCONVERGED)


if __name__ == "__main__":
    main()
