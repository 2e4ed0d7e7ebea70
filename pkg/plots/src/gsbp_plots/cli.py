"""Command-line wrappers for the figure generators."""

from __future__ import annotations

import sys

import click

from .figures import CsvFormatError, plot_convergence, plot_error_field


@click.command("gsbp-plot-error-field")
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_path", type=click.Path(dir_okay=False))
def error_field_cmd(csv_path, out_path):
    """Render an error-field CSV (columns x,y,error) as a heat-map image."""
    try:
        plot_error_field(csv_path, out_path)
    except CsvFormatError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(out_path)


@click.command("gsbp-plot-convergence")
@click.argument("csv_paths", nargs=-1, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def convergence_cmd(csv_paths, out_path):
    """Overlay one or more convergence tables in a log-log plot."""
    try:
        plot_convergence(csv_paths, out_path)
    except CsvFormatError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(out_path)
