"""Command-line front end: convergence sweeps and operator audits.

All artifacts (CSV tables, Markdown tables, error fields, energy logs) are
written with fixed formatting so repeated runs with the same arguments
produce byte-identical files.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from .assembly import (
    apply_global,
    boundary_energy_rate,
    build_global_operator,
    dense_q,
    global_energy_rate,
    global_sbp_residual,
    skew_symmetry_residual,
    write_audit_report,
)
from .experiments import (
    advection_convergence,
    operator_accuracy,
    write_convergence_csv,
    write_convergence_markdown,
    write_energy_log,
    write_error_field_csv,
)
from .mesh import (
    FAMILIES,
    MAP_IDS,
    canonical_mesh_fig1,
    load_mesh,
    single_element_mesh,
    two_element_mesh,
)

DEFAULT_LEVELS = "1,2,4,8,16"
# The advection sweep is far more expensive per level (RK4 time stepping on
# the octave-deep mesh ladder), so its default ladder stops one level earlier.
DEFAULT_ADVECTION_LEVELS = "1,2,4,8"


def _parse_levels(text: str) -> list[int]:
    try:
        levels = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise click.BadParameter(f"levels must be comma-separated integers: {exc}")
    if not levels or any(n < 1 for n in levels):
        raise click.BadParameter("levels must be positive integers")
    return levels


def _echo_table(table) -> None:
    click.echo(table.title)
    click.echo(f"{'n':>6} {'max error':>14} {'rate':>6}")
    for r in table.rows:
        rate = "-" if r.rate is None else f"{r.rate:.2f}"
        click.echo(f"{r.level:>6} {r.max_error:>14.4e} {rate:>6}")


def _common_options(fn, levels_default=DEFAULT_LEVELS):
    fn = click.option(
        "--family", type=click.Choice(sorted(FAMILIES)), default="legendre",
        show_default=True, help="Quadrature family of every element.",
    )(fn)
    fn = click.option(
        "--degree", type=click.IntRange(min=1), default=4, show_default=True,
        help="Polynomial degree N.",
    )(fn)
    fn = click.option(
        "--levels", default=levels_default, show_default=True,
        help="Comma-separated refinement levels.",
    )(fn)
    fn = click.option(
        "--mesh", "mesh_path", type=click.Path(exists=True, dir_okay=False),
        default=None, help="Run on a saved mesh file instead of the built-in family.",
    )(fn)
    fn = click.option(
        "--out-dir", type=click.Path(file_okay=False), default=".",
        show_default=True, help="Directory for CSV/Markdown artifacts.",
    )(fn)
    fn = click.option(
        "--threads", type=click.IntRange(min=1), default=1, show_default=True,
        help="Accepted for interface stability; execution is single-threaded.",
    )(fn)
    return fn


def _advection_options(fn):
    return _common_options(fn, levels_default=DEFAULT_ADVECTION_LEVELS)


@click.group()
@click.version_option(package_name="gsbp")
def main() -> None:
    """Generalized summation-by-parts operators on non-conforming meshes."""


@main.command("operator-accuracy")
@_common_options
@click.option(
    "--map", "map_id", type=click.Choice(MAP_IDS), default="cartesian",
    show_default=True, help="Coordinate mapping of the built-in mesh family.",
)
def operator_accuracy_cmd(family, degree, levels, mesh_path, out_dir, threads, map_id):
    """Derivative accuracy of the assembled operator on a Gaussian."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if mesh_path is not None:
        topo = load_mesh(mesh_path)
        table, field = operator_accuracy(family, degree, [1], mesh=topo)
    else:
        table, field = operator_accuracy(
            family, degree, _parse_levels(levels), map_id=map_id
        )
    stem = f"operator_accuracy_{family}_N{degree}"
    write_convergence_csv(table, out / f"{stem}.csv")
    write_convergence_markdown(table, out / f"{stem}.md")
    write_error_field_csv(field, out / f"error_field_operator_{family}_N{degree}.csv")
    _echo_table(table)


@main.command("advection")
@_advection_options
@click.option(
    "--map", "map_id", type=click.Choice(MAP_IDS), default="sine",
    show_default=True, help="Coordinate mapping of the built-in mesh family.",
)
@click.option(
    "--exact-variant", type=click.Choice(["plus", "minus"]), default="plus",
    show_default=True, help="Sign of the y-term in the exact solution.",
)
def advection_cmd(family, degree, levels, mesh_path, out_dir, threads, map_id,
                  exact_variant):
    """Linear advection convergence with RK4 time stepping."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if mesh_path is not None:
        sweep = advection_convergence(
            family, degree, [1], variant=exact_variant, mesh=load_mesh(mesh_path)
        )
    else:
        sweep = advection_convergence(
            family, degree, _parse_levels(levels), variant=exact_variant,
            map_id=map_id,
        )
    stem = f"advection_{family}_N{degree}"
    write_convergence_csv(sweep.table, out / f"{stem}.csv", average_row=True)
    write_convergence_markdown(sweep.table, out / f"{stem}.md", average_row=True)
    write_error_field_csv(
        sweep.error_field, out / f"error_field_advection_{family}_N{degree}.csv"
    )
    write_energy_log(sweep.energy_results[0], out / f"{stem}_energy.csv")
    _echo_table(sweep.table)
    if sweep.table.average_rate is not None:
        click.echo(f"   av. {'':>14} {sweep.table.average_rate:>6.2f}")
    click.echo(f"max energy violation      {sweep.max_energy_violation:.3e}")
    click.echo(f"max interface contribution {sweep.max_interface_contribution:.3e}")
    if sweep.max_energy_violation > 1e-10 or sweep.max_interface_contribution > 1e-10:
        click.echo("stability check FAILED", err=True)
        sys.exit(1)


_AUDIT_TOLS = {
    "skew_symmetry": 1e-12,
    "global_sbp": 1e-11,
    "matrix_free_vs_dense": 1e-12,
    "energy_identity": 1e-10,
    "free_stream": 1e-11,
}


def _audit_one(name, topo, out_dir):
    op = build_global_operator(topo)
    rng = np.random.default_rng(0)
    U = rng.standard_normal(op.n_total)
    ones = np.ones(op.n_total)
    failed = False
    # Exact free-stream preservation is only guaranteed when the face
    # quadrature rescaling is trivial, i.e. on Cartesian meshes.
    cartesian = all(e.map_id == "cartesian" for e in topo.elements)
    click.echo(f"mesh: {name} ({topo.num_elements} elements, {op.n_total} nodes)")
    for d in ("x", "y"):
        dense = dense_q(op, d) @ U / op.P_global
        checks = {
            "skew_symmetry": skew_symmetry_residual(op, d),
            "global_sbp": global_sbp_residual(op, d),
            "matrix_free_vs_dense": float(
                np.max(np.abs(dense - apply_global(op, d, U)))
            ),
            "energy_identity": abs(
                global_energy_rate(op, U, d) - boundary_energy_rate(op, U, d)
            ),
        }
        if cartesian:
            checks["free_stream"] = float(np.max(np.abs(apply_global(op, d, ones))))
        for key, value in checks.items():
            ok = value <= _AUDIT_TOLS[key]
            failed = failed or not ok
            status = "ok" if ok else "FAIL"
            click.echo(f"  {key}_{d:<2} {value:.3e}  {status}")
    if out_dir is not None:
        write_audit_report(op, Path(out_dir) / f"audit_{name}.txt")
    return failed


@main.command("audit")
@click.option(
    "--mesh", "mesh_path", type=click.Path(exists=True, dir_okay=False),
    default=None, help="Audit a saved mesh file instead of the built-in set.",
)
@click.option(
    "--out-dir", type=click.Path(file_okay=False), default=None,
    help="Optionally write per-mesh audit reports here.",
)
@click.option("--degree", type=click.IntRange(min=1), default=4, show_default=True)
@click.option(
    "--family", type=click.Choice(sorted(FAMILIES)), default="legendre",
    show_default=True,
)
def audit_cmd(mesh_path, out_dir, degree, family):
    """Verify the algebraic operator identities and report residuals."""
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    if mesh_path is not None:
        meshes = [(Path(mesh_path).stem, load_mesh(mesh_path))]
    else:
        meshes = [
            ("single", single_element_mesh(degree=degree, family=family)),
            ("conforming_pair", two_element_mesh(degree=degree, family=family)),
            ("fig1_level1", canonical_mesh_fig1(1, degree=degree, family=family)),
            ("fig1_level1_sine", canonical_mesh_fig1(1, degree=degree, family=family,
                                                     map_id="sine")),
        ]
    failed = False
    for name, topo in meshes:
        failed = _audit_one(name, topo, out_dir) or failed
    if failed:
        click.echo("audit FAILED", err=True)
        sys.exit(1)
    click.echo("audit passed")


if __name__ == "__main__":
    main()
