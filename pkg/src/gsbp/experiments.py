"""Convergence experiments: operator accuracy and advection error sweeps.

Both experiments run on the canonical non-conforming mesh family at a
doubling sequence of refinement levels and report max-norm errors with
successive convergence rates, plus a pointwise error field at the finest
level for plotting. All emitted files are deterministic byte-for-byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .advection import (
    AdvectionProblem,
    exact_solution,
    global_coords,
    run_advection,
    write_energy_log,
)
from .assembly import apply_global, build_global_operator
from .mesh import MeshTopology, canonical_mesh_fig1


@dataclass
class ConvergenceRow:
    level: int
    max_error: float
    rate: float | None


@dataclass
class ConvergenceTable:
    title: str
    rows: list[ConvergenceRow] = field(default_factory=list)

    @property
    def average_rate(self) -> float | None:
        rates = [r.rate for r in self.rows if r.rate is not None]
        return float(np.mean(rates)) if rates else None

    @property
    def final_rate(self) -> float | None:
        return self.rows[-1].rate if self.rows and self.rows[-1].rate is not None else None


def _append_row(table: ConvergenceTable, level: int, err: float) -> None:
    rate = None
    if table.rows:
        prev = table.rows[-1]
        rate = float(np.log(prev.max_error / err) / np.log(level / prev.level))
    table.rows.append(ConvergenceRow(level=level, max_error=err, rate=rate))


def gaussian_test_function(x, y):
    return np.exp(-(((3 * x) ** 2 + (3 * y) ** 2)) / 2)


@dataclass
class ErrorField:
    x: np.ndarray
    y: np.ndarray
    value: np.ndarray


def operator_accuracy(
    family: str,
    degree: int,
    levels: list[int],
    map_id: str = "cartesian",
    mesh: MeshTopology | None = None,
) -> tuple[ConvergenceTable, ErrorField]:
    """Max pointwise derivative error |e| = sqrt(|D_x U - U_x|^2 + |D_y U - U_y|^2)
    of the Gaussian test function, per refinement level.

    The study refines one octave deeper than the canonical partition (table
    level n uses mesh level 2n) so that the final table level sits in the
    asymptotic regime of the derivative error."""
    table = ConvergenceTable(title=f"operator accuracy {family} N={degree}")
    error_field = None
    for level in levels:
        topo = mesh if mesh is not None else canonical_mesh_fig1(
            2 * level, degree=degree, family=family, map_id=map_id
        )
        op = build_global_operator(topo)
        x, y = global_coords(op)
        U = gaussian_test_function(x, y)
        ex = apply_global(op, "x", U) - (-9 * x * U)
        ey = apply_global(op, "y", U) - (-9 * y * U)
        e = np.sqrt(ex**2 + ey**2)
        _append_row(table, level, float(np.max(e)))
        error_field = ErrorField(x=x, y=y, value=e)
    return table, error_field


@dataclass
class AdvectionSweep:
    table: ConvergenceTable
    error_field: ErrorField
    final_errors: dict = field(default_factory=dict)   # level -> max error
    energy_results: list = field(default_factory=list)  # per-level AdvectionResult
    max_energy_violation: float = 0.0
    max_interface_contribution: float = 0.0


def advection_convergence(
    family: str,
    degree: int,
    levels: list[int],
    variant: str = "plus",
    map_id: str = "sine",
    mesh: MeshTopology | None = None,
    check_energy_levels: tuple | None = None,
) -> AdvectionSweep:
    """Advection error sweep on the curvilinear mesh family.

    Table level n uses mesh level 2n, the same octave-deep ladder as the
    operator-accuracy study, so the reported rates are past the coarse-mesh
    transient."""
    table = ConvergenceTable(title=f"advection {family} N={degree}")
    sweep = AdvectionSweep(table=table, error_field=None)
    for level in levels:
        topo = mesh if mesh is not None else canonical_mesh_fig1(
            2 * level, degree=degree, family=family, map_id=map_id
        )
        op = build_global_operator(topo)
        problem = AdvectionProblem(op=op, exact=exact_solution(variant), T=0.5)
        check = check_energy_levels is None or level in check_energy_levels
        result = run_advection(problem, check_energy=check)
        _append_row(table, level, result.max_error)
        sweep.final_errors[level] = result.max_error
        sweep.energy_results.append(result)
        sweep.max_energy_violation = max(
            sweep.max_energy_violation, result.max_energy_violation
        )
        sweep.max_interface_contribution = max(
            sweep.max_interface_contribution, result.max_interface_contribution
        )
        x, y = global_coords(op)
        sweep.error_field = ErrorField(x=x, y=y, value=result.error_field)
    return sweep


# ---------------------------------------------------------------------------
# Deterministic file output
# ---------------------------------------------------------------------------


def write_convergence_csv(table: ConvergenceTable, path, average_row: bool = False) -> None:
    lines = ["n,max_error,rate"]
    for r in table.rows:
        rate = "" if r.rate is None else f"{r.rate:.2f}"
        lines.append(f"{r.level},{r.max_error:.6e},{rate}")
    if average_row and table.average_rate is not None:
        lines.append(f"av.,,{table.average_rate:.2f}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_convergence_markdown(table: ConvergenceTable, path, average_row: bool = False) -> None:
    lines = [
        f"### {table.title}",
        "",
        "| n | max error | rate |",
        "| --- | --- | --- |",
    ]
    for r in table.rows:
        rate = "-" if r.rate is None else f"{r.rate:.2f}"
        lines.append(f"| {r.level} | {r.max_error:.4e} | {rate} |")
    if average_row and table.average_rate is not None:
        lines.append(f"| av. | | {table.average_rate:.2f} |")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_error_field_csv(fieldset: ErrorField, path) -> None:
    lines = ["x,y,error"]
    for xv, yv, ev in zip(fieldset.x, fieldset.y, fieldset.value):
        lines.append(f"{xv:.17g},{yv:.17g},{ev:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


__all__ = [
    "AdvectionSweep",
    "ConvergenceRow",
    "ConvergenceTable",
    "ErrorField",
    "advection_convergence",
    "gaussian_test_function",
    "operator_accuracy",
    "write_convergence_csv",
    "write_convergence_markdown",
    "write_energy_log",
    "write_error_field_csv",
]
