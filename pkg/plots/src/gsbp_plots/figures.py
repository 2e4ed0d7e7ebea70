"""Render gsbp CSV artifacts as figures.

Two figure types are supported: pointwise error fields (scatter heat maps
with an independent color scale per input file, so differently scaled
families remain readable side by side) and log-log convergence plots with
per-series slope annotations. Only the documented CSV contracts of the
gsbp CLI are consumed; no numerical logic is duplicated here.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class CsvFormatError(ValueError):
    """Raised when an input CSV does not match the documented contract."""


def read_error_field(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read an error-field CSV with columns x, y, error."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file")
        if header != ["x", "y", "error"]:
            missing = [c for c in ("x", "y", "error") if c not in header]
            raise CsvFormatError(
                f"{path}: expected columns x,y,error"
                + (f" (missing: {', '.join(missing)})" if missing else "")
            )
        rows = []
        for i, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise CsvFormatError(f"{path}:{i}: expected 3 fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise CsvFormatError(f"{path}:{i}: {exc}")
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    data = np.array(rows)
    if not np.all(np.isfinite(data)):
        raise CsvFormatError(f"{path}: non-finite values")
    return data[:, 0], data[:, 1], data[:, 2]


def read_convergence_table(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a convergence CSV (columns n, max_error, rate); summary rows
    such as 'av.' are skipped."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file")
        if header[:2] != ["n", "max_error"]:
            raise CsvFormatError(f"{path}: expected columns n,max_error,rate")
        levels, errors = [], []
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                levels.append(int(row[0]))
            except ValueError:
                continue  # summary row ("av.")
            try:
                errors.append(float(row[1]))
            except (IndexError, ValueError) as exc:
                raise CsvFormatError(f"{path}:{i}: {exc}")
    if not levels:
        raise CsvFormatError(f"{path}: no data rows")
    return np.array(levels), np.array(errors)


def plot_error_field(csv_path, out_path) -> Path:
    """Scatter heat map of one pointwise error field.

    The color scale spans [0, max] of this file alone, so each figure gets
    its own color bar range.
    """
    x, y, e = read_error_field(csv_path)
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    vmax = float(np.max(e))
    sc = ax.scatter(x, y, c=e, s=6, cmap="viridis", vmin=0.0, vmax=max(vmax, 1e-300))
    fig.colorbar(sc, ax=ax, label="pointwise error")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal")
    ax.set_title(Path(csv_path).stem)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)


def plot_convergence(csv_paths, out_path) -> Path:
    """Overlay log-log convergence curves with slope annotations."""
    paths = list(csv_paths)
    if not paths:
        raise CsvFormatError("no input tables given")
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for path in paths:
        levels, errors = read_convergence_table(path)
        label = Path(path).stem
        if levels.size > 1:
            slope = np.polyfit(np.log(levels), np.log(errors), 1)[0]
            label += f" (slope {-slope:.2f})"
        ax.loglog(levels, errors, "o-", label=label)
    ax.set_xlabel("refinement level n")
    ax.set_ylabel("max error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)
