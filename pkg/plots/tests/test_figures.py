import subprocess
import sys

import numpy as np
import pytest
from click.testing import CliRunner

from gsbp_plots import (
    CsvFormatError,
    plot_convergence,
    plot_error_field,
    read_convergence_table,
    read_error_field,
)
from gsbp_plots.cli import convergence_cmd, error_field_cmd


def write_field_csv(path, x, y, e):
    lines = ["x,y,error"] + [f"{a},{b},{c}" for a, b, c in zip(x, y, e)]
    path.write_text("\n".join(lines) + "\n")


def test_read_error_field_round_trip(tmp_path):
    p = tmp_path / "f.csv"
    write_field_csv(p, [0.0, 1.0], [0.5, 0.25], [1e-3, 2e-3])
    x, y, e = read_error_field(p)
    np.testing.assert_allclose(e, [1e-3, 2e-3])


def test_zero_field_renders_uniform_image(tmp_path):
    p = tmp_path / "zeros.csv"
    g = np.linspace(-1, 1, 5)
    X, Y = np.meshgrid(g, g)
    write_field_csv(p, X.ravel(), Y.ravel(), np.zeros(X.size))
    out = plot_error_field(p, tmp_path / "zeros.png")
    assert out.exists() and out.stat().st_size > 0


def test_missing_column_diagnostic(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,y,value\n0,0,1\n")
    with pytest.raises(CsvFormatError, match="missing: error"):
        read_error_field(p)


def test_malformed_csv_nonzero_exit(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,y,error\n0,0,not-a-number\n")
    result = CliRunner().invoke(error_field_cmd, [str(p), str(tmp_path / "o.png")])
    assert result.exit_code != 0
    assert "error:" in result.output


def test_non_finite_rejected(tmp_path):
    p = tmp_path / "nan.csv"
    p.write_text("x,y,error\n0,0,nan\n")
    with pytest.raises(CsvFormatError, match="non-finite"):
        read_error_field(p)


def write_table_csv(path, rows, av=None):
    lines = ["n,max_error,rate"] + rows
    if av is not None:
        lines.append(f"av.,,{av}")
    path.write_text("\n".join(lines) + "\n")


def test_convergence_single_table_with_slope(tmp_path):
    p = tmp_path / "t.csv"
    write_table_csv(p, ["1,1.0e-01,", "2,2.5e-02,2.00", "4,6.25e-03,2.00"])
    out = plot_convergence([p], tmp_path / "conv.png")
    assert out.exists() and out.stat().st_size > 0


def test_convergence_overlay_and_av_row_skipped(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_table_csv(a, ["1,1.0e-01,", "2,2.5e-02,2.00"], av="2.00")
    write_table_csv(b, ["1,2.0e-01,", "2,1.0e-01,1.00"])
    levels, errors = read_convergence_table(a)
    assert levels.tolist() == [1, 2]
    out = plot_convergence([a, b], tmp_path / "conv.png")
    assert out.exists()


def test_convergence_empty_input_errors(tmp_path):
    with pytest.raises(CsvFormatError, match="no input"):
        plot_convergence([], tmp_path / "conv.png")
    result = CliRunner().invoke(convergence_cmd, ["--out", str(tmp_path / "o.png")])
    assert result.exit_code != 0


@pytest.fixture(scope="module")
def cli_fields(tmp_path_factory):
    """Real error-field CSVs produced by the gsbp CLI (level 2, N = 4)."""
    out = tmp_path_factory.mktemp("fields")
    for family in ("legendre", "lobatto"):
        subprocess.run(
            [sys.executable, "-m", "gsbp.cli", "operator-accuracy",
             "--family", family, "--degree", "4", "--levels", "2",
             "--out-dir", str(out)],
            check=True, capture_output=True,
        )
    return out


def interface_concentration(x, y, e, spacing=0.0625, band=0.005):
    """Mean error within `band` of an element interface line over the mean
    error elsewhere."""
    dx = np.abs(x / spacing - np.round(x / spacing)) * spacing
    dy = np.abs(y / spacing - np.round(y / spacing)) * spacing
    near = np.minimum(dx, dy) < band
    return float(np.mean(e[near]) / np.mean(e[~near]))


def test_lobatto_error_is_interface_concentrated(cli_fields, tmp_path):
    ratios = {}
    for family in ("legendre", "lobatto"):
        csv = cli_fields / f"error_field_operator_{family}_N4.csv"
        x, y, e = read_error_field(csv)
        ratios[family] = interface_concentration(x, y, e)
        out = plot_error_field(csv, tmp_path / f"{family}.png")
        assert out.exists() and out.stat().st_size > 0
    assert ratios["lobatto"] > 3.0
    assert ratios["legendre"] < 2.0


def test_color_scales_are_independent(cli_fields, tmp_path):
    # The two family fields differ by orders of magnitude; each figure must
    # carry its own scale, i.e. the rendered images cannot be identical.
    imgs = []
    for family in ("legendre", "lobatto"):
        csv = cli_fields / f"error_field_operator_{family}_N4.csv"
        out = plot_error_field(csv, tmp_path / f"{family}_scale.png")
        imgs.append(out.read_bytes())
    assert imgs[0] != imgs[1]
