import numpy as np
import pytest
from click.testing import CliRunner

from gsbp.cli import main
from gsbp.mesh import save_mesh, two_element_mesh


@pytest.fixture
def runner():
    return CliRunner()


def test_operator_accuracy_writes_artifacts(runner, tmp_path):
    result = runner.invoke(
        main,
        ["operator-accuracy", "--family", "legendre", "--degree", "2",
         "--levels", "1,2", "--out-dir", str(tmp_path)],
    )
    assert result.exit_code == 0, result.output
    csv = (tmp_path / "operator_accuracy_legendre_N2.csv").read_text()
    lines = csv.splitlines()
    assert lines[0] == "n,max_error,rate"
    assert len(lines) == 3
    md = (tmp_path / "operator_accuracy_legendre_N2.md").read_text()
    assert "| n | max error | rate |" in md
    field = (tmp_path / "error_field_operator_legendre_N2.csv").read_text()
    assert field.splitlines()[0] == "x,y,error"


def test_operator_accuracy_is_deterministic(runner, tmp_path):
    args = ["operator-accuracy", "--degree", "2", "--levels", "1,2"]
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    for out in (out_a, out_b):
        result = runner.invoke(main, args + ["--out-dir", str(out)])
        assert result.exit_code == 0, result.output
    for name in ("operator_accuracy_legendre_N2.csv",
                 "error_field_operator_legendre_N2.csv"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_advection_command(runner, tmp_path):
    result = runner.invoke(
        main,
        ["advection", "--degree", "2", "--levels", "1",
         "--exact-variant", "minus", "--out-dir", str(tmp_path)],
    )
    assert result.exit_code == 0, result.output
    csv = (tmp_path / "advection_legendre_N2.csv").read_text().splitlines()
    assert csv[0] == "n,max_error,rate"
    assert csv[-1].startswith("av.,,") or csv[-1].startswith("1,")
    energy = (tmp_path / "advection_legendre_N2_energy.csv").read_text()
    assert energy.splitlines()[0] == "step,t,energy,max_error"
    assert "max energy violation" in result.output


def test_audit_builtin_meshes_pass(runner):
    result = runner.invoke(main, ["audit", "--degree", "2"])
    assert result.exit_code == 0, result.output
    assert "audit passed" in result.output
    assert "FAIL" not in result.output


def test_audit_saved_mesh_and_report(runner, tmp_path):
    mesh_file = tmp_path / "pair.mesh"
    save_mesh(two_element_mesh(conforming=False, degree=3), mesh_file)
    result = runner.invoke(
        main, ["audit", "--mesh", str(mesh_file), "--out-dir", str(tmp_path)]
    )
    assert result.exit_code == 0, result.output
    report = (tmp_path / "audit_pair.txt").read_text()
    assert "gsbp operator audit" in report


def test_bad_levels_rejected(runner, tmp_path):
    result = runner.invoke(
        main, ["operator-accuracy", "--levels", "1,two", "--out-dir", str(tmp_path)]
    )
    assert result.exit_code != 0
    assert "levels" in result.output


def test_mesh_option_runs_single_table_row(runner, tmp_path):
    mesh_file = tmp_path / "pair.mesh"
    save_mesh(two_element_mesh(conforming=True, degree=2, family="lobatto"),
              mesh_file)
    result = runner.invoke(
        main,
        ["operator-accuracy", "--family", "lobatto", "--degree", "2",
         "--mesh", str(mesh_file), "--out-dir", str(tmp_path)],
    )
    assert result.exit_code == 0, result.output
    lines = (tmp_path / "operator_accuracy_lobatto_N2.csv").read_text().splitlines()
    assert len(lines) == 2  # header plus one row, no rate entry
    assert lines[1].endswith(",")
