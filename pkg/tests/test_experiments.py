import numpy as np
import pytest

from gsbp.experiments import (
    ConvergenceRow,
    ConvergenceTable,
    advection_convergence,
    gaussian_test_function,
    operator_accuracy,
    write_convergence_csv,
    write_convergence_markdown,
    write_error_field_csv,
)


def test_gaussian_test_function_peak():
    assert gaussian_test_function(0.0, 0.0) == 1.0
    assert gaussian_test_function(1.0, 0.0) == pytest.approx(np.exp(-4.5))


def test_table_rate_bookkeeping():
    table = ConvergenceTable(title="t")
    table.rows = [
        ConvergenceRow(1, 1.0, None),
        ConvergenceRow(2, 0.25, 2.0),
        ConvergenceRow(4, 0.0625, 2.0),
    ]
    assert table.average_rate == pytest.approx(2.0)
    assert table.final_rate == pytest.approx(2.0)


def test_operator_accuracy_legendre_rate():
    table, field = operator_accuracy("legendre", 3, [1, 2, 4])
    errs = [r.max_error for r in table.rows]
    assert errs[0] > errs[1] > errs[2]
    # Legendre N=3 converges at third order; the coarse levels undershoot a
    # little, so only require clear second-order behaviour plus monotonicity.
    assert table.final_rate > 2.0
    assert field.x.shape == field.value.shape
    assert np.all(field.value >= 0)


def test_operator_accuracy_nonuniform_levels_use_log_ratio():
    table, _ = operator_accuracy("legendre", 2, [1, 4])
    # Rate is normalized by log(4/1), so it is per refinement doubling.
    assert 1.0 < table.rows[1].rate < 4.0


def test_advection_convergence_records_stability():
    sweep = advection_convergence("legendre", 2, [1, 2])
    assert sweep.table.rows[1].max_error < sweep.table.rows[0].max_error
    assert sweep.max_energy_violation <= 1e-10
    assert sweep.max_interface_contribution <= 1e-10
    assert set(sweep.final_errors) == {1, 2}
    assert sweep.error_field.value.shape == sweep.error_field.x.shape


def test_csv_and_markdown_writers(tmp_path):
    table = ConvergenceTable(title="demo")
    table.rows = [ConvergenceRow(1, 0.5, None), ConvergenceRow(2, 0.125, 2.0)]
    csv_path = tmp_path / "t.csv"
    write_convergence_csv(table, csv_path, average_row=True)
    lines = csv_path.read_text().splitlines()
    assert lines == ["n,max_error,rate", "1,5.000000e-01,", "2,1.250000e-01,2.00",
                     "av.,,2.00"]
    md_path = tmp_path / "t.md"
    write_convergence_markdown(table, md_path)
    text = md_path.read_text()
    assert "| 2 | 1.2500e-01 | 2.00 |" in text


def test_error_field_csv_round_trip(tmp_path):
    from gsbp.experiments import ErrorField

    field = ErrorField(x=np.array([0.0, 1.0]), y=np.array([2.0, 3.0]),
                       value=np.array([0.5, 0.25]))
    path = tmp_path / "f.csv"
    write_error_field_csv(field, path)
    data = np.genfromtxt(path, delimiter=",", names=True)
    np.testing.assert_allclose(data["error"], [0.5, 0.25])
    np.testing.assert_allclose(data["x"], [0.0, 1.0])
