"""Figure generation from gsbp CSV artifacts."""

from .figures import (
    CsvFormatError,
    plot_convergence,
    plot_error_field,
    read_convergence_table,
    read_error_field,
)

__all__ = [
    "CsvFormatError",
    "plot_convergence",
    "plot_error_field",
    "read_convergence_table",
    "read_error_field",
]
