"""Static figures over experiment-harness result files.

The package reads the harness output formats (csv or json, six columns:
epsilon, method, dp_tau, theoretical_alpha, empirical_q95, mape_percent)
and renders four figure kinds. It never imports the harness itself; the
result file is the whole interface.
"""

from .figures import KINDS, PlotSpec, figure_for, render
from .results_io import EXPECTED_COLUMNS, ResultRow, SchemaMismatch, load_rows

__all__ = [
    "EXPECTED_COLUMNS",
    "KINDS",
    "PlotSpec",
    "ResultRow",
    "SchemaMismatch",
    "figure_for",
    "load_rows",
    "render",
]
