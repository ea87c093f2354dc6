"""The four figure kinds over harness result rows.

Figures are built on explicit Figure objects (no pyplot state), so
rendering is safe in headless and test processes alike. Rows with None
in the plotted field become gaps, which is how infeasible targets show
up in a sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from matplotlib.figure import Figure

from .results_io import ResultRow, load_rows

KINDS = ("bound_comparison", "error_curves", "mape_bars", "rr_comparison")

# log y-axis is the default for error curves only; everything else is linear
_LOG_DEFAULT = {kind: kind == "error_curves" for kind in KINDS}

_METHOD_COLOR = {
    "dp_laplace": "tab:gray",
    "bdp_general": "tab:blue",
    "sota_gaussian": "tab:purple",
    "bdp_gaussian": "tab:green",
    "bdp_markov": "tab:red",
    "rr_bdp": "tab:orange",
}
_FALLBACK_COLORS = ("tab:brown", "tab:pink", "tab:olive", "tab:cyan")


@dataclass(frozen=True)
class PlotSpec:
    """One figure: which file to read, what to draw, where to write it.

    ``log_scale=None`` picks the kind's default (log y for error curves,
    linear otherwise)."""

    input: Path
    kind: str
    output: Path
    log_scale: bool | None = None

    def __post_init__(self):
        object.__setattr__(self, "input", Path(self.input))
        object.__setattr__(self, "output", Path(self.output))
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; pick one of {KINDS}")
        if not self.input.is_file():
            raise FileNotFoundError(f"input file {self.input} does not exist")


def _methods_in_order(rows: list[ResultRow]) -> list[str]:
    seen: list[str] = []
    for row in rows:
        if row.method not in seen:
            seen.append(row.method)
    return seen


def _color(method: str, position: int) -> str:
    return _METHOD_COLOR.get(method, _FALLBACK_COLORS[position % len(_FALLBACK_COLORS)])


def _series(rows: list[ResultRow], method: str, column: str):
    """x values and y values (None -> nan) for one method, in row order."""
    xs, ys = [], []
    for row in rows:
        if row.method != method:
            continue
        value = getattr(row, column)
        xs.append(row.epsilon)
        ys.append(math.nan if value is None else value)
    return xs, ys


def _new_axes(log_scale: bool):
    fig = Figure(figsize=(6.4, 4.2))
    ax = fig.subplots()
    if log_scale:
        ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.25)
    return fig, ax


def _error_curves(rows: list[ResultRow], log_scale: bool) -> Figure:
    fig, ax = _new_axes(log_scale)
    for pos, method in enumerate(_methods_in_order(rows)):
        xs, ys = _series(rows, method, "empirical_q95")
        ax.plot(xs, ys, marker="o", markersize=3.5, label=method, color=_color(method, pos))
    ax.set_xlabel("target leakage epsilon")
    ax.set_ylabel("empirical 95th-percentile error")
    ax.legend()
    fig.tight_layout()
    return fig


def _mape_bars(rows: list[ResultRow], log_scale: bool) -> Figure:
    fig, ax = _new_axes(log_scale)
    methods = _methods_in_order(rows)
    epsilons = sorted({row.epsilon for row in rows})
    slot = {e: g for g, e in enumerate(epsilons)}
    width = 0.8 / max(len(methods), 1)
    for pos, method in enumerate(methods):
        offset = (pos - (len(methods) - 1) / 2) * width
        centers, heights = [], []
        for row in rows:
            if row.method != method or row.mape_percent is None:
                continue  # infeasible or undefined cells simply have no bar
            centers.append(slot[row.epsilon] + offset)
            heights.append(row.mape_percent)
        ax.bar(centers, heights, width=width, label=method, color=_color(method, pos))
    ax.set_xticks(range(len(epsilons)))
    ax.set_xticklabels([f"{e:g}" for e in epsilons])
    ax.set_xlabel("target leakage epsilon")
    ax.set_ylabel("MAPE (percent)")
    ax.legend()
    fig.tight_layout()
    return fig


def _rr_comparison(rows: list[ResultRow], log_scale: bool) -> Figure:
    fig, ax = _new_axes(log_scale)
    for pos, method in enumerate(_methods_in_order(rows)):
        color = _color(method, pos)
        xs, ys = _series(rows, method, "theoretical_alpha")
        ax.plot(xs, ys, marker="o", markersize=3.5, label=method, color=color)
        xs, ys = _series(rows, method, "empirical_q95")
        if any(not math.isnan(y) for y in ys):
            ax.plot(
                xs, ys, linestyle="none", marker="x", color=color,
                label=f"{method} (empirical)",
            )
    ax.set_xlabel("target leakage epsilon")
    ax.set_ylabel("error at the configured confidence")
    ax.legend()
    fig.tight_layout()
    return fig


def _crossover(xs_a, ys_a, ys_b) -> float | None:
    """x where curve a catches curve b, linearly interpolated; None if the
    difference never changes sign."""
    previous = None
    for i, x in enumerate(xs_a):
        if math.isnan(ys_a[i]) or math.isnan(ys_b[i]):
            previous = None
            continue
        d = ys_a[i] - ys_b[i]
        if previous is not None:
            x0, d0 = previous
            if d0 == 0:
                return x0
            if (d0 < 0) != (d < 0):
                return x0 + (x - x0) * d0 / (d0 - d)
        previous = (x, d)
    return None


def _bound_comparison(rows: list[ResultRow], log_scale: bool) -> Figure:
    # For bound sweeps the harness's epsilon column carries the swept
    # correlation value, and theoretical_alpha the bound at unit DP
    # parameter; the row shape is unchanged, only the reading differs.
    fig, ax = _new_axes(log_scale)
    methods = _methods_in_order(rows)
    series = {}
    for pos, method in enumerate(methods):
        xs, ys = _series(rows, method, "theoretical_alpha")
        order = sorted(range(len(xs)), key=xs.__getitem__)
        xs = [xs[i] for i in order]
        ys = [ys[i] for i in order]
        series[method] = (xs, ys)
        ax.plot(xs, ys, label=method, color=_color(method, pos))
    if len(methods) == 2:
        (xs_a, ys_a), (_, ys_b) = series[methods[0]], series[methods[1]]
        cross = _crossover(xs_a, ys_a, ys_b)
        if cross is not None:
            ax.axvline(cross, color="black", linestyle="--", alpha=0.6, label="crossover")
    ax.set_xlabel("correlation sweep value")
    ax.set_ylabel("leakage bound at unit DP parameter")
    ax.legend()
    fig.tight_layout()
    return fig


_BUILDERS = {
    "bound_comparison": _bound_comparison,
    "error_curves": _error_curves,
    "mape_bars": _mape_bars,
    "rr_comparison": _rr_comparison,
}


def figure_for(kind: str, rows: list[ResultRow], log_scale: bool | None = None) -> Figure:
    """Build the figure without touching the filesystem."""
    if kind not in KINDS:
        raise ValueError(f"unknown figure kind {kind!r}; pick one of {KINDS}")
    if log_scale is None:
        log_scale = _LOG_DEFAULT[kind]
    return _BUILDERS[kind](rows, log_scale)


def render(spec: PlotSpec) -> Path:
    """Read the result file and write one image; format follows the
    output extension. Returns the output path."""
    rows = load_rows(spec.input)
    fig = figure_for(spec.kind, rows, spec.log_scale)
    fig.savefig(spec.output)
    return spec.output
