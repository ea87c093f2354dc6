"""Readers for harness result files.

Both formats carry the same six fields per row. Blank csv cells and json
nulls both mean "this cell is not defined here" (infeasible targets,
MAPE of a zero truth) and load as None.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

EXPECTED_COLUMNS = (
    "epsilon",
    "method",
    "dp_tau",
    "theoretical_alpha",
    "empirical_q95",
    "mape_percent",
)
_OPTIONAL = ("dp_tau", "theoretical_alpha", "empirical_q95", "mape_percent")


class SchemaMismatch(ValueError):
    """The input does not match the harness result schema; ``column``
    names the first offending column."""

    def __init__(self, column: str, detail: str):
        super().__init__(f"column {column!r}: {detail}")
        self.column = column


@dataclass(frozen=True)
class ResultRow:
    epsilon: float
    method: str
    dp_tau: float | None
    theoretical_alpha: float | None
    empirical_q95: float | None
    mape_percent: float | None


def _number(column: str, raw, where: str, required: bool) -> float | None:
    if raw is None or raw == "":
        if required:
            raise SchemaMismatch(column, f"{where}: value is required")
        return None
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise SchemaMismatch(column, f"{where}: {raw!r} is not a number") from None


def _check_header(actual: list[str] | None) -> None:
    if actual is None:
        raise SchemaMismatch("epsilon", "file has no header row")
    for col in EXPECTED_COLUMNS:
        if col not in actual:
            raise SchemaMismatch(col, "missing from the header")
    for col in actual:
        if col not in EXPECTED_COLUMNS:
            raise SchemaMismatch(col, "not part of the result schema")
    # exact order, same as the harness writes
    if list(actual) != list(EXPECTED_COLUMNS):
        raise SchemaMismatch(actual[0], "columns out of order")


def _load_csv(path: Path) -> list[ResultRow]:
    rows: list[ResultRow] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header)
        for num, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(EXPECTED_COLUMNS):
                raise SchemaMismatch(
                    EXPECTED_COLUMNS[min(len(record), len(EXPECTED_COLUMNS)) - 1],
                    f"row {num} has {len(record)} cells, expected {len(EXPECTED_COLUMNS)}",
                )
            cell = dict(zip(EXPECTED_COLUMNS, record))
            where = f"row {num}"
            if cell["method"] == "":
                raise SchemaMismatch("method", f"{where}: value is required")
            rows.append(
                ResultRow(
                    epsilon=_number("epsilon", cell["epsilon"], where, required=True),
                    method=cell["method"],
                    dp_tau=_number("dp_tau", cell["dp_tau"], where, required=False),
                    theoretical_alpha=_number(
                        "theoretical_alpha", cell["theoretical_alpha"], where, required=False
                    ),
                    empirical_q95=_number(
                        "empirical_q95", cell["empirical_q95"], where, required=False
                    ),
                    mape_percent=_number(
                        "mape_percent", cell["mape_percent"], where, required=False
                    ),
                )
            )
    if not rows:
        raise SchemaMismatch("epsilon", "file has no data rows")
    return rows


def _load_json(path: Path) -> list[ResultRow]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, list) or not doc:
        raise SchemaMismatch("epsilon", "expected a non-empty array of row objects")
    rows: list[ResultRow] = []
    for num, item in enumerate(doc):
        where = f"row {num}"
        if not isinstance(item, dict):
            raise SchemaMismatch("epsilon", f"{where} is not an object")
        for col in EXPECTED_COLUMNS:
            if col not in item:
                raise SchemaMismatch(col, f"missing in {where}")
        for col in item:
            if col not in EXPECTED_COLUMNS:
                raise SchemaMismatch(col, "not part of the result schema")
        method = item["method"]
        if not isinstance(method, str) or not method:
            raise SchemaMismatch("method", f"{where}: expected a method name")
        rows.append(
            ResultRow(
                epsilon=_number("epsilon", item["epsilon"], where, required=True),
                method=method,
                dp_tau=_number("dp_tau", item["dp_tau"], where, required=False),
                theoretical_alpha=_number(
                    "theoretical_alpha", item["theoretical_alpha"], where, required=False
                ),
                empirical_q95=_number(
                    "empirical_q95", item["empirical_q95"], where, required=False
                ),
                mape_percent=_number(
                    "mape_percent", item["mape_percent"], where, required=False
                ),
            )
        )
    return rows


def load_rows(path) -> list[ResultRow]:
    """Read a harness result file, json or csv by extension."""
    p = Path(path)
    if p.suffix.lower() == ".json":
        return _load_json(p)
    return _load_csv(p)
