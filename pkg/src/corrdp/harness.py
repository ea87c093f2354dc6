"""Experiment runner: sweep a leakage grid, run calibrated mechanisms for
many trials, and emit empirical error tables.

Determinism contract: every trial's noise comes from a stream keyed by
(master_seed, trial index), and the SAME per-trial uniform is reused for
every (epsilon, method) cell. Identical configurations therefore produce
byte-identical output files, methods can be compared trial-by-trial
without Monte Carlo noise in the comparison, and row order never depends
on scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass
from importlib import resources

import numpy as np
import yaml

from . import data as datasets
from .accuracy import laplace_alpha, rr_alpha_for_beta
from .bounds import gaussian_h
from .markov import gamma as chain_gamma
from .markov import sample_chain
from .mechanisms import (
    QueryKind,
    QuerySpec,
    evaluate_query,
    flip_binary,
    laplace_noise_from_uniform,
    rr_bdp_flip_probability,
    rr_debias_count,
)
from .models import (
    CorrelationModel,
    GaussianCorrelationModel,
    Interval,
    LimitedGroupModel,
    MarkovChainModel,
)
from .seeding import derive_key, generator

__all__ = [
    "MECHANISM_METHODS",
    "ExperimentConfig",
    "ExperimentResultRow",
    "default_epsilon_grid",
    "run_experiment",
    "emit_results",
    "read_results_csv",
    "read_results_json",
    "results_schema",
    "config_from_file",
]

MECHANISM_METHODS = ("dp_laplace", "bdp_general", "bdp_gaussian", "bdp_markov", "sota_gaussian")
RR_METHODS = ("rr_bdp", "bdp_markov")

CSV_HEADER = "epsilon,method,dp_tau,theoretical_alpha,empirical_q95,mape_percent"

_NAMED_TRANSITIONS = {
    "activity": datasets.ACTIVITY_TRANSITION,
    "electricity_70": datasets.ELECTRICITY70_TRANSITION,
    "electricity_80": datasets.ELECTRICITY80_TRANSITION,
    "electricity_90": datasets.ELECTRICITY90_TRANSITION,
}


def _resolve_transition(spec):
    """Accept a registry name or an inline row-list transition matrix."""
    if isinstance(spec, str):
        try:
            return _NAMED_TRANSITIONS[spec]
        except KeyError:
            raise ValueError(
                f"unknown transition {spec!r}; known names: {sorted(_NAMED_TRANSITIONS)}"
            ) from None
    return spec


def default_epsilon_grid(points: int = 40, low: float = 0.1, high: float = 20.0) -> tuple[float, ...]:
    """Log-spaced leakage grid covering the experimental range."""
    return tuple(float(e) for e in np.geomspace(low, high, points))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs, already materialized.

    ``kind`` is "mechanism" (Laplace mechanisms under the various bounds)
    or "rr_comparison" (per-record randomized response against the
    chain-calibrated Laplace count on the same binary series;
    ``change_prob`` is that chain's state-change probability).
    """

    data: np.ndarray
    query: QuerySpec
    model: CorrelationModel | None
    epsilon_grid: tuple[float, ...]
    methods: tuple[str, ...]
    trials: int = 1000
    beta: float = 0.05
    master_seed: int = 0
    kind: str = "mechanism"
    change_prob: float | None = None

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "epsilon_grid", tuple(float(e) for e in self.epsilon_grid))
        object.__setattr__(self, "methods", tuple(self.methods))
        grid = self.epsilon_grid
        if not grid:
            raise ValueError("epsilon grid is empty")
        if any(not 0 < e <= 20 for e in grid):
            raise ValueError("epsilon grid entries must lie in (0, 20]")
        if list(grid) != sorted(grid):
            raise ValueError("epsilon grid must be sorted ascending")
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.kind not in ("mechanism", "rr_comparison"):
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if not self.methods:
            raise ValueError("no methods selected")
        allowed = MECHANISM_METHODS if self.kind == "mechanism" else RR_METHODS
        for m in self.methods:
            if m not in allowed:
                raise ValueError(f"method {m!r} not valid for kind {self.kind!r}")
            if (
                self.kind == "mechanism"
                and m in ("bdp_general", "bdp_gaussian", "sota_gaussian", "bdp_markov")
                and self.model is None
            ):
                # The comparison kind reads its gamma off change_prob instead.
                raise ValueError(f"method {m!r} needs a correlation model")
        if self.kind == "rr_comparison":
            if self.change_prob is None or not 0 < self.change_prob < 0.5:
                raise ValueError("rr_comparison needs change_prob in (0, 0.5)")
        for m in self.methods:
            if m in ("bdp_gaussian", "sota_gaussian") and not isinstance(
                self.model, GaussianCorrelationModel
            ):
                raise ValueError(f"method {m!r} needs a Gaussian model")
            if m == "bdp_markov" and self.kind == "mechanism" and not isinstance(
                self.model, MarkovChainModel
            ):
                raise ValueError("method 'bdp_markov' needs a chain model")


@dataclass(frozen=True)
class ExperimentResultRow:
    """One (epsilon, method) cell. None fields mean the target was
    infeasible for that method (or MAPE undefined for a zero truth). For
    the flip mechanism, dp_tau carries its flip probability — the noise
    parameter playing the role the Laplace methods give to tau."""

    epsilon: float
    method: str
    dp_tau: float | None
    theoretical_alpha: float | None
    empirical_q95: float | None
    mape_percent: float | None


def _group_bound_m(model: CorrelationModel) -> int:
    if isinstance(model, (LimitedGroupModel, GaussianCorrelationModel)):
        return model.m
    if isinstance(model, MarkovChainModel):
        # A chain correlates every record with every other, so the group
        # bound degrades to the full length.
        return model.chain_length
    raise TypeError(f"no group bound for {type(model).__name__}")


def _method_tau(method: str, epsilon: float, config: ExperimentConfig) -> float | None:
    """Sensitivity-normalized DP parameter for one method at one target,
    or None when infeasible."""
    model = config.model
    if method == "dp_laplace":
        return epsilon
    if method == "bdp_general":
        return epsilon / _group_bound_m(model)
    if method == "sota_gaussian":
        return epsilon / model.m
    if method == "bdp_gaussian":
        return epsilon / gaussian_h(model.m, model.rho)
    if method == "bdp_markov":
        if config.kind == "rr_comparison":
            r = config.change_prob
            offset = 4.0 * math.log((1.0 - r) / r)
        else:
            offset = 4.0 * math.log(chain_gamma(model).gamma)
        tau = epsilon - offset
        return tau if tau > 0 else None
    raise ValueError(f"unknown method {method!r}")


def _quantile_95(errors: np.ndarray, trials: int) -> float:
    order = math.ceil(0.95 * trials) - 1
    return float(np.sort(errors)[order])


def run_experiment(config: ExperimentConfig) -> list[ExperimentResultRow]:
    """Run the full (epsilon, method) grid and return rows in grid-major,
    then config-method, order."""
    if config.kind == "rr_comparison":
        return _run_rr_comparison(config)

    truth = evaluate_query(config.query, config.data)
    sensitivity = config.query.sensitivity
    T = config.trials
    uniforms = np.array([generator(config.master_seed, t).random() for t in range(T)])
    if truth == 0.0:
        warnings.warn("true query value is 0; MAPE is undefined and omitted", stacklevel=2)

    rows: list[ExperimentResultRow] = []
    for epsilon in config.epsilon_grid:
        for method in config.methods:
            tau = _method_tau(method, epsilon, config)
            if tau is None:
                rows.append(
                    ExperimentResultRow(epsilon, method, None, None, None, None)
                )
                continue
            scale = sensitivity / tau
            errors = np.abs(laplace_noise_from_uniform(uniforms, scale))
            rows.append(
                ExperimentResultRow(
                    epsilon=epsilon,
                    method=method,
                    dp_tau=tau,
                    theoretical_alpha=laplace_alpha(config.beta, sensitivity, tau),
                    empirical_q95=_quantile_95(errors, T),
                    mape_percent=(
                        float(np.mean(errors / abs(truth)) * 100.0) if truth != 0.0 else None
                    ),
                )
            )
    return rows


def _run_rr_comparison(config: ExperimentConfig) -> list[ExperimentResultRow]:
    states = np.asarray(config.data, dtype=np.int64)
    n = states.size
    n1 = int(states.sum())
    truth = float(n1)
    r = float(config.change_prob)
    T = config.trials
    uniforms = np.array([generator(config.master_seed, t).random() for t in range(T)])
    if truth == 0.0:
        warnings.warn("series has no ones; MAPE is undefined and omitted", stacklevel=2)

    rows: list[ExperimentResultRow] = []
    for epsilon in config.epsilon_grid:
        for method in config.methods:
            if method == "rr_bdp":
                q = rr_bdp_flip_probability(epsilon, r)
                estimates = np.array(
                    [
                        rr_debias_count(
                            flip_binary(states, q, derive_key(config.master_seed, t)), q
                        )
                        for t in range(T)
                    ]
                )
                errors = np.abs(estimates - truth)
                rows.append(
                    ExperimentResultRow(
                        epsilon=epsilon,
                        method=method,
                        dp_tau=q,
                        theoretical_alpha=rr_alpha_for_beta(n, n1, q, config.beta),
                        empirical_q95=_quantile_95(errors, T),
                        mape_percent=(
                            float(np.mean(errors / truth) * 100.0) if truth else None
                        ),
                    )
                )
            else:  # bdp_markov on the same count query
                tau = _method_tau(method, epsilon, config)
                if tau is None:
                    rows.append(ExperimentResultRow(epsilon, method, None, None, None, None))
                    continue
                errors = np.abs(laplace_noise_from_uniform(uniforms, 1.0 / tau))
                rows.append(
                    ExperimentResultRow(
                        epsilon=epsilon,
                        method=method,
                        dp_tau=tau,
                        theoretical_alpha=laplace_alpha(config.beta, 1.0, tau),
                        empirical_q95=_quantile_95(errors, T),
                        mape_percent=(
                            float(np.mean(errors / truth) * 100.0) if truth else None
                        ),
                    )
                )
    return rows


# ---------------------------------------------------------------------------
# Emission and parsing
# ---------------------------------------------------------------------------

def _format_cell(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def emit_results(rows, format: str = "csv", path=None) -> str:
    """Serialize rows (csv with the fixed header, or json matching the
    shipped schema). Returns the text; also writes it when a path is
    given. Rows must be non-empty."""
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to emit")
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for r in rows:
            writer.writerow(
                [
                    repr(float(r.epsilon)),
                    r.method,
                    _format_cell(r.dp_tau),
                    _format_cell(r.theoretical_alpha),
                    _format_cell(r.empirical_q95),
                    _format_cell(r.mape_percent),
                ]
            )
        text = buf.getvalue()
    elif format == "json":
        payload = [
            {
                "epsilon": float(r.epsilon),
                "method": r.method,
                "dp_tau": None if r.dp_tau is None else float(r.dp_tau),
                "theoretical_alpha": (
                    None if r.theoretical_alpha is None else float(r.theoretical_alpha)
                ),
                "empirical_q95": None if r.empirical_q95 is None else float(r.empirical_q95),
                "mape_percent": None if r.mape_percent is None else float(r.mape_percent),
            }
            for r in rows
        ]
        text = json.dumps(payload, indent=2) + "\n"
    else:
        raise ValueError(f"unknown format {format!r}; expected 'csv' or 'json'")
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def _parse_cell(text: str) -> float | None:
    return None if text == "" else float(text)


def read_results_csv(path) -> list[ExperimentResultRow]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER.split(","):
            raise ValueError(f"unexpected header {header!r}")
        return [
            ExperimentResultRow(
                epsilon=float(row[0]),
                method=row[1],
                dp_tau=_parse_cell(row[2]),
                theoretical_alpha=_parse_cell(row[3]),
                empirical_q95=_parse_cell(row[4]),
                mape_percent=_parse_cell(row[5]),
            )
            for row in reader
        ]


def read_results_json(path) -> list[ExperimentResultRow]:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return [
        ExperimentResultRow(
            epsilon=obj["epsilon"],
            method=obj["method"],
            dp_tau=obj["dp_tau"],
            theoretical_alpha=obj["theoretical_alpha"],
            empirical_q95=obj["empirical_q95"],
            mape_percent=obj["mape_percent"],
        )
        for obj in payload
    ]


def results_schema() -> dict:
    """The JSON schema the json output format conforms to."""
    text = resources.files("corrdp").joinpath("schemas/results.schema.json").read_text("utf-8")
    return json.loads(text)


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------

def _build_dataset(doc: dict):
    kind = doc.get("kind")
    if kind == "synthetic_iq":
        ds = datasets.generate_synthetic_iq(
            pairs=int(doc["pairs"]),
            mu=float(doc.get("mu", 100.0)),
            variance=float(doc.get("variance", 15.0)),
            rho=float(doc.get("rho", 0.45)),
            seed=int(doc.get("seed", 0)),
        )
        return ds.values, ds.clip
    if kind == "grouped_csv":
        lo, hi = doc["clip"]
        ds = datasets.load_grouped_csv(
            doc["path"],
            value_column=doc.get("value_column", "value"),
            group_column=doc.get("group_column", "group"),
            clip=Interval(float(lo), float(hi)),
        )
        return ds.values, ds.clip
    if kind == "state_csv":
        series = datasets.load_state_series(doc["path"])
        return series.array().astype(float), None
    if kind == "sampled_chain":
        transition = doc["transition"]
        P = _resolve_transition(transition)
        model = MarkovChainModel.from_published(np.asarray(P, dtype=float), int(doc["length"]))
        states = sample_chain(model, int(doc.get("seed", 0)))
        return states.astype(float), None
    raise ValueError(f"unknown dataset kind {kind!r}")


def _build_model(doc: dict | None, data: np.ndarray) -> CorrelationModel | None:
    if doc is None:
        return None
    kind = doc.get("kind")
    if kind == "limited_group":
        m = int(doc["m"])
        return LimitedGroupModel(n=max(int(data.size), m), m=m)
    if kind == "gaussian":
        m = int(doc["m"])
        return GaussianCorrelationModel.equicorrelated(
            size=max(m, 2),
            sigma_sq=float(doc["sigma_sq"]),
            rho=float(doc["rho"]),
            mean=float(doc.get("mean", 0.0)),
            m=m,
        )
    if kind == "markov":
        transition = doc["transition"]
        P = _resolve_transition(transition)
        return MarkovChainModel.from_published(np.asarray(P, dtype=float), int(data.size))
    raise ValueError(f"unknown model kind {kind!r}")


def config_from_file(path) -> ExperimentConfig:
    """Materialize an :class:`ExperimentConfig` from a config document.

    Top-level keys: ``experiment`` (kind, epsilon_grid or grid spec,
    trials, beta, methods, master_seed, change_prob), ``dataset``
    (kind-specific loader/generator parameters), ``query`` ({kind: sum}
    uses the dataset's clip interval), and optional ``model``.
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path} does not contain a mapping")
    exp = doc.get("experiment", {})
    try:
        dataset_doc = doc["dataset"]
        query_doc = doc["query"]
    except KeyError as exc:
        raise ValueError(f"{path} is missing the {exc.args[0]!r} section") from None

    values, clip = _build_dataset(dataset_doc)

    qkind = query_doc.get("kind")
    if qkind == "sum":
        if "clip" in query_doc:
            lo, hi = query_doc["clip"]
            clip = Interval(float(lo), float(hi))
        if clip is None:
            raise ValueError("sum query needs a clip interval (from dataset or query section)")
        query = QuerySpec(kind=QueryKind.SUM, clip=clip)
    elif qkind == "count":
        query = QuerySpec(kind=QueryKind.COUNT)
    else:
        raise ValueError(f"unknown query kind {qkind!r}")

    model = _build_model(doc.get("model"), values)

    if "epsilon_grid" in exp:
        grid = tuple(float(e) for e in exp["epsilon_grid"])
    elif "grid" in exp:
        g = exp["grid"]
        grid = default_epsilon_grid(
            points=int(g.get("points", 40)),
            low=float(g.get("low", 0.1)),
            high=float(g.get("high", 20.0)),
        )
    else:
        grid = default_epsilon_grid()

    kind = exp.get("kind", "mechanism")
    methods = tuple(exp.get("methods", RR_METHODS if kind == "rr_comparison" else ("dp_laplace",)))
    change = exp.get("change_prob")
    return ExperimentConfig(
        data=values,
        query=query,
        model=model,
        epsilon_grid=grid,
        methods=methods,
        trials=int(exp.get("trials", 1000)),
        beta=float(exp.get("beta", 0.05)),
        master_seed=int(exp.get("master_seed", 0)),
        kind=kind,
        change_prob=None if change is None else float(change),
    )
