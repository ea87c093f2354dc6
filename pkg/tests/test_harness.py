"""Experiment runner: grid sweeps, common-random-number trials, emission
formats, and config-file materialization."""

import json
import math

import jsonschema
import numpy as np
import pytest

from corrdp import GaussianCorrelationModel, MarkovChainModel, generate_synthetic_iq
from corrdp.data import ACTIVITY_TRANSITION
from corrdp.harness import (
    CSV_HEADER,
    ExperimentConfig,
    ExperimentResultRow,
    MECHANISM_METHODS,
    config_from_file,
    default_epsilon_grid,
    emit_results,
    read_results_csv,
    read_results_json,
    results_schema,
    run_experiment,
)
from corrdp.mechanisms import QueryKind, QuerySpec, laplace_noise_from_uniform
from corrdp.models import Interval
from corrdp.seeding import generator

IQ_SENSITIVITY = 120.0  # clip interval [40, 160]


def _iq_config(**overrides):
    ds = generate_synthetic_iq(pairs=50, seed=11)
    base = dict(
        data=ds.values,
        query=QuerySpec(kind=QueryKind.SUM, clip=Interval(40.0, 160.0)),
        model=GaussianCorrelationModel.equicorrelated(2, sigma_sq=15.0, rho=0.45),
        epsilon_grid=(0.5, 1.0, 2.0),
        methods=("dp_laplace", "bdp_general", "bdp_gaussian"),
        trials=200,
        beta=0.05,
        master_seed=7,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_default_epsilon_grid():
    grid = default_epsilon_grid()
    assert len(grid) == 40
    assert grid[0] == pytest.approx(0.1)
    assert grid[-1] == pytest.approx(20.0)
    assert list(grid) == sorted(grid)
    assert default_epsilon_grid(points=5, low=1.0, high=16.0) == pytest.approx(
        tuple(np.geomspace(1.0, 16.0, 5))
    )


def test_config_validation():
    with pytest.raises(ValueError, match="grid is empty"):
        _iq_config(epsilon_grid=())
    with pytest.raises(ValueError, match=r"\(0, 20\]"):
        _iq_config(epsilon_grid=(0.5, 25.0))
    with pytest.raises(ValueError, match="sorted"):
        _iq_config(epsilon_grid=(2.0, 1.0))
    with pytest.raises(ValueError, match="trials"):
        _iq_config(trials=0)
    with pytest.raises(ValueError, match="beta"):
        _iq_config(beta=1.0)
    with pytest.raises(ValueError, match="unknown experiment kind"):
        _iq_config(kind="ablation")
    with pytest.raises(ValueError, match="no methods"):
        _iq_config(methods=())
    with pytest.raises(ValueError, match="not valid for kind"):
        _iq_config(methods=("rr_bdp",))
    with pytest.raises(ValueError, match="needs a correlation model"):
        _iq_config(model=None, methods=("bdp_general",))
    with pytest.raises(ValueError, match="needs a Gaussian model"):
        _iq_config(
            model=MarkovChainModel.from_published(np.asarray(ACTIVITY_TRANSITION), 10),
            methods=("bdp_gaussian",),
        )
    with pytest.raises(ValueError, match="needs a chain model"):
        _iq_config(methods=("bdp_markov",))
    with pytest.raises(ValueError, match="change_prob"):
        _iq_config(kind="rr_comparison", methods=("rr_bdp",))


def test_mechanism_sweep_rows_and_ordering():
    config = _iq_config()
    rows = run_experiment(config)
    assert [(r.epsilon, r.method) for r in rows] == [
        (e, m) for e in config.epsilon_grid for m in config.methods
    ]
    by_cell = {(r.epsilon, r.method): r for r in rows}
    h = 1.45  # Gaussian inflation at m=2, rho=0.45
    for eps in config.epsilon_grid:
        lap = by_cell[(eps, "dp_laplace")]
        gen = by_cell[(eps, "bdp_general")]
        gau = by_cell[(eps, "bdp_gaussian")]
        assert lap.dp_tau == eps
        assert gen.dp_tau == pytest.approx(eps / 2)
        assert gau.dp_tau == pytest.approx(eps / h)
        for row in (lap, gen, gau):
            assert row.theoretical_alpha == pytest.approx(
                math.log(20) * IQ_SENSITIVITY / row.dp_tau
            )
            assert row.mape_percent > 0
        # shared trial uniforms make the comparison exact, not statistical
        assert gen.empirical_q95 == 2 * lap.empirical_q95
        assert gau.empirical_q95 == pytest.approx(h * lap.empirical_q95, rel=1e-12)
        assert lap.empirical_q95 < gau.empirical_q95 < gen.empirical_q95


def test_mechanism_quantile_is_the_order_statistic():
    config = _iq_config(epsilon_grid=(1.0,), methods=("dp_laplace",))
    (row,) = run_experiment(config)
    uniforms = np.array([generator(7, t).random() for t in range(200)])
    errors = np.sort(np.abs(laplace_noise_from_uniform(uniforms, IQ_SENSITIVITY / 1.0)))
    assert row.empirical_q95 == errors[math.ceil(0.95 * 200) - 1]


def test_chain_method_reports_infeasible_rows():
    states = np.array([0, 1, 1, 0, 1, 0, 0, 1, 1, 0], dtype=float)
    model = MarkovChainModel.from_published(np.asarray(ACTIVITY_TRANSITION), 10)
    config = ExperimentConfig(
        data=states,
        query=QuerySpec(kind=QueryKind.COUNT),
        model=model,
        epsilon_grid=(5.0, 10.0),
        methods=("dp_laplace", "bdp_markov"),
        trials=50,
        master_seed=3,
    )
    rows = {(r.epsilon, r.method): r for r in run_experiment(config)}
    floor = 4.0 * math.log(0.882 / 0.117)  # row renormalization cancels
    assert floor > 5.0
    infeasible = rows[(5.0, "bdp_markov")]
    assert infeasible.dp_tau is None
    assert infeasible.theoretical_alpha is None
    assert infeasible.empirical_q95 is None
    assert infeasible.mape_percent is None
    feasible = rows[(10.0, "bdp_markov")]
    assert feasible.dp_tau == pytest.approx(10.0 - floor)
    assert rows[(5.0, "dp_laplace")].dp_tau == 5.0


def test_rr_comparison_rows():
    states = np.array([0, 1, 1, 0, 1, 0, 0, 1, 1, 0, 1, 1], dtype=float)
    config = ExperimentConfig(
        data=states,
        query=QuerySpec(kind=QueryKind.COUNT),
        model=None,
        epsilon_grid=(5.0, 8.0),
        methods=("rr_bdp", "bdp_markov"),
        trials=100,
        master_seed=5,
        kind="rr_comparison",
        change_prob=0.2,
    )
    rows = {(r.epsilon, r.method): r for r in run_experiment(config)}
    from corrdp import rr_bdp_flip_probability
    from corrdp.accuracy import rr_alpha_for_beta

    q = rr_bdp_flip_probability(8.0, 0.2)
    rr = rows[(8.0, "rr_bdp")]
    assert rr.dp_tau == pytest.approx(q)
    assert rr.theoretical_alpha == pytest.approx(rr_alpha_for_beta(12, 7, q, 0.05))
    assert rr.empirical_q95 >= 0
    assert rr.mape_percent > 0

    offset = 4.0 * math.log(0.8 / 0.2)
    assert rows[(5.0, "bdp_markov")].dp_tau is None  # 5 < 4 ln 4
    assert rows[(8.0, "bdp_markov")].dp_tau == pytest.approx(8.0 - offset)


def test_zero_truth_warns_and_omits_mape():
    config = ExperimentConfig(
        data=np.zeros(5),
        query=QuerySpec(kind=QueryKind.COUNT),
        model=None,
        epsilon_grid=(1.0,),
        methods=("dp_laplace",),
        trials=20,
        master_seed=1,
    )
    with pytest.warns(UserWarning, match="true query value is 0"):
        (row,) = run_experiment(config)
    assert row.mape_percent is None
    assert row.empirical_q95 > 0


def test_runs_are_deterministic():
    config = _iq_config()
    first = run_experiment(config)
    second = run_experiment(config)
    assert first == second
    assert emit_results(first) == emit_results(second)
    reseeded = run_experiment(_iq_config(master_seed=8))
    assert reseeded != first


def test_emit_results_golden_csv(tmp_path):
    rows = [
        ExperimentResultRow(0.5, "dp_laplace", 0.5, 719.0, 700.25, 12.5),
        ExperimentResultRow(0.5, "bdp_markov", None, None, None, None),
    ]
    text = emit_results(rows)
    assert text == (
        "epsilon,method,dp_tau,theoretical_alpha,empirical_q95,mape_percent\n"
        "0.5,dp_laplace,0.5,719.0,700.25,12.5\n"
        "0.5,bdp_markov,,,,\n"
    )
    assert text.splitlines()[0] == CSV_HEADER

    out = tmp_path / "rows.csv"
    assert emit_results(rows, path=out) == text
    assert out.read_text() == text

    with pytest.raises(ValueError, match="no rows"):
        emit_results([])
    with pytest.raises(ValueError, match="unknown format"):
        emit_results(rows, format="parquet")


def test_round_trips_preserve_rows(tmp_path):
    rows = run_experiment(_iq_config(epsilon_grid=(0.5, 1.0), trials=50))
    csv_path = tmp_path / "r.csv"
    emit_results(rows, format="csv", path=csv_path)
    assert read_results_csv(csv_path) == rows

    json_path = tmp_path / "r.json"
    emit_results(rows, format="json", path=json_path)
    assert read_results_json(json_path) == rows

    bad = tmp_path / "bad.csv"
    bad.write_text("eps,method\n1,dp_laplace\n")
    with pytest.raises(ValueError, match="unexpected header"):
        read_results_csv(bad)


def test_json_output_matches_shipped_schema():
    rows = [
        ExperimentResultRow(1.0, "dp_laplace", 1.0, 3.0, 2.9, 1.5),
        ExperimentResultRow(1.0, "bdp_markov", None, None, None, None),
    ]
    payload = json.loads(emit_results(rows, format="json"))
    jsonschema.validate(payload, results_schema())
    # a corrupted payload must NOT validate
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate([{"epsilon": "one"}], results_schema())


def test_config_from_file_fixtures():
    iq = config_from_file("fixtures/experiment_iq.yaml")
    assert iq.kind == "mechanism"
    assert iq.methods == ("dp_laplace", "bdp_general", "bdp_gaussian")
    assert iq.epsilon_grid == (0.5, 1.0, 2.0, 5.0)
    assert isinstance(iq.model, GaussianCorrelationModel)
    assert iq.data.size == 100
    assert iq.query.kind is QueryKind.SUM

    chain = config_from_file("fixtures/experiment_chain.yaml")
    assert chain.kind == "rr_comparison"
    assert chain.change_prob == 0.2
    assert chain.model is None
    assert chain.data.size == 500
    assert set(chain.data) <= {0.0, 1.0}


def test_config_from_file_errors_and_defaults(tmp_path):
    missing = tmp_path / "missing.yaml"
    missing.write_text("experiment: {kind: mechanism}\nquery: {kind: count}\n")
    with pytest.raises(ValueError, match="dataset"):
        config_from_file(missing)

    badquery = tmp_path / "badquery.yaml"
    badquery.write_text(
        "dataset: {kind: synthetic_iq, pairs: 3}\nquery: {kind: histogram}\n"
    )
    with pytest.raises(ValueError, match="unknown query kind"):
        config_from_file(badquery)

    unknown_data = tmp_path / "unknown_data.yaml"
    unknown_data.write_text("dataset: {kind: census}\nquery: {kind: count}\n")
    with pytest.raises(ValueError, match="unknown dataset kind"):
        config_from_file(unknown_data)

    unknown_transition = tmp_path / "unknown_transition.yaml"
    unknown_transition.write_text(
        "dataset: {kind: sampled_chain, transition: weather, length: 10}\n"
        "query: {kind: count}\n"
    )
    with pytest.raises(ValueError, match="unknown transition"):
        config_from_file(unknown_transition)

    defaults = tmp_path / "defaults.yaml"
    defaults.write_text("dataset: {kind: synthetic_iq, pairs: 3}\nquery: {kind: sum}\n")
    config = config_from_file(defaults)
    assert config.kind == "mechanism"
    assert config.methods == ("dp_laplace",)
    assert len(config.epsilon_grid) == 40  # default log grid
    assert config.query.clip == Interval(40.0, 160.0)  # dataset clip flows through

    inline = tmp_path / "inline.yaml"
    inline.write_text(
        "experiment: {kind: rr_comparison, epsilon_grid: [6.0], change_prob: 0.3,\n"
        "  trials: 5}\n"
        "dataset: {kind: sampled_chain, transition: [[0.7, 0.3], [0.3, 0.7]], length: 20}\n"
        "query: {kind: count}\n"
    )
    config = config_from_file(inline)
    assert config.data.size == 20
    assert config.methods == ("rr_bdp", "bdp_markov")  # kind default
    assert len(run_experiment(config)) == 2
