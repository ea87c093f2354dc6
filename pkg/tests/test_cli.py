"""Command-line interface, exercised in process through main(argv)."""

import csv
import io
import json
import math

import pytest

from corrdp.cli import main


def _lines(text):
    return {
        line.split(":", 1)[0].strip(): line.split(":", 1)[1].strip()
        for line in text.strip().splitlines()
        if ":" in line
    }


def test_calibrate_general(capsys):
    assert main(["calibrate", "general", "--epsilon", "1.2", "--m", "3"]) == 0
    out = _lines(capsys.readouterr().out)
    assert out["bound"] == "general"
    assert out["dp_tau"] == "0.4000"
    assert out["h_factor"] == "3.0000"
    assert out["feasible"] == "true"


def test_calibrate_gaussian(capsys):
    code = main(
        [
            "calibrate", "gaussian",
            "--epsilon", "1.4483", "--m", "2", "--rho", "0.4483", "--diameter", "1.0",
        ]
    )
    assert code == 0
    out = _lines(capsys.readouterr().out)
    assert out["dp_tau"] == "1.0000"
    assert out["h_factor"] == "1.4483"


def test_calibrate_markov_exit_codes(capsys):
    assert main(["calibrate", "markov", "--epsilon", "10", "--gamma", "4"]) == 0
    out = _lines(capsys.readouterr().out)
    assert out["floor_epsilon"] == "5.5452"
    assert out["dp_tau"] == "4.4548"

    assert main(["calibrate", "markov", "--epsilon", "5", "--gamma", "4"]) == 3
    out = _lines(capsys.readouterr().out)
    assert out["feasible"] == "false"
    assert out["dp_tau"] == "0.0000"

    assert main(["calibrate", "markov", "--epsilon", "5"]) == 2
    assert "error:" in capsys.readouterr().err


def test_bound_values(capsys):
    assert main(["bound", "general", "--epsilon", "0.4", "--m", "3"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.2)

    assert main(
        ["bound", "gaussian", "--epsilon", "1.0", "--m", "3", "--rho", "0.275",
         "--diameter", "254"]
    ) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.853448275862069 * 254)

    assert main(["bound", "markov", "--epsilon", "1.0", "--gamma", "7.54"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0 + 4 * math.log(7.54))

    assert main(["bound", "markov", "--epsilon", "1.0"]) == 2
    assert "error:" in capsys.readouterr().err

    assert main(["bound", "general"]) == 2  # needs --epsilon
    assert "--epsilon" in capsys.readouterr().err


def test_bound_compare_gaussian_crossover(capsys):
    assert main(["bound", "compare-gaussian", "--m", "3", "--points", "7"]) == 0
    out = capsys.readouterr().out
    reader = csv.DictReader(io.StringIO(out))
    rows = list(reader)
    assert len(rows) == 14
    by_rho = {}
    for r in rows:
        by_rho.setdefault(float(r["epsilon"]), {})[r["method"]] = float(
            r["theoretical_alpha"]
        )
    threshold = 2.0 / 4.25  # improvement threshold at m=3
    for rho, methods in by_rho.items():
        assert set(methods) == {"bdp_gaussian", "bdp_general"}
        if rho < threshold - 0.01:
            assert methods["bdp_gaussian"] < methods["bdp_general"]
        elif rho > threshold + 0.01:
            assert methods["bdp_gaussian"] > methods["bdp_general"]
    assert main(["bound", "compare-gaussian", "--m", "1"]) == 2


def test_oracle_instance_fixture(capsys):
    assert main(["oracle", "--instance", "fixtures/oracle_pair.yaml"]) == 0
    out = _lines(capsys.readouterr().out)
    assert float(out["bdpl"]) == pytest.approx(math.log(12 / 5), abs=1e-6)
    assert "witness" in out


def test_oracle_table2(capsys):
    assert main(["oracle", "--fixture", "table2", "--r", "2", "--eps-ln2"]) == 0
    out = _lines(capsys.readouterr().out)
    assert float(out["first_record_adversary"]) == pytest.approx(
        math.log(50 / 21), abs=1e-6
    )
    assert out["first_record_adversary"] == out["closed_form_first_record"]
    assert float(out["two_eps"]) == pytest.approx(2 * math.log(2), abs=1e-6)
    assert float(out["bdpl"]) <= float(out["two_eps"]) + 1e-9

    assert main(["oracle"]) == 2
    assert "error:" in capsys.readouterr().err


def test_estimate_pearson(capsys):
    code = main(
        ["estimate", "pearson", "--input", "fixtures/grouped_small.csv",
         "--group-size", "2"]
    )
    assert code == 0
    out = _lines(capsys.readouterr().out)
    assert out["records"] == "15"
    assert out["complete_groups"] == "4"
    assert 0.0 < float(out["max_pearson"]) <= 1.0


def test_estimate_transition(capsys):
    assert main(["estimate", "transition", "--input", "fixtures/states_small.csv"]) == 0
    out = capsys.readouterr().out
    parsed = _lines(out)
    assert parsed["observations"] == "18"
    assert parsed["hypotheses"] == "ok"
    assert float(parsed["gamma"]) == pytest.approx(2.5, abs=1e-3)


def test_estimate_missing_file(capsys):
    assert main(["estimate", "transition", "--input", "no/such/file.csv"]) == 2
    assert "error:" in capsys.readouterr().err


def test_run_experiment_to_file(tmp_path, capsys):
    out = tmp_path / "results.csv"
    code = main(["run", "--config", "fixtures/experiment_iq.yaml", "--out", str(out)])
    assert code == 0
    err = capsys.readouterr().err
    assert "wrote 12 rows" in err
    lines = out.read_text().splitlines()
    assert lines[0] == "epsilon,method,dp_tau,theoretical_alpha,empirical_q95,mape_percent"
    assert len(lines) == 13


def test_run_emits_json_to_stdout(capsys):
    code = main(["--format", "json", "run", "--config", "fixtures/experiment_chain.yaml"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload) == 6  # 3 epsilons x 2 methods
    assert {row["method"] for row in payload} == {"rr_bdp", "bdp_markov"}


def test_run_infeasible_grid_exit_code(tmp_path, capsys):
    config = tmp_path / "infeasible.yaml"
    config.write_text(
        "experiment:\n"
        "  kind: mechanism\n"
        "  epsilon_grid: [5.0]\n"
        "  methods: [bdp_markov]\n"
        "  trials: 5\n"
        "dataset: {kind: state_csv, path: fixtures/states_small.csv}\n"
        "query: {kind: count}\n"
        "model: {kind: markov, transition: activity}\n"
    )
    assert main(["run", "--config", str(config)]) == 3

    assert main(["run", "--config", "no/such/config.yaml"]) == 2
    assert "error:" in capsys.readouterr().err


def test_synth_outputs(tmp_path, capsys):
    iq = tmp_path / "iq.csv"
    assert main(["synth", "iq", "--pairs", "5", "--out", str(iq), "--seed", "9"]) == 0
    lines = iq.read_text().splitlines()
    assert lines[0] == "group,value"
    assert len(lines) == 11

    chain = tmp_path / "chain.csv"
    assert main(
        ["synth", "chain", "--length", "30", "--transition", "activity",
         "--out", str(chain)]
    ) == 0
    lines = chain.read_text().splitlines()
    assert lines[0] == "state"
    assert len(lines) == 31
    assert set(lines[1:]) <= {"0", "1"}

    assert main(["synth", "iq", "--pairs", "2"]) == 2  # no --out
    assert main(["synth", "chain", "--transition", "weather", "--out", str(chain)]) == 2
    capsys.readouterr()


def test_global_flags_accepted_in_both_positions(tmp_path):
    early = tmp_path / "early.csv"
    late = tmp_path / "late.csv"
    assert main(["--seed", "5", "synth", "iq", "--pairs", "4", "--out", str(early)]) == 0
    assert main(["synth", "iq", "--pairs", "4", "--seed", "5", "--out", str(late)]) == 0
    assert early.read_text() == late.read_text()
