"""The corrdp-plot entry point."""

from pathlib import Path

import pytest

from corrdp_plots.cli import main

DATA = Path(__file__).parent / "data"


def test_renders_from_flags(tmp_path, capsys):
    out = tmp_path / "fig.png"
    code = main(
        ["--input", str(DATA / "iq_errors.csv"), "--kind", "mape_bars", "--out", str(out)]
    )
    assert code == 0
    assert out.stat().st_size > 0
    assert "wrote" in capsys.readouterr().out


def test_log_scale_flag_round_trip(tmp_path):
    for flag in ("--log-scale", "--no-log-scale"):
        out = tmp_path / f"fig{flag.count('n')}.png"
        code = main(
            ["--input", str(DATA / "rr_small.csv"), "--kind", "rr_comparison",
             "--out", str(out), flag]
        )
        assert code == 0 and out.stat().st_size > 0


def test_unknown_kind_is_a_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["--input", str(DATA / "iq_errors.csv"), "--kind", "sparkline", "--out", "x.png"])
    assert exc.value.code == 2


def test_bad_schema_reports_the_column(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("epsilon,method\n1.0,dp_laplace\n")
    code = main(["--input", str(bad), "--kind", "error_curves", "--out", str(tmp_path / "x.png")])
    assert code == 2
    assert "dp_tau" in capsys.readouterr().err


def test_missing_input_is_an_error(tmp_path, capsys):
    code = main(
        ["--input", str(tmp_path / "nope.csv"), "--kind", "error_curves",
         "--out", str(tmp_path / "x.png")]
    )
    assert code == 2
    assert "does not exist" in capsys.readouterr().err
