import json

import pytest

from noisygt.cli import main


def test_thresholds_json(capsys):
    assert main(["thresholds", "--alpha", "0.1", "--p01", "0.1", "--p10", "0.1", "--n", "10000"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["gamma_star"] == 9 and data["C"] == 0.5
    assert data["m_na"] == pytest.approx(54155.832501273337, rel=1e-12)


def test_sweep_swap_invariance(capsys):
    assert main(["sweep", "--alphas", "0.1,0.3", "--channel", "0.01,0.1", "--channel", "0.1,0.01"]) == 0
    rows = [r.split(",") for r in capsys.readouterr().out.splitlines()[1:]]
    assert len(rows) == 4
    assert rows[0][5] == rows[1][5] and rows[2][5] == rows[3][5]


def test_sweep_default_grid(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 1 + 45 * 4


@pytest.mark.parametrize("argv", [
    ["thresholds", "--alpha", "0.1", "--p01", "0.5", "--p10", "0.5"],
    ["sweep", "--alphas", ""],
    ["sweep", "--channel", "0.1"],
    ["simulate", "--mode", "adaptive"],
    ["frobnicate"],
    ["thresholds", "--alpha", "1.5", "--p01", "0.1", "--p10", "0.1"],
])
def test_user_errors_exit_1(argv, capsys):
    assert main(argv) == 1
    assert "error" in capsys.readouterr().err


def test_simulate_config_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(dict(mode="non-adaptive", n=200, alpha=0.1, p01=0.01, p10=0.01, trials=3, seed=4)))
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["simulate", "--config", str(cfg), "--workers", "2", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert main(["simulate", "--config", str(cfg), "--trials", "2", "--multipliers", "0.5,1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3 and lines[1].split(",")[7] == "2"


def test_oracle_check(capsys):
    assert main(["oracle-check", "--max-n", "2", "--max-tests", "2"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["ordering_failures"] == 0 and data["form_mismatches"] == 0


def test_plot(tmp_path):
    csv_path, svg_path = tmp_path / "s.csv", tmp_path / "s.svg"
    assert main(["sweep", "--alphas", "0.1,0.2", "--out", str(csv_path)]) == 0
    assert main(["plot", "--input", str(csv_path), "--out", str(svg_path)]) == 0
    assert svg_path.read_text().startswith("<svg")
    assert main(["plot", "--input", str(tmp_path / "missing.csv")]) == 1
