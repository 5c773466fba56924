import csv
from pathlib import Path

import pytest

from privlqg.cli import main
from privlqg.config import ConfigError, alpha_grid, example_config, load_config, parse_alpha

REPO = Path(__file__).resolve().parents[1]
PAPER_CFG = REPO / "configs" / "paper.cfg"


def read_csv(path):
    lines = Path(path).read_text().splitlines()
    assert lines[0].startswith("# privlqg ")
    assert "config_sha256=" in lines[0] and "seed=" in lines[0]
    return list(csv.DictReader(lines[1:]))


def write_cfg(tmp_path, text):
    p = tmp_path / "m.cfg"
    p.write_text(text)
    return p


MODEL_TOML = """
[model]
A = [[0.19, 0.46], [0.31, 0.8]]
B = [[2.0], [1.0]]
C = [[1.0, 0.0]]
Q = {Q}
R = [[1.0]]
W = [[1.5, 0.5], [0.5, 1.5]]
U = [[1.0]]
"""


def test_paper_config_matches_builtin():
    cfg = load_config(PAPER_CFG)
    assert cfg.model.to_dict() == example_config().model.to_dict()
    assert cfg.alpha == example_config().alpha
    assert cfg.config_hash() == example_config().config_hash()


def test_validate_exit_codes(tmp_path, capsys):
    assert main(["validate", "--config", str(PAPER_CFG)]) == 0
    assert "overall: PASS" in capsys.readouterr().out

    bad = write_cfg(tmp_path, MODEL_TOML.format(Q="[[1.0, 0.0], [0.0, -1.0]]"))
    assert main(["validate", "--config", str(bad)]) == 1
    out = capsys.readouterr().out
    assert any(line.startswith("Q ⪰ 0") and "FAIL" in line for line in out.splitlines())


def test_missing_key_names_it(tmp_path, capsys):
    text = MODEL_TOML.format(Q="[[1.0, 0.0], [0.0, 1.0]]").replace("R = [[1.0]]\n", "")
    p = write_cfg(tmp_path, text)
    with pytest.raises(ConfigError, match="'model.R'"):
        load_config(p)
    assert main(["validate", "--config", str(p)]) == 2
    assert "model.R" in capsys.readouterr().err


def test_toml_syntax_error_cites_line(tmp_path):
    p = write_cfg(tmp_path, "[model]\nA = [[1.0]]\nB = = 2\n")
    with pytest.raises(ConfigError, match="line 3"):
        load_config(p)


def test_alpha_parsing():
    assert parse_alpha("7") == (7.0,)
    assert parse_alpha("1,2.5") == (1.0, 2.5)
    assert parse_alpha("7:8:0.5") == (7.0, 7.5, 8.0)
    assert len(alpha_grid(7, 27, 0.5)) == 41
    with pytest.raises(ConfigError):
        parse_alpha("x")


def test_sweep_command(tmp_path):
    assert main(["sweep", "--config", str(PAPER_CFG), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "sweep.csv")
    assert [int(r["T"]) for r in rows] == list(range(1, 11))
    for col in ("tr_Q_privacy", "Q_lqg"):
        vals = [float(r[col]) for r in rows]
        assert all(b > a for a, b in zip(vals, vals[1:]))
    first = (tmp_path / "sweep.csv").read_bytes()
    assert main(["sweep", "--config", str(PAPER_CFG), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "sweep.csv").read_bytes() == first


def test_sweep_single_period(tmp_path):
    assert main(["sweep", "--config", str(PAPER_CFG), "--out", str(tmp_path), "--t-min", "1", "--t-max", "1"]) == 0
    (row,) = read_csv(tmp_path / "sweep.csv")
    assert float(row["tr_Q_privacy"]) == 0.0 and float(row["Q_lqg"]) == 0.0


def test_sweep_undetectable_exits_nonzero(tmp_path, capsys):
    text = MODEL_TOML.format(Q="[[1.0, 0.0], [0.0, 1.0]]").replace("A = [[0.19, 0.46], [0.31, 0.8]]", "A = [[0.0, -1.0], [1.0, 0.0]]")
    p = write_cfg(tmp_path, text)
    assert main(["sweep", "--config", str(p), "--out", str(tmp_path), "--t-max", "4"]) == 1
    assert "T=2" in capsys.readouterr().err


def test_optimize_command_and_scan_agree(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    assert main(["optimize", "--config", str(PAPER_CFG), "--out", str(d1)]) == 0
    assert main(["optimize", "--config", str(PAPER_CFG), "--out", str(d2), "--scan"]) == 0
    bis = read_csv(d1 / "optimal_T.csv")
    scan = read_csv(d2 / "optimal_T.csv")
    assert len(bis) == 41
    assert [r["T_star"] for r in bis] == [r["T_star"] for r in scan]
    assert {r["method"] for r in bis} == {"dichotomy"} and {r["method"] for r in scan} == {"linear_scan"}
    ts = [int(r["T_star"]) for r in bis]
    assert ts == sorted(ts) and len(set(ts)) > 1


def test_optimize_tiny_alpha(tmp_path):
    assert main(["optimize", "--config", str(PAPER_CFG), "--out", str(tmp_path), "--alpha", "1e-13"]) == 0
    (row,) = read_csv(tmp_path / "optimal_T.csv")
    assert row["T_star"] == "1"


def test_simulate_small_sample_warns(tmp_path):
    args = ["simulate", "--config", str(PAPER_CFG), "--out", str(tmp_path), "--trials", "1", "--horizon", "50"]
    assert main(args) == 0
    assert (tmp_path / "trace.csv").exists()
    rows = read_csv(tmp_path / "empirical.csv")
    assert any(r["quantity"] == "warning" for r in rows)


def test_unwritable_output_dir(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["reproduce-example", "--out", str(blocker / "sub")]) == 1
    assert str(blocker / "sub") in capsys.readouterr().err
