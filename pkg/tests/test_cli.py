import io
import json

import pytest

from nalab.cli import main
from nalab.harness import parse_table


def _run(argv, monkeypatch=None):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def test_sweep_csv_and_markdown(tmp_path):
    code, text = _run(["sweep", "--problem", "half", "--bias", "fixed-zero", "--r-list", "120,240",
                       "--trials", "5", "--seed", "1"])
    assert code == 0
    rows = parse_table(text)
    assert [r.r for r in rows] == [120, 240] and all(r.percent_opt == 100 for r in rows)
    out = tmp_path / "t.md"
    code, _ = _run(["sweep", "--problem", "half", "--bias", "fixed-zero", "--r-list", "120,240",
                    "--trials", "5", "--seed", "1", "--format", "markdown", "--out", str(out)])
    assert code == 0 and parse_table(out.read_text()) == rows


def test_run_prints_record(tmp_path):
    traj, elog = tmp_path / "traj.txt", tmp_path / "eval.txt"
    code, text = _run(["run", "--problem", "quarter", "--r", "120", "--seed", "2",
                       "--dump-trajectories", str(traj), "--dump-eval-log", str(elog)])
    rec = json.loads(text)
    assert code == 0 and rec["success"] and rec["termination"] == "success"
    assert traj.read_text().splitlines()[-1] == f"# end {rec['evaluations_used']} success"
    assert len(elog.read_text().splitlines()) == rec["evaluations_used"] + 1
    code, drift = _run(["drift", str(traj)])
    assert code == 0 and drift.startswith("g_lo,g_hi,count,drift,stderr")


def test_oracle_and_evaluate():
    code, text = _run(["oracle", "--problem", "half", "--bias", "fixed-zero", "--r", "24"])
    assert code == 0 and json.loads(text)["best_fitness"] == 1.0
    code, text = _run(["evaluate", "--problem", "two-quarters", "--r", "8", "1", "7"])
    assert code == 0 and 0 < json.loads(text)["fitness"] < 0.75


def test_sweep_with_timeouts_and_cube():
    code, text = _run(["sweep", "--problem", "cube", "--neurons", "3", "--output-mode", "evolved",
                       "--r-list", "24", "--trials", "3", "--stats-include-timeouts"])
    assert code == 0 and parse_table(text)[0].trials == 3


def test_continuous_mutation_param():
    code, text = _run(["run", "--problem", "half", "--mutation", "pareto", "--mutation-param",
                       "shape=1.5", "--mutation-param", "scale=0.05", "--seed", "3"])
    assert code == 0 and "final_fitness" in json.loads(text)


def test_env_overrides(monkeypatch):
    monkeypatch.setenv("NALAB_TRIALS", "4")
    monkeypatch.setenv("NALAB_R_LIST", "120")
    monkeypatch.setenv("NALAB_BIAS", "fixed-zero")
    code, text = _run(["sweep"])
    assert code == 0 and parse_table(text)[0].trials == 4
    code, text = _run(["sweep", "--trials", "2"])
    assert parse_table(text)[0].trials == 2


def test_config_file_custom_problem(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"problem": "custom", "custom": {"arcs": [[0, 60], [120, 180], [240, 300]]},
                               "r-list": "48", "trials": 3, "threshold": 0.6}))
    code, text = _run(["--config", str(cfg), "sweep"])
    assert code == 0 and parse_table(text)[0].percent_opt == 100


@pytest.mark.parametrize("argv", [
    ["sweep", "--problem", "nope"],
    ["sweep", "--r-list", "4", "--trials", "1"],
    ["sweep", "--trials", "0"],
    ["run", "--neurons", "1", "--output-mode", "evolved"],
    ["run", "--problem", "cube", "--input-dim", "2"],
    ["evaluate", "--r", "120", "500", "3"],
    ["sweep", "--r-list", "120", "--trials", "1", "--out", "/nonexistent/dir/t.csv"],
    ["--config", "/nonexistent.json", "sweep"],
    ["run", "--problem", "custom"],
])
def test_errors_exit_nonzero(argv, capsys):
    code, _ = _run(argv)
    assert code != 0
    assert "nalab: error" in capsys.readouterr().err


def test_bad_config_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert _run(["--config", str(bad), "run"])[0] == 2


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "nalab", "oracle", "--problem", "quarter", "--r", "8"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "best_fitness" in res.stdout
