import csv
import json
import subprocess
import sys

import pytest

from srrr.cli import run
from srrr.fileio import read_matrix_csv, read_result_json


def outputs(path):
    """Bytes of every output file except the manifest, keyed by name."""
    return {p.name: p.read_bytes() for p in sorted(path.iterdir()) if p.name != "manifest.json"}


@pytest.fixture
def sim(tmp_path):
    out = tmp_path / "sim"
    assert run(["simulate", "--seed", "3", "--out", str(out)]) == 0
    return out


def test_simulate_shapes(sim):
    assert read_matrix_csv(sim / "X.csv").shape == (5, 100)
    assert read_matrix_csv(sim / "Y.csv").shape == (7, 100)
    truth = json.loads((sim / "truth.json").read_text())
    assert len(truth["support"]) == 3
    manifest = json.loads((sim / "manifest.json").read_text())
    assert manifest["command"] == "simulate" and manifest["seed"] == 3
    assert set(manifest["outputs"]) == {"X.csv", "Y.csv", "truth.json"}


def test_simulate_is_deterministic(sim, tmp_path):
    assert run(["simulate", "--seed", "3", "--out", str(tmp_path / "again")]) == 0
    assert outputs(sim) == outputs(tmp_path / "again")


def test_fit_writes_result_and_trace(sim, tmp_path):
    out = tmp_path / "fit"
    rc = run(["fit", "--X", str(sim / "X.csv"), "--Y", str(sim / "Y.csv"), "--rank", "3",
              "--penalty", "geman", "--lambda", "3", "--out", str(out)])
    assert rc == 0
    res = read_result_json(out / "result.json")
    assert res.A.shape == (7, 3) and res.B.shape == (5, 3)
    assert res.status in ("Converged", "MaxIterReached")
    with open(out / "trace.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["iter", "objective", "seconds"]
    assert len(rows) == res.iters + 2


def test_fit_json_dataset_and_substeps(tmp_path, sim):
    X = read_matrix_csv(sim / "X.csv").tolist()
    Y = read_matrix_csv(sim / "Y.csv").tolist()
    (tmp_path / "d.json").write_text(json.dumps({"X": X, "Y": Y}))
    out = tmp_path / "fit"
    assert run(["fit", "--data", str(tmp_path / "d.json"), "--rank", "2", "--penalty", "l1",
                "--substeps", "--center", "--out", str(out)]) == 0
    assert json.loads((out / "result.json").read_text())["method"] == "altmin-mm"


def test_fit_subgrad_rejects_geman(sim, tmp_path):
    rc = run(["fit", "--X", str(sim / "X.csv"), "--Y", str(sim / "Y.csv"), "--rank", "3",
              "--penalty", "geman", "--method", "altmin-subgrad", "--out", str(tmp_path / "o")])
    assert rc == 2


@pytest.mark.parametrize("argv", [
    ["fit", "--rank", "3"],
    ["fit", "--X", "{X}", "--Y", "{Y}", "--rank", "9"],
    ["fit", "--X", "{X}", "--Y", "{Y}", "--rank", "3", "--xi", "1,x"],
    ["benchmark", "--X", "{X}", "--Y", "{Y}", "--rank", "3", "--time-budget", "0"],
    ["montecarlo", "--trials", "1"],
    ["montecarlo", "--arm", "a:scad", "--trials", "1"],
])
def test_usage_errors_exit_2(sim, tmp_path, argv):
    argv = [a.format(X=sim / "X.csv", Y=sim / "Y.csv") for a in argv]
    assert run(argv + ["--out", str(tmp_path / "o")]) == 2


def test_missing_input_exits_1(tmp_path):
    rc = run(["fit", "--X", str(tmp_path / "nope.csv"), "--Y", str(tmp_path / "nope.csv"),
              "--rank", "1", "--out", str(tmp_path / "o")])
    assert rc == 1


def test_argparse_error_exits_2():
    with pytest.raises(SystemExit) as info:
        run(["fit", "--rank", "notanint"])
    assert info.value.code == 2


def test_benchmark_outputs(sim, tmp_path):
    out = tmp_path / "bench"
    rc = run(["benchmark", "--X", str(sim / "X.csv"), "--Y", str(sim / "Y.csv"), "--rank", "3",
              "--penalty", "l1", "--lambda", "20", "--time-budget", "5", "--no-timing", "--out", str(out)])
    assert rc == 0
    for m in ("altmin-mm", "altmin-subgrad"):
        assert (out / f"result_{m}.json").exists() and (out / f"trace_{m}.csv").exists()
    with open(out / "combined.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["method", "iter", "objective", "seconds"]
    assert {r[0] for r in rows[1:]} == {"altmin-mm", "altmin-subgrad"}
    mm0 = [r for r in rows[1:] if r[0] == "altmin-mm"][0]
    sg0 = [r for r in rows[1:] if r[0] == "altmin-subgrad"][0]
    assert mm0[2] == sg0[2]  # shared initializer


def test_montecarlo_single_trial(tmp_path):
    out = tmp_path / "mc"
    rc = run(["montecarlo", "--arm", "l1:l1:10", "--arm", "rrr:none", "--trials", "1", "--threads", "1",
              "--no-timing", "--out", str(out)])
    assert rc == 0
    summary = json.loads((out / "summary.json").read_text())
    with open(out / "trials.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    for row in rows:
        assert summary["arms"][row["arm"]]["mean_angle"] == float(row["angle"])


def test_montecarlo_experiment_file(tmp_path):
    exp = {"spec": {"sparse_rows": 4}, "trials": 2, "seed": 5,
           "arms": [{"name": "g", "penalty": "geman", "theta": 0.05, "lambda": 3.0},
                    {"name": "rrr", "penalty": "none"}]}
    (tmp_path / "exp.json").write_text(json.dumps(exp))
    out = tmp_path / "mc"
    assert run(["montecarlo", "--experiment", str(tmp_path / "exp.json"), "--threads", "2",
                "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["trials"] == 2 and summary["spec"]["sparse_rows"] == 4
    assert summary["arm_configs"]["g"]["penalty"]["theta"] == 0.05


def test_replay_is_bit_identical(sim, tmp_path):
    first = tmp_path / "fit1"
    assert run(["fit", "--X", str(sim / "X.csv"), "--Y", str(sim / "Y.csv"), "--rank", "3",
                "--penalty", "l1", "--lambda", "5", "--no-timing", "--out", str(first)]) == 0
    second = tmp_path / "fit2"
    assert run(["replay", str(first / "manifest.json"), "--out", str(second)]) == 0
    assert outputs(first) == outputs(second)


def test_replay_bad_manifest(tmp_path):
    (tmp_path / "m.json").write_text("{}")
    assert run(["replay", str(tmp_path / "m.json"), "--out", str(tmp_path / "o")]) == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "srrr", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip().startswith("srrr")
