import json

import pytest

from graphlms.cli import main


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_list_experiments(capsys):
    assert main(["--list-experiments"]) == 0
    out = capsys.readouterr().out
    assert "fig2" in out and "carto_tracking" in out
    assert main(["experiment", "run", "--list-experiments"]) == 0


def test_graph_gen_and_info(tmp_path, capsys):
    path = tmp_path / "g.json"
    assert main(["graph", "gen", "--nodes", "30", "--graph-seed", "4", "--out", str(path)]) == 0
    gen = _json(capsys)
    assert main(["graph", "info", str(path)]) == 0
    info = _json(capsys)
    assert info["n"] == 30 and info["edges"] == gen["edges"] and info["connected"]
    assert info["eigenvalues"][0] == 0.0


def test_sample_and_theory(capsys):
    assert main(["sample", "--strategy", "max_det", "--m", "10"]) == 0
    s = _json(capsys)
    assert len(s["sampling_set"]) == 10 and s["dbar_b_norm"] < 1
    assert main(["theory", "msd", "--noise-uniform", "0", "0.01"]) == 0
    assert _json(capsys)["msd"] > 0
    assert main(["theory", "msd-k", "--noise-var", "0.001", "--vertex", "3"]) == 0
    assert _json(capsys)["vertex"] == 3
    assert main(["theory", "msd-k", "--noise-var", "0.001"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "vertex,msd" and len(lines) == 51
    assert main(["theory", "check-stability"]) == 0
    assert _json(capsys)["stable"]


def test_numerical_failures_exit_3(capsys):
    assert main(["theory", "check-stability", "--step-size", "5"]) == 3
    assert main(["theory", "msd", "--m", "4"]) == 3
    assert main(["lms", "run", "--step-size", "5", "--n-iters", "500"]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["experiment", "run", "--config", str(tmp_path / "none.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"experiment": "fig2", "n_trials": 0}))
    assert main(["experiment", "run", "--config", str(bad)]) == 2
    assert main(["theory", "msd", "--graph", str(tmp_path / "missing.json")]) == 2
    assert main(["sample", "--strategy", "nope", "--m", "3"]) == 2
    assert main(["sample", "--strategy", "max_det", "--m", "99"]) == 2
    assert main([]) == 2


def test_lms_and_adaptive_runs(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["lms", "run", "--n-iters", "50", "--noise-var", "1e-3", "--out", str(out)]) == 0
    assert not _json(capsys)["diverged"]
    assert out.read_text().splitlines()[0] == "iteration,squared_deviation"
    out = tmp_path / "a.csv"
    assert main(["adaptive", "run", "--n-iters", "30", "--band", "5", "--out", str(out)]) == 0
    assert _json(capsys)["final_support_size"] > 0
    assert out.read_text().splitlines()[0] == "iteration,nmsd,support_cardinality,sampling_set"


def test_experiment_run_with_overrides(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "fig4", "params": {"m_values": [10]}}))
    args = ["experiment", "run", "--config", str(cfg), "--output", str(tmp_path / "o"), "--n-trials", "2",
            "--set", "params.strategies=[\"max_det\", \"random\"]", "--set", "step_size=0.4"]
    assert main(args) == 0
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["config"]["step_size"] == 0.4 and man["config"]["n_trials"] == 2
    assert set(man["summary"]["median_msd"]) == {"max_det@10", "random@10"}
    assert main(["experiment", "run", "--config", str(cfg), "--set", "oops"]) == 2


@pytest.mark.parametrize("argv", [["graph"], ["theory"], ["lms"]])
def test_missing_action(argv):
    assert main(argv) == 2
