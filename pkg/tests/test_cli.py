import json
import subprocess
import sys

import pytest

from betreg.cli import main
from betreg.hypotheses import Dataset, FiniteSupport, HypothesisClass, Tabulated, save_class, save_dataset


@pytest.fixture
def synth_files(tmp_path):
    cfg = tmp_path / "gen.json"
    cfg.write_text(json.dumps({"support_size": 4, "class_size": 6, "label_family": "threepoint",
                               "variance_scale": 0.2, "seed": 3}))
    inst, data = tmp_path / "inst.json", tmp_path / "data.csv"
    assert main(["synth", "--config", str(cfg), "--out", str(inst), "--n", "60", "--data-out", str(data)]) == 0
    return inst, data


def test_fit_betting_deterministic(synth_files, tmp_path, capsys):
    inst, data = synth_files
    outs = []
    for k in range(2):
        out = tmp_path / f"fit{k}.json"
        assert main(["fit", "--class", str(inst), "--data", str(data), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    rep = json.loads(outs[0])
    assert rep["estimator"] == "betting" and rep["grid_slack"] > 0 and rep["degenerate"] is False
    assert len(rep["per_candidate_objectives"]) == 6
    assert capsys.readouterr().out == ""


@pytest.mark.parametrize("est", ["squared", "log"])
def test_fit_erm_to_stdout(synth_files, capsys, est):
    inst, data = synth_files
    assert main(["fit", "--class", str(inst), "--data", str(data), "--estimator", est]) == 0
    assert json.loads(capsys.readouterr().out)["estimator"] == est


def test_fit_exact_grid(synth_files, capsys):
    inst, data = synth_files
    assert main(["fit", "--class", str(inst), "--data", str(data), "--grid", "exact", "--eps", "0.01"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["grid_slack"] == pytest.approx(4 / 3 * 0.02)


def test_fit_singleton_zero_noise(tmp_path, capsys):
    s = FiniteSupport([[0.0], [1.0]], [0.5, 0.5])
    save_class(HypothesisClass((Tabulated([0.3, 0.6]),), 0, s), tmp_path / "c.json")
    save_dataset(s.resolve(Dataset([[0.0], [1.0], [1.0]], [0.3, 0.6, 0.6])), tmp_path / "d.csv")
    assert main(["fit", "--class", str(tmp_path / "c.json"), "--data", str(tmp_path / "d.csv")]) == 0
    assert json.loads(capsys.readouterr().out)["objective_value"] == 0.0


def test_fit_log_degenerate(tmp_path, capsys):
    s = FiniteSupport([[0.0]], [1.0])
    save_class(HypothesisClass((Tabulated([0.0]), Tabulated([0.0])), None, s), tmp_path / "c.json")
    save_dataset(s.resolve(Dataset([[0.0]], [1.0])), tmp_path / "d.csv")
    code = main(["fit", "--class", str(tmp_path / "c.json"), "--data", str(tmp_path / "d.csv"), "--estimator", "log"])
    assert code == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["degenerate"] is True and rep["objective_value"] is None


def test_fit_exit_codes(synth_files, tmp_path):
    inst, data = synth_files
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2")
    assert main(["fit", "--class", str(bad), "--data", str(data)]) == 2
    assert main(["fit", "--class", str(inst), "--data", str(tmp_path / "missing.csv")]) == 2
    off = tmp_path / "off.csv"
    off.write_text("x1,y\n17.0,0.5\n")
    assert main(["fit", "--class", str(inst), "--data", str(off)]) == 2
    assert main(["fit", "--class", str(inst), "--data", str(data), "--grid", "exact", "--eps", "0"]) == 3
    assert main(["fit", "--class", str(inst), "--data", str(data), "--eps", "0.01"]) == 3
    assert main(["fit", "--class", str(inst), "--data", str(data), "--grid", "exact", "--eps", "1e-9"]) == 3


def test_experiment_cli(tmp_path, capsys):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({
        "instance": {"support_size": 3, "class_size": 4, "label_family": "bernoulli", "seed": 1},
        "replications": 2, "n_values": [30], "estimators": ["log", "betting"],
    }))
    summ, plot = tmp_path / "s.json", tmp_path / "p.dat"
    assert main(["experiment", "--config", str(cfg), "--summary", str(summ), "--plot-data", str(plot)]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith("replication,estimator")
    assert len(out.splitlines()) == 5
    assert json.loads(summ.read_text())["cells"][0]["n"] == 30
    assert plot.read_text().startswith("#")


def test_experiment_cli_config_errors(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"replications": 2, "n_values": [0]}))
    assert main(["experiment", "--config", str(cfg)]) == 2
    cfg.write_text("nope")
    assert main(["experiment", "--config", str(cfg)]) == 2
    assert main(["experiment", "--config", str(tmp_path / "none.json")]) == 2


def test_verify_cli(capsys):
    assert main(["verify", "--suite", "gap", "--suite", "variance_proxy", "--quick"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["passed"] and [s["suite"] for s in rep["suites"]] == ["gap", "variance_proxy"]


def test_bounds_cli(capsys):
    assert main(["bounds", "--n", "400", "--class-size", "20", "--delta", "0.1", "--q", "0.25", "--sigma2", "0.01"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["first_order"] == pytest.approx(0.513344656265753, rel=1e-12)
    assert rep["second_order"] == pytest.approx(0.438162770371071, rel=1e-12)
    assert main(["bounds", "--n", "400", "--delta", "2"]) == 3


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "betreg", "verify", "--suite", "gap"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["passed"] is True
