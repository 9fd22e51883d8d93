import json
from pathlib import Path

import pytest

from swarmctl import config, presets
from swarmctl.cli import main

ROOT = Path(__file__).resolve().parent.parent
SCEN = ROOT / "scenarios"
PRE = ROOT / "presets"


def short_scenario(tmp_path, name, steps):
    sc = config.load_scenario(SCEN / f"{name}.json").with_(horizon_steps=steps)
    p = tmp_path / f"{name}_short.json"
    config.save_scenario(sc, p)
    return p


def test_run_row_count(tmp_path):
    sc = short_scenario(tmp_path, "flocking", 30)
    assert main(["run", "--scenario", str(sc), "--controller", str(PRE / "flocking.json"),
                 "--seed", "7", "--out", str(tmp_path / "r")]) == 0
    lines = (tmp_path / "r" / "trajectory.csv").read_text().splitlines()
    assert len(lines) == 1 + 40 * 30
    assert not (tmp_path / "r" / "cost_report.json").exists()
    manifest = json.loads((tmp_path / "r" / "manifest.json").read_text())
    assert manifest["seed"] == 7 and manifest["scenario"]["horizon_steps"] == 30
    assert "alignment_order" in json.loads((tmp_path / "r" / "metrics.json").read_text())


def test_run_horizon_override_and_cost_files(tmp_path):
    out = tmp_path / "r"
    assert main(["run", "--scenario", str(SCEN / "collision_avoidance.json"),
                 "--controller", str(PRE / "collision_avoidance_template.json"),
                 "--horizon", "10", "--out", str(out)]) == 0
    assert json.loads((out / "cost_report.json").read_text())["total"] == 40.0
    assert len((out / "cost_per_step.csv").read_text().splitlines()) == 11
    assert (out / "trajectory.csv").read_text().splitlines()[0].endswith(",cost")


def test_missing_scenario_exit_2(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    code = main(["run", "--scenario", str(missing), "--controller", str(PRE / "flocking.json"),
                 "--out", str(tmp_path / "r")])
    assert code == 2
    assert str(missing) in capsys.readouterr().err


def test_malformed_controller_exit_2(tmp_path, capsys):
    bad = tmp_path / "c.json"
    d = config.controller_to_dict(presets.flocking_controller())
    d["vmax"] = -1
    bad.write_text(json.dumps(d))
    assert main(["run", "--scenario", str(SCEN / "flocking.json"), "--controller", str(bad),
                 "--out", str(tmp_path / "r")]) == 2
    err = capsys.readouterr().err
    assert str(bad) in err and "vmax" in err


def test_simulation_error_exit_3(tmp_path):
    spec = presets.collision_structure()
    d = config.controller_to_dict(spec)
    d["scalars"][0]["transform"] = [{"op": "power", "value": 900}]
    d["params"] = [[1.0, 0, 0]] * 4
    p = tmp_path / "c.json"
    p.write_text(json.dumps(d))
    assert main(["run", "--scenario", str(SCEN / "collision_avoidance.json"), "--controller", str(p),
                 "--out", str(tmp_path / "r")]) == 3


def test_optimize_budget_and_round_trip(tmp_path):
    sc = short_scenario(tmp_path, "collision_avoidance", 40)
    out = tmp_path / "o"
    assert main(["optimize", "--scenario", str(sc), "--controller",
                 str(PRE / "collision_avoidance_template.json"), "--budget", "20", "--n-init", "5",
                 "--seed", "3", "--out", str(out)]) == 0
    assert len((out / "campaign_log.csv").read_text().splitlines()) == 21
    manifest = json.loads((out / "manifest.json").read_text())
    assert main(["run", "--scenario", str(sc), "--controller", str(out / "best_controller.json"),
                 "--seed", str(manifest["eval_seed"]), "--out", str(tmp_path / "r")]) == 0
    total = json.loads((tmp_path / "r" / "cost_report.json").read_text())["total"]
    assert total == manifest["incumbent_cost"]


@pytest.mark.parametrize("budget,n_init", [("5", "5"), ("4", "5"), ("10", "1")])
def test_optimize_budget_precondition(tmp_path, capsys, budget, n_init):
    code = main(["optimize", "--scenario", str(SCEN / "collision_avoidance.json"), "--controller",
                 str(PRE / "collision_avoidance_template.json"), "--budget", budget,
                 "--n-init", n_init, "--out", str(tmp_path / "o")])
    assert code == 2 and "--budget" in capsys.readouterr().err


def test_montecarlo_outputs(tmp_path):
    sc = short_scenario(tmp_path, "collision_avoidance", 30)
    out = tmp_path / "m"
    assert main(["montecarlo", "--scenario", str(sc), "--controller",
                 str(PRE / "collision_avoidance_template.json"), "--trials", "100",
                 "--out", str(out)]) == 0
    assert len((out / "trial_costs.csv").read_text().splitlines()) == 101
    rows = (out / "histogram.csv").read_text().splitlines()[1:]
    assert sum(int(r.split(",")[2]) for r in rows) == 100


def test_plot_kinds(tmp_path):
    sc = short_scenario(tmp_path, "collision_avoidance", 5)
    assert main(["run", "--scenario", str(sc), "--controller", str(PRE / "collision_avoidance.json"),
                 "--out", str(tmp_path / "r")]) == 0
    svg = tmp_path / "t.svg"
    assert main(["plot", "--input", str(tmp_path / "r" / "trajectory.csv"), "--kind", "trajectory",
                 "--scenario", str(sc), "--out", str(svg)]) == 0
    text = svg.read_text()
    assert text.count("<polyline") == 4 and text.count('class="marker"') == 4


def test_plot_header_only_exit_2(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("bin_lo,bin_hi,count\n")
    assert main(["plot", "--input", str(p), "--kind", "histogram", "--out", str(tmp_path / "h.svg")]) == 2
