"""Run the three hand-tuned behaviours and report their metrics and SVG paths."""
import argparse
import json
from pathlib import Path

from swarmctl import plotting, presets, simworld, tasks

CASES = {
    "flocking": (presets.flocking_scenario, presets.flocking_controller),
    "cohesion_segregation": (presets.cohesion_scenario, presets.cohesion_controller),
    "pattern_formation": (presets.pattern_scenario, presets.pattern_controller),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("out/behaviors"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, (make_sc, make_ctrl) in CASES.items():
        sc = make_sc()
        traj = simworld.run(sc, make_ctrl(), args.seed)
        metrics = tasks.behavior_metrics(traj, sc)
        print(name, json.dumps(metrics))
        csv_path = args.out / f"{name}.csv"
        csv_path.write_text(traj.to_csv())
        rows = plotting.read_csv(csv_path, ("agent_id", "group", "x", "y"))
        (args.out / f"{name}.svg").write_text(plotting.trajectory_svg(rows))


if __name__ == "__main__":
    main()
