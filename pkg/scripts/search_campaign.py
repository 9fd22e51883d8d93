"""Tune the search controller with BO and compare against stationary agents."""
import argparse
from pathlib import Path

import numpy as np

from swarmctl import config, optimize, plotting, presets, simworld
from swarmctl.controller import with_params


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--budget", type=int, default=100)
    ap.add_argument("--out", type=Path, default=Path("out/search"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    sc, tpl = presets.search_scenario(), presets.search_structure()

    baseline = optimize.simulation_objective(sc, tpl, args.seed)(np.zeros(tpl.params.size))
    campaign = optimize.run_bo(sc, tpl, budget=args.budget, seed=args.seed)
    x, cost = campaign.incumbent
    print(f"stationary {baseline:.0f}  BO {cost:.0f}  ratio {cost / baseline:.3f}")

    best = with_params(tpl, x)
    config.save_controller(best, args.out / "best_controller.json")
    traj = simworld.run(sc, best, args.seed)
    (args.out / "trajectory.csv").write_text(traj.to_csv(include_cost=True))
    rows = plotting.read_csv(args.out / "trajectory.csv", ("agent_id", "group", "x", "y"))
    grid = [tuple(p) for p in simworld.make_search_grid(sc).points]
    (args.out / "paths.svg").write_text(plotting.trajectory_svg(rows, grid))


if __name__ == "__main__":
    main()
