"""Regenerate presets/*.json and scenarios/*.json.

The flocking, cohesion and pattern controllers are written as-is. The
collision-avoidance and search controllers are tuned here with BO (seed 0) and
saved with a note saying so.

    python3 scripts/make_presets.py [--root .] [--skip-bo]
"""
import argparse
from pathlib import Path

from swarmctl import config, optimize, presets
from swarmctl.controller import ControllerSpec, with_params


def tuned(scenario, template, budget, seed):
    campaign = optimize.run_bo(scenario, template, budget=budget, seed=seed)
    x, cost = campaign.incumbent
    spec = with_params(template, x)
    note = (f"optimizer output: BO budget {budget}, seed {seed}, evaluation seed {seed}, "
            f"cost {cost!r}")
    print(f"{template.name}: cost {cost}")
    return ControllerSpec(spec.params, spec.scalar_exprs, spec.vector_exprs, spec.vmax,
                          name=template.name, note=note)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--root", default=Path(__file__).resolve().parent.parent, type=Path)
    ap.add_argument("--skip-bo", action="store_true", help="write only the fixed files")
    args = ap.parse_args()
    pdir, sdir = args.root / "presets", args.root / "scenarios"
    pdir.mkdir(exist_ok=True)
    sdir.mkdir(exist_ok=True)

    scenarios = {
        "flocking": presets.flocking_scenario(),
        "cohesion_segregation": presets.cohesion_scenario(),
        "pattern_formation": presets.pattern_scenario(),
        "collision_avoidance": presets.collision_scenario(),
        "search": presets.search_scenario(),
    }
    for name, sc in scenarios.items():
        config.save_scenario(sc, sdir / f"{name}.json")

    config.save_controller(presets.flocking_controller(), pdir / "flocking.json")
    config.save_controller(presets.cohesion_controller(), pdir / "cohesion_segregation.json")
    config.save_controller(presets.pattern_controller(), pdir / "pattern_formation.json")
    config.save_controller(presets.collision_structure(), pdir / "collision_avoidance_template.json")
    config.save_controller(presets.search_structure(), pdir / "search_template.json")
    if args.skip_bo:
        return
    config.save_controller(tuned(scenarios["collision_avoidance"], presets.collision_structure(), 150, 0),
                           pdir / "collision_avoidance.json")
    config.save_controller(tuned(scenarios["search"], presets.search_structure(), 100, 0),
                           pdir / "search.json")


if __name__ == "__main__":
    main()
