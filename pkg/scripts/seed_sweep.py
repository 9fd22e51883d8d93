"""Pass rates of the stochastic checks over many seeds.

    python3 scripts/seed_sweep.py flocking --seeds 0:40
    python3 scripts/seed_sweep.py cohesion --seeds 0:30
    python3 scripts/seed_sweep.py collision --seeds 0:5     # slow: 1000 random trials per seed
    python3 scripts/seed_sweep.py search --seeds 0:10
"""
import argparse

import numpy as np

from swarmctl import optimize, presets, simworld, tasks


def flocking(seed):
    sc = presets.flocking_scenario()
    traj = simworld.run(sc, presets.flocking_controller(), seed)
    order = tasks.alignment_order(traj.states[-1].velocities)
    radius = max(np.hypot(*w.positions.T).max() for w in traj.states)
    iu = np.triu_indices(sc.n_agents, k=1)
    sep = min(tasks.pairwise_distances(w.positions)[iu].min() for w in traj.states[-500:])
    return order > 0.9 and radius <= 60 and sep > 0.1, f"order {order:.3f} radius {radius:.1f} sep {sep:.2f}"


def cohesion(seed):
    sc = presets.cohesion_scenario()
    final = simworld.run(sc, presets.cohesion_controller(), seed).states[-1]
    intra, inter = tasks.group_distances(final.positions, final.groups)
    worst = max(max(intra[a], intra[b]) / d for (a, b), d in inter.items())
    return worst < 0.5, f"worst intra/inter {worst:.3f}"


def collision(seed):
    sc, tpl = presets.collision_scenario(), presets.collision_structure()
    history, _ = optimize.run_random_search(sc, tpl, trials=1000, seed=seed)
    rmin = min(c for _, c in history)
    best = optimize.run_bo(sc, tpl, budget=150, seed=seed).incumbent[1]
    return best < rmin, f"BO {best} random min {rmin}"


def search(seed):
    sc, tpl = presets.search_scenario(), presets.search_structure()
    base = optimize.simulation_objective(sc, tpl, seed)(np.zeros(tpl.params.size))
    best = optimize.run_bo(sc, tpl, budget=100, seed=seed).incumbent[1]
    return best < 0.6 * base, f"ratio {best / base:.3f}"


def main():
    checks = {"flocking": flocking, "cohesion": cohesion, "collision": collision, "search": search}
    ap = argparse.ArgumentParser()
    ap.add_argument("check", choices=sorted(checks))
    ap.add_argument("--seeds", default="0:10", help="start:stop")
    args = ap.parse_args()
    lo, hi = (int(v) for v in args.seeds.split(":"))
    passed = 0
    for seed in range(lo, hi):
        ok, detail = checks[args.check](seed)
        passed += ok
        print(f"seed {seed}: {'pass' if ok else 'FAIL'}  {detail}", flush=True)
    print(f"{passed}/{hi - lo} seeds pass")


if __name__ == "__main__":
    main()
