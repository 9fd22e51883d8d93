"""``swarmctl`` command line: run, optimize, montecarlo, plot.

Exit codes: 0 success, 2 bad input (config, CSV or arguments), 3 simulation error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, config, optimize, plotting, simworld, tasks
from .controller import with_params

EXIT_OK, EXIT_INPUT, EXIT_SIM = 0, 2, 3


class UsageError(ValueError):
    pass


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def _manifest(command: str, **fields) -> str:
    return config.dumps({"tool": "swarmctl", "version": __version__, "command": command, **fields})


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


def cmd_run(args) -> int:
    scenario = config.load_scenario(args.scenario)
    spec = config.load_controller(args.controller)
    if args.horizon is not None:
        if args.horizon < 1:
            raise UsageError("--horizon must be >= 1")
        scenario = scenario.with_(horizon_steps=args.horizon)
    out = _out_dir(args.out)
    traj = simworld.run(scenario, spec, args.seed)
    has_cost = bool(scenario.cost_terms)
    _write(out / "trajectory.csv", traj.to_csv(include_cost=has_cost))
    if has_cost:
        report = tasks.accumulate_cost(traj, scenario)
        _write(out / "cost_report.json", config.dumps(
            {"total": report.total, "per_term": report.per_term}))
        _write(out / "cost_per_step.csv", "step,cost\n" + "".join(
            f"{k + 1},{c!r}\n" for k, c in enumerate(report.per_step)))
    _write(out / "metrics.json", config.dumps(tasks.behavior_metrics(traj, scenario)))
    _write(out / "manifest.json", _manifest(
        "run", seed=args.seed, scenario_path=str(args.scenario), controller_path=str(args.controller),
        scenario=config.scenario_to_dict(scenario), controller=config.controller_to_dict(spec)))
    return EXIT_OK


def cmd_optimize(args) -> int:
    if args.n_init < 2 or args.budget <= args.n_init:
        raise UsageError(f"--budget ({args.budget}) must exceed --n-init ({args.n_init}), "
                         "and --n-init must be at least 2")
    scenario = config.load_scenario(args.scenario)
    template = config.load_controller(args.controller)
    out = _out_dir(args.out)
    campaign = optimize.run_bo(scenario, template, budget=args.budget, n_init=args.n_init,
                               seed=args.seed)
    best_x, best_cost = campaign.incumbent
    best = with_params(template, best_x)
    best = type(best)(best.params, best.scalar_exprs, best.vector_exprs, best.vmax,
                      name=template.name,
                      note=f"found by Bayesian optimization (seed {args.seed}, budget {args.budget}, "
                           f"evaluation seed {campaign.eval_seed}, cost {best_cost!r})")
    _write(out / "campaign_log.csv", campaign.log_csv())
    config.save_controller(best, out / "best_controller.json")
    _write(out / "manifest.json", _manifest(
        "optimize", seed=args.seed, eval_seed=campaign.eval_seed, budget=args.budget,
        n_init=args.n_init, incumbent_cost=best_cost, length_scale=campaign.length_scale,
        scenario_path=str(args.scenario), controller_path=str(args.controller),
        scenario=config.scenario_to_dict(scenario), controller=config.controller_to_dict(template)))
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    scenario = config.load_scenario(args.scenario)
    template = config.load_controller(args.controller)
    out = _out_dir(args.out)
    history, hist = optimize.run_random_search(scenario, template, trials=args.trials,
                                               seed=args.seed, n_bins=args.bins)
    _write(out / "trial_costs.csv", optimize.costs_csv(history))
    _write(out / "histogram.csv", optimize.histogram_csv(hist))
    costs = [c for _, c in history]
    _write(out / "manifest.json", _manifest(
        "montecarlo", seed=args.seed, trials=args.trials, bins=args.bins,
        min_cost=float(np.min(costs)), scenario_path=str(args.scenario),
        controller_path=str(args.controller), scenario=config.scenario_to_dict(scenario),
        controller=config.controller_to_dict(template)))
    return EXIT_OK


def cmd_plot(args) -> int:
    required, render = plotting.PLOT_KINDS[args.kind]
    rows = plotting.read_csv(args.input, required)
    if args.kind == "trajectory":
        markers = []
        if args.scenario:
            world = simworld.init_world(config.load_scenario(args.scenario), 0)
            markers += [tuple(g) for g in world.goals[world.has_goal]]
            if world.search_grid is not None:
                markers += [tuple(p) for p in world.search_grid.points]
        svg = render(rows, markers)
    elif args.kind == "histogram":
        svg = render(rows, args.star)
    else:
        svg = render(rows)
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True)
    _write(out, svg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swarmctl", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"swarmctl {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario with a controller")
    r.add_argument("--scenario", required=True)
    r.add_argument("--controller", required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--horizon", type=int, default=None, help="override the scenario horizon (steps)")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_run)

    o = sub.add_parser("optimize", help="tune controller parameters with Bayesian optimization")
    o.add_argument("--scenario", required=True)
    o.add_argument("--controller", required=True, help="controller template (structure)")
    o.add_argument("--budget", type=int, default=150)
    o.add_argument("--n-init", type=int, default=20)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--out", required=True)
    o.set_defaults(func=cmd_optimize)

    m = sub.add_parser("montecarlo", help="random-parameter baseline with cost histogram")
    m.add_argument("--scenario", required=True)
    m.add_argument("--controller", required=True)
    m.add_argument("--trials", type=int, default=1000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--bins", type=int, default=40)
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_montecarlo)

    g = sub.add_parser("plot", help="render a CSV artifact as SVG")
    g.add_argument("--input", required=True)
    g.add_argument("--kind", required=True, choices=sorted(plotting.PLOT_KINDS))
    g.add_argument("--out", required=True)
    g.add_argument("--star", type=float, default=None, help="histogram: mark this cost with a star")
    g.add_argument("--scenario", default=None, help="trajectory: draw goals / search grid")
    g.set_defaults(func=cmd_plot)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (config.ConfigError, plotting.PlotInputError, UsageError, tasks.ScenarioError) as exc:
        print(f"swarmctl: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except simworld.SimulationError as exc:
        print(f"swarmctl: simulation error: {exc}", file=sys.stderr)
        return EXIT_SIM


if __name__ == "__main__":
    sys.exit(main())
