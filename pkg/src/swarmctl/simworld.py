"""Synchronous single-integrator world for holonomic agents."""
from __future__ import annotations

import io
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, TextIO

import numpy as np

from . import tasks
from .controller import ControllerSpec, EvaluationError, evaluate_batch
from .measurements import MeasurementError, SensorContext
from .tasks import Placement, ScenarioSpec


class SimulationError(RuntimeError):
    def __init__(self, message: str, agent_id: Optional[int] = None, step: Optional[int] = None):
        super().__init__(message)
        self.agent_id = agent_id
        self.step = step


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AgentState:
    id: int
    group: int
    position: tuple[float, float]
    velocity: tuple[float, float]
    goal: Optional[tuple[float, float]] = None


@dataclass(frozen=True, eq=False)
class SearchGrid:
    points: np.ndarray  # (K, 2)
    counters: np.ndarray  # (K,)
    counter_max: float
    reset_radius: float
    counter_rate: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen(self.points).reshape(-1, 2))
        object.__setattr__(self, "counters", _frozen(self.counters).reshape(-1))
        if len(self.points) != len(self.counters):
            raise ValueError("search grid needs one counter per point")

    def advanced(self, positions: np.ndarray, dt: float) -> SearchGrid:
        counters = np.minimum(self.counters + dt * self.counter_rate, self.counter_max)
        if len(positions):
            off = self.points[:, None, :] - positions[None, :, :]
            near = (np.hypot(off[..., 0], off[..., 1]) <= self.reset_radius).any(axis=1)
            counters = np.where(near, 0.0, counters)
        return replace(self, counters=counters)


@dataclass(frozen=True, eq=False)
class WorldView:
    """Read-only snapshot; arrays are indexed by agent slot, not agent id."""

    ids: np.ndarray
    groups: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    goals: np.ndarray  # NaN rows where an agent has no goal
    search_grid: Optional[SearchGrid] = None
    step: int = 0
    dt: float = 0.1

    def __post_init__(self):
        n = len(self.positions)
        object.__setattr__(self, "ids", _frozen(self.ids, np.int64))
        object.__setattr__(self, "groups", _frozen(self.groups, np.int64))
        object.__setattr__(self, "positions", _frozen(self.positions).reshape(n, 2))
        object.__setattr__(self, "velocities", _frozen(self.velocities).reshape(n, 2))
        goals = self.goals if self.goals is not None else np.full((n, 2), np.nan)
        object.__setattr__(self, "goals", _frozen(goals).reshape(n, 2))
        if len(set(self.ids.tolist())) != n:
            raise ValueError("agent ids must be unique")

    @property
    def time(self) -> float:
        return self.step * self.dt

    @property
    def has_goal(self) -> np.ndarray:
        return ~np.isnan(self.goals[:, 0])

    def goal_offsets(self) -> np.ndarray:
        """Vector from each agent to its goal; zero for agents without one."""
        off = self.goals - self.positions
        return np.where(self.has_goal[:, None], off, 0.0)

    @property
    def agents(self) -> list[AgentState]:
        out = []
        for k in range(len(self.ids)):
            goal = None if not self.has_goal[k] else (float(self.goals[k, 0]), float(self.goals[k, 1]))
            out.append(AgentState(int(self.ids[k]), int(self.groups[k]),
                                  (float(self.positions[k, 0]), float(self.positions[k, 1])),
                                  (float(self.velocities[k, 0]), float(self.velocities[k, 1])),
                                  goal))
        return out

    @classmethod
    def from_agents(cls, agents: list[AgentState], search_grid=None, step=0, dt=0.1) -> WorldView:
        goals = [a.goal if a.goal is not None else (np.nan, np.nan) for a in agents]
        return cls(ids=[a.id for a in agents], groups=[a.group for a in agents],
                   positions=[a.position for a in agents],
                   velocities=[a.velocity for a in agents],
                   goals=goals, search_grid=search_grid, step=step, dt=dt)


@dataclass
class Trajectory:
    initial: WorldView
    states: list[WorldView] = field(default_factory=list)
    step_costs: list[float] = field(default_factory=list)

    def __len__(self):
        return len(self.states)

    def concat(self, other: Trajectory) -> Trajectory:
        return Trajectory(self.initial, self.states + other.states,
                          self.step_costs + other.step_costs)

    def write_csv(self, out: TextIO, include_cost: bool = False) -> None:
        header = ["step", "time", "agent_id", "group", "x", "y", "vx", "vy"]
        if include_cost:
            header.append("cost")
        out.write(",".join(header) + "\n")
        for k, w in enumerate(self.states):
            tail = [repr(float(self.step_costs[k]))] if include_cost else []
            t = repr(float(w.time))
            for a in range(len(w.ids)):
                row = [str(w.step), t, str(int(w.ids[a])), str(int(w.groups[a])),
                       repr(float(w.positions[a, 0])), repr(float(w.positions[a, 1])),
                       repr(float(w.velocities[a, 0])), repr(float(w.velocities[a, 1]))]
                out.write(",".join(row + tail) + "\n")

    def to_csv(self, include_cost: bool = False) -> str:
        buf = io.StringIO()
        self.write_csv(buf, include_cost)
        return buf.getvalue()


def make_search_grid(scenario: ScenarioSpec) -> Optional[SearchGrid]:
    cfg = scenario.search_grid
    if cfg is None:
        return None
    span = cfg.span_fraction * scenario.map_half_extent
    xs = np.linspace(-span, span, cfg.cols)
    ys = np.linspace(-span, span, cfg.rows)
    gx, gy = np.meshgrid(xs, ys)
    points = np.column_stack([gx.ravel(), gy.ravel()])
    return SearchGrid(points, np.full(len(points), cfg.counter_max),
                      cfg.counter_max, cfg.reset_radius, cfg.counter_rate)


def init_world(scenario: ScenarioSpec, seed: int) -> WorldView:
    n = scenario.n_agents
    if n < 2:
        raise tasks.ScenarioError(f"need at least 2 agents, got {n}")
    rng = np.random.default_rng(seed)
    goals = np.full((n, 2), np.nan)
    if scenario.placement is Placement.ANTIPODAL:
        ang = 2.0 * np.pi * np.arange(n) / n
        pos = scenario.ring_radius * np.column_stack([np.cos(ang), np.sin(ang)])
        goals = -pos
    elif scenario.placement is Placement.UNIFORM_DISC:
        h = scenario.init_half_extent or scenario.map_half_extent
        r = h * np.sqrt(rng.uniform(0.0, 1.0, n))
        a = rng.uniform(0.0, 2.0 * np.pi, n)
        pos = np.column_stack([r * np.cos(a), r * np.sin(a)])
    else:
        h = scenario.init_half_extent or scenario.map_half_extent
        pos = rng.uniform(-h, h, size=(n, 2))
    return WorldView(ids=np.arange(n), groups=np.arange(n) % scenario.groups,
                     positions=pos, velocities=np.zeros((n, 2)), goals=goals,
                     search_grid=make_search_grid(scenario), step=0, dt=scenario.dt)


def control_velocities(world: WorldView, spec: ControllerSpec, scenario: ScenarioSpec) -> np.ndarray:
    """Every agent's commanded velocity, all decided from the same snapshot."""
    ctx = SensorContext(world, scenario)
    try:
        S, V = ctx.frames(spec.scalar_exprs, spec.vector_exprs)
    except MeasurementError as exc:
        raise SimulationError(f"step {world.step}: {exc}", step=world.step) from exc
    vel, coeffs = evaluate_batch(spec, S, V)
    bad = ~(np.isfinite(vel).all(axis=1) & np.isfinite(coeffs).all(axis=1))
    if bad.any():
        agent = int(world.ids[np.flatnonzero(bad)[0]])
        raise SimulationError(f"non-finite control for agent {agent} at step {world.step}",
                              agent_id=agent, step=world.step)
    goal_off = world.goal_offsets()
    at_goal = world.has_goal & (np.hypot(goal_off[:, 0], goal_off[:, 1]) <= scenario.goal_radius)
    vel[at_goal] = 0.0
    return vel


def step(world: WorldView, spec: ControllerSpec, scenario: ScenarioSpec) -> WorldView:
    vel = control_velocities(world, spec, scenario)
    pos = world.positions + vel * scenario.dt
    grid = world.search_grid.advanced(pos, scenario.dt) if world.search_grid is not None else None
    return replace(world, positions=pos, velocities=vel, search_grid=grid,
                   step=world.step + 1, dt=scenario.dt)


def run(scenario: ScenarioSpec, spec: ControllerSpec, seed: int,
        horizon_steps: Optional[int] = None,
        on_step: Optional[Callable[[WorldView], None]] = None) -> Trajectory:
    steps = scenario.horizon_steps if horizon_steps is None else horizon_steps
    if steps < 1:
        raise ValueError("horizon_steps must be >= 1")
    world = init_world(scenario, seed)
    traj = Trajectory(initial=world)
    for _ in range(steps):
        world = step(world, spec, scenario)
        traj.states.append(world)
        traj.step_costs.append(tasks.step_cost(world, scenario))
        if on_step is not None:
            on_step(world)
    return traj
