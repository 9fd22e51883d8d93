"""Scenarios, cost terms and the trajectory cost accumulator."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

if TYPE_CHECKING:
    from .simworld import Trajectory, WorldView


class ScenarioError(ValueError):
    pass


class Task(str, enum.Enum):
    FLOCKING = "flocking"
    COHESION_SEGREGATION = "cohesion_segregation"
    PATTERN_FORMATION = "pattern_formation"
    COLLISION_AVOIDANCE = "collision_avoidance"
    SEARCH = "search"


class Placement(str, enum.Enum):
    UNIFORM = "uniform"
    UNIFORM_DISC = "uniform_disc"
    ANTIPODAL = "antipodal"


@dataclass(frozen=True)
class SearchGridConfig:
    rows: int = 6
    cols: int = 6
    span_fraction: float = 0.6
    counter_max: float = 100.0
    # per second; 10/s at dt=0.1 s is one tick per step
    counter_rate: float = 10.0
    reset_radius: float = 2.0


@dataclass(frozen=True)
class CostTerm:
    name: str
    sign: int
    multiplier: float
    measure: str

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ScenarioError(f"cost term {self.name!r}: sign must be +1 or -1")
        if not self.multiplier >= 0:
            raise ScenarioError(f"cost term {self.name!r}: multiplier must be >= 0")


@dataclass(frozen=True)
class ScenarioSpec:
    task: Task
    n_agents: int
    groups: int = 1
    map_half_extent: float = 50.0
    sensing_radius: float = 4.0
    dt: float = 0.1
    horizon_steps: int = 100
    cost_terms: tuple[CostTerm, ...] = ()
    placement: Placement = Placement.UNIFORM
    init_half_extent: Optional[float] = None
    ring_radius: float = 5.0
    goal_radius: float = 0.5
    proximity_threshold: float = 1.0
    search_grid: Optional[SearchGridConfig] = None
    # cost ticks once per step (True) or is weighted by dt seconds (False)
    per_step_cost: bool = False
    param_bounds: tuple[float, float] = (-10.0, 10.0)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "task", Task(self.task))
        object.__setattr__(self, "placement", Placement(self.placement))
        object.__setattr__(self, "cost_terms", tuple(self.cost_terms))
        object.__setattr__(self, "param_bounds", tuple(float(b) for b in self.param_bounds))
        if self.n_agents < 2:
            raise ScenarioError(f"n_agents must be >= 2, got {self.n_agents}")
        if self.groups < 1:
            raise ScenarioError("groups must be >= 1")
        if not self.sensing_radius > 0:
            raise ScenarioError("sensing_radius must be > 0")
        if not self.dt > 0:
            raise ScenarioError("dt must be > 0")
        if self.horizon_steps < 1:
            raise ScenarioError("horizon_steps must be >= 1")
        lo, hi = self.param_bounds
        if not lo < hi:
            raise ScenarioError(f"param_bounds must satisfy lo < hi, got {self.param_bounds}")

    @property
    def cost_dt(self) -> float:
        return 1.0 if self.per_step_cost else self.dt

    def with_(self, **kw) -> ScenarioSpec:
        return replace(self, **kw)


@dataclass
class CostReport:
    total: float
    per_term: dict[str, float] = field(default_factory=dict)
    per_step: list[float] = field(default_factory=list)


# -- per-step measures --------------------------------------------------------

Measure = Callable[["WorldView", ScenarioSpec], float]
MEASURES: dict[str, Measure] = {}


def register_measure(name: str):
    def deco(fn: Measure) -> Measure:
        MEASURES[name] = fn
        return fn
    return deco


def pairwise_distances(positions: np.ndarray) -> np.ndarray:
    off = positions[None, :, :] - positions[:, None, :]
    return np.hypot(off[..., 0], off[..., 1])


@register_measure("close_pairs")
def close_pairs(world: WorldView, scenario: ScenarioSpec) -> float:
    d = pairwise_distances(world.positions)
    iu = np.triu_indices(len(d), k=1)
    return float(np.count_nonzero(d[iu] < scenario.proximity_threshold))


@register_measure("agents_not_at_goal")
def agents_not_at_goal(world: WorldView, scenario: ScenarioSpec) -> float:
    off = world.goal_offsets()
    dist = np.hypot(off[:, 0], off[:, 1])
    return float(np.count_nonzero(world.has_goal & (dist > scenario.goal_radius)))


@register_measure("search_counter_sum")
def search_counter_sum(world: WorldView, scenario: ScenarioSpec) -> float:
    if world.search_grid is None:
        return 0.0
    return float(np.sum(world.search_grid.counters))


def collision_cost_terms(k_prox: float = 5.0) -> list[CostTerm]:
    return [CostTerm("proximity", +1, k_prox, "close_pairs"),
            CostTerm("not_at_goal", +1, 1.0, "agents_not_at_goal")]


def search_cost_terms() -> list[CostTerm]:
    return [CostTerm("stale_search_locations", +1, 1.0, "search_counter_sum")]


def step_cost_terms(world: WorldView, scenario: ScenarioSpec) -> dict[str, float]:
    """Each term's signed, weighted contribution for one recorded step."""
    out = {}
    for term in scenario.cost_terms:
        try:
            measure = MEASURES[term.measure]
        except KeyError:
            raise ScenarioError(f"unknown cost measure {term.measure!r}") from None
        out[term.name] = term.sign * term.multiplier * measure(world, scenario) * scenario.cost_dt
    return out


def step_cost(world: WorldView, scenario: ScenarioSpec) -> float:
    return math.fsum(step_cost_terms(world, scenario).values())


def accumulate_cost(trajectory: Trajectory, scenario: ScenarioSpec) -> CostReport:
    per_term = {t.name: [] for t in scenario.cost_terms}
    per_step = []
    for world in trajectory.states:
        contrib = step_cost_terms(world, scenario)
        for k, v in contrib.items():
            per_term[k].append(v)
        per_step.append(math.fsum(contrib.values()))
    return CostReport(total=math.fsum(per_step),
                      per_term={k: math.fsum(v) for k, v in per_term.items()},
                      per_step=per_step)


# -- behaviour metrics ---------------------------------------------------------

def alignment_order(velocities: np.ndarray) -> float:
    """|mean unit heading|; stationary agents count as zero vectors."""
    v = np.asarray(velocities, dtype=float)
    if len(v) == 0:
        return 0.0
    speed = np.hypot(v[:, 0], v[:, 1])
    unit = np.zeros_like(v)
    moving = speed > 1e-12
    unit[moving] = v[moving] / speed[moving, None]
    m = unit.mean(axis=0)
    return float(np.hypot(m[0], m[1]))


def group_distances(positions: np.ndarray, groups: np.ndarray):
    """Mean pairwise distance inside each group and between each pair of groups."""
    d = pairwise_distances(positions)
    labels = sorted(int(g) for g in np.unique(groups))
    intra, inter = {}, {}
    for a in labels:
        ia = np.flatnonzero(groups == a)
        if len(ia) > 1:
            block = d[np.ix_(ia, ia)]
            intra[a] = float(block[np.triu_indices(len(ia), k=1)].mean())
        else:
            intra[a] = 0.0
        for b in labels:
            if b > a:
                ib = np.flatnonzero(groups == b)
                inter[(a, b)] = float(d[np.ix_(ia, ib)].mean())
    return intra, inter


def chain_angle_dispersion(positions: np.ndarray, link_radius: float) -> list[float]:
    """Circular spread of polar angle within each chain.

    Chains are connected components of the graph linking agents closer than
    ``link_radius``; the dispersion is 1 - |mean unit bearing| (0 for a
    perfectly radial chain).
    """
    n = len(positions)
    d = pairwise_distances(positions)
    i, j = np.nonzero((d < link_radius) & ~np.eye(n, dtype=bool))
    graph = coo_matrix((np.ones(len(i)), (i, j)), shape=(n, n))
    n_comp, labels = connected_components(graph, directed=False)
    ang = np.arctan2(positions[:, 1], positions[:, 0])
    out = []
    for c in range(n_comp):
        members = labels == c
        if members.sum() < 2:
            continue
        r = np.hypot(np.cos(ang[members]).mean(), np.sin(ang[members]).mean())
        out.append(float(1.0 - r))
    return out


def behavior_metrics(trajectory: Trajectory, scenario: ScenarioSpec) -> dict:
    final = trajectory.states[-1]
    pos, vel, groups = final.positions, final.velocities, final.groups
    h = scenario.map_half_extent
    radii = np.array([np.hypot(w.positions[:, 0], w.positions[:, 1]).max()
                      for w in trajectory.states])
    inside = (np.abs(pos[:, 0]) <= h) & (np.abs(pos[:, 1]) <= h)
    metrics: dict = {
        "alignment_order": alignment_order(vel),
        "fraction_inside_map": float(inside.mean()),
        "max_distance_from_origin": float(radii.max()),
    }
    centroid_dist = []
    for g in np.unique(groups):
        p = pos[groups == g]
        c = p.mean(axis=0)
        centroid_dist.extend(np.hypot(p[:, 0] - c[0], p[:, 1] - c[1]))
    metrics["mean_distance_to_group_centroid"] = float(np.mean(centroid_dist))
    intra, inter = group_distances(pos, groups)
    metrics["intra_group_mean_distance"] = {str(k): v for k, v in intra.items()}
    metrics["inter_group_mean_distance"] = {f"{a}-{b}": v for (a, b), v in inter.items()}
    disp = chain_angle_dispersion(pos, scenario.sensing_radius)
    metrics["chain_count"] = len(disp)
    metrics["chain_angle_dispersion"] = float(np.mean(disp)) if disp else 0.0
    return metrics
