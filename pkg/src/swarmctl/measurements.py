"""Per-agent scalar and vector measurements.

Every measurement is computed for all agents at once from a single world
snapshot (see :class:`SensorContext`); the single-agent helpers
:func:`extract_scalar`, :func:`extract_vector` and :func:`build_frame` are thin
views over those columns.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Sequence

import numpy as np

if TYPE_CHECKING:
    from .controller import ControllerSpec
    from .simworld import WorldView
    from .tasks import ScenarioSpec

# Lower bound applied to distances (and to any base raised to a negative power).
SINGULARITY_EPS = 1e-3
# Above this many agents neighbour pairs come from a uniform cell grid.
BRUTE_FORCE_MAX_AGENTS = 200
_UNIT_TOL = 1e-12


class MeasurementError(ValueError):
    """A measurement expression produced a non-finite value."""


class ScalarSource(str, enum.Enum):
    DIST_NEAREST_NEIGHBOR = "dist_nearest_neighbor"
    DIST_ORIGIN = "dist_origin"
    DIST_GOAL = "dist_goal"
    COUNT_SAME_GROUP = "count_same_group"
    COUNT_DIFF_GROUP = "count_diff_group"
    DIST_DIFF_GROUP_CENTROID = "dist_diff_group_centroid"
    RADIAL_GAP_TIMES_ANGLE = "radial_gap_times_angle"
    NEAREST_SEARCH_COUNTER = "nearest_search_counter"
    CONSTANT = "constant"


class VectorSource(str, enum.Enum):
    UNIT_TO_NEAREST_NEIGHBOR = "unit_to_nearest_neighbor"
    UNIT_TO_ORIGIN = "unit_to_origin"
    UNIT_TO_GOAL = "unit_to_goal"
    UNIT_TO_SAME_GROUP_CENTROID = "unit_to_same_group_centroid"
    UNIT_TO_DIFF_GROUP_CENTROID = "unit_to_diff_group_centroid"
    UNIT_AVG_HEADING = "unit_avg_heading"
    CURRENT_VELOCITY = "current_velocity"
    UNIT_TO_NEAREST_SEARCH_LOCATION = "unit_to_nearest_search_location"
    UNIT_TO_COUNTER_WEIGHTED_SEARCH_CENTROID = "unit_to_counter_weighted_search_centroid"


class TransformOp(str, enum.Enum):
    SCALE = "scale"
    POWER = "power"
    OFFSET = "offset"


@dataclass(frozen=True)
class Transform:
    op: TransformOp
    value: float

    def __post_init__(self):
        object.__setattr__(self, "op", TransformOp(self.op))
        if self.op is TransformOp.POWER:
            if float(self.value) != int(self.value):
                raise ValueError(f"power exponent must be an integer, got {self.value!r}")
            object.__setattr__(self, "value", int(self.value))
        else:
            object.__setattr__(self, "value", float(self.value))

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.op is TransformOp.SCALE:
            return x * self.value
        if self.op is TransformOp.OFFSET:
            return x + self.value
        if self.value < 0:
            x = clamp_away_from_zero(x)
        # overflow surfaces as inf and is reported by the caller
        with np.errstate(over="ignore"):
            return np.power(x, float(self.value))


def scale(c: float) -> Transform:
    return Transform(TransformOp.SCALE, c)


def power(k: int) -> Transform:
    return Transform(TransformOp.POWER, k)


def offset(c: float) -> Transform:
    return Transform(TransformOp.OFFSET, c)


@dataclass(frozen=True)
class ScalarExpr:
    source: ScalarSource
    transform: tuple[Transform, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "source", ScalarSource(self.source))
        object.__setattr__(self, "transform", tuple(self.transform))

    def describe(self) -> str:
        steps = ", ".join(f"{t.op.value}({t.value})" for t in self.transform)
        return f"{self.source.value}[{steps}]"


@dataclass(frozen=True)
class VectorExpr:
    source: VectorSource
    rotate_orthogonal: bool = False

    def __post_init__(self):
        object.__setattr__(self, "source", VectorSource(self.source))


@dataclass
class MeasurementFrame:
    scalars: np.ndarray  # (n,)
    vectors: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))  # (m, 2)

    def __post_init__(self):
        self.scalars = np.asarray(self.scalars, dtype=float).reshape(-1)
        self.vectors = np.asarray(self.vectors, dtype=float).reshape(-1, 2)


def clamp_away_from_zero(x: np.ndarray, eps: float = SINGULARITY_EPS) -> np.ndarray:
    """Push values with |x| < eps out to +-eps, keeping the sign (0 goes to +eps)."""
    x = np.asarray(x, dtype=float)
    sign = np.where(x < 0, -1.0, 1.0)
    return np.where(np.abs(x) < eps, sign * eps, x)


def unit_rows(v: np.ndarray) -> np.ndarray:
    """Normalize each row; rows shorter than 1e-12 become the zero vector."""
    v = np.asarray(v, dtype=float)
    norm = np.hypot(v[..., 0], v[..., 1])
    ok = norm > _UNIT_TOL
    out = np.zeros_like(v)
    out[ok] = v[ok] / norm[ok, None]
    return out


def rotate_ccw(v: np.ndarray) -> np.ndarray:
    """(x, y) -> (-y, x)."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def neighbor_pairs(positions: np.ndarray, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Ordered pairs (i, j), i != j, with |p_j - p_i| < radius, sorted by (i, j)."""
    n = len(positions)
    if n <= BRUTE_FORCE_MAX_AGENTS:
        return _brute_pairs(positions, radius)
    return _grid_pairs(positions, radius)


def _brute_pairs(positions, radius):
    off = positions[None, :, :] - positions[:, None, :]
    dist = np.hypot(off[..., 0], off[..., 1])
    mask = dist < radius
    np.fill_diagonal(mask, False)
    i, j = np.nonzero(mask)
    return i, j


def _grid_pairs(positions, radius):
    cells = np.floor(positions / radius).astype(np.int64)
    buckets: dict[tuple[int, int], list[int]] = {}
    for idx, (cx, cy) in enumerate(cells):
        buckets.setdefault((int(cx), int(cy)), []).append(idx)
    buckets_arr = {k: np.asarray(v) for k, v in buckets.items()}
    ii, jj = [], []
    for (cx, cy), members in buckets_arr.items():
        cand = [buckets_arr[(cx + dx, cy + dy)]
                for dx in (-1, 0, 1) for dy in (-1, 0, 1)
                if (cx + dx, cy + dy) in buckets_arr]
        cand = np.concatenate(cand)
        off = positions[cand][None, :, :] - positions[members][:, None, :]
        dist = np.hypot(off[..., 0], off[..., 1])
        mask = (dist < radius) & (members[:, None] != cand[None, :])
        a, b = np.nonzero(mask)
        ii.append(members[a])
        jj.append(cand[b])
    i = np.concatenate(ii) if ii else np.zeros(0, dtype=np.int64)
    j = np.concatenate(jj) if jj else np.zeros(0, dtype=np.int64)
    order = np.lexsort((j, i))
    return i[order], j[order]


class SensorContext:
    """Everything the agents can sense from one immutable snapshot.

    Quantities are computed lazily and cached, so a controller only pays for
    the sources it declares.
    """

    def __init__(self, world: WorldView, scenario: ScenarioSpec):
        self.world = world
        self.scenario = scenario
        self.radius = float(scenario.sensing_radius)
        self.n = len(world.positions)

    @cached_property
    def pairs(self):
        pos = self.world.positions
        i, j = neighbor_pairs(pos, self.radius)
        off = pos[j] - pos[i]
        dist = np.hypot(off[:, 0], off[:, 1])
        return i, j, off, dist

    @cached_property
    def nearest(self):
        """(index, distance, offset) of each agent's nearest in-range neighbour.

        Agents with no neighbour get index -1, the sensing radius as distance,
        and a zero offset. Ties go to the lowest agent index.
        """
        i, j, off, dist = self.pairs
        idx = np.full(self.n, -1, dtype=np.int64)
        d = np.full(self.n, self.radius)
        o = np.zeros((self.n, 2))
        if len(i):
            order = np.lexsort((j, dist, i))
            rows, first = np.unique(i[order], return_index=True)
            pick = order[first]
            idx[rows] = j[pick]
            d[rows] = dist[pick]
            o[rows] = off[pick]
        return idx, np.maximum(d, SINGULARITY_EPS), o

    def _group_mask(self, same: bool):
        i, j, _, _ = self.pairs
        g = self.world.groups
        return (g[i] == g[j]) if same else (g[i] != g[j])

    def count(self, same: bool) -> np.ndarray:
        i = self.pairs[0]
        return np.bincount(i[self._group_mask(same)], minlength=self.n).astype(float)

    def centroid_offset(self, same: bool) -> tuple[np.ndarray, np.ndarray]:
        """Offset from each agent to the centroid of its same/diff-group neighbours."""
        i, j, _, _ = self.pairs
        mask = self._group_mask(same)
        pos = self.world.positions
        cnt = np.bincount(i[mask], minlength=self.n).astype(float)
        sx = np.bincount(i[mask], weights=pos[j[mask], 0], minlength=self.n)
        sy = np.bincount(i[mask], weights=pos[j[mask], 1], minlength=self.n)
        has = cnt > 0
        off = np.zeros((self.n, 2))
        off[has, 0] = sx[has] / cnt[has] - pos[has, 0]
        off[has, 1] = sy[has] / cnt[has] - pos[has, 1]
        return off, has

    @cached_property
    def same_centroid(self):
        return self.centroid_offset(True)

    @cached_property
    def diff_centroid(self):
        return self.centroid_offset(False)

    @cached_property
    def mean_neighbor_velocity(self) -> np.ndarray:
        i, j, _, _ = self.pairs
        vel = self.world.velocities
        cnt = np.bincount(i, minlength=self.n).astype(float)
        vx = np.bincount(i, weights=vel[j, 0], minlength=self.n)
        vy = np.bincount(i, weights=vel[j, 1], minlength=self.n)
        out = np.zeros((self.n, 2))
        has = cnt > 0
        out[has, 0] = vx[has] / cnt[has]
        out[has, 1] = vy[has] / cnt[has]
        return out

    @cached_property
    def search(self):
        """Offsets to every search point, (n_agents, n_points, 2), and distances."""
        grid = self.world.search_grid
        if grid is None or len(grid.points) == 0:
            return None
        off = grid.points[None, :, :] - self.world.positions[:, None, :]
        return off, np.hypot(off[..., 0], off[..., 1])

    @cached_property
    def nearest_search(self):
        if self.search is None:
            return None
        off, dist = self.search
        k = np.argmin(dist, axis=1)
        return k, off[np.arange(self.n), k]

    # -- scalar sources -------------------------------------------------------

    def raw_scalar(self, source: ScalarSource) -> np.ndarray:
        pos = self.world.positions
        S = ScalarSource
        if source is S.CONSTANT:
            return np.ones(self.n)
        if source is S.DIST_NEAREST_NEIGHBOR:
            return self.nearest[1].copy()
        if source is S.DIST_ORIGIN:
            return np.hypot(pos[:, 0], pos[:, 1])
        if source is S.DIST_GOAL:
            off = self.world.goal_offsets()
            return np.hypot(off[:, 0], off[:, 1])
        if source is S.COUNT_SAME_GROUP:
            return self.count(True)
        if source is S.COUNT_DIFF_GROUP:
            return self.count(False)
        if source is S.DIST_DIFF_GROUP_CENTROID:
            off, has = self.diff_centroid
            d = np.where(has, np.hypot(off[:, 0], off[:, 1]), self.radius)
            return np.maximum(d, SINGULARITY_EPS)
        if source is S.RADIAL_GAP_TIMES_ANGLE:
            return self._radial_gap_times_angle()
        if source is S.NEAREST_SEARCH_COUNTER:
            if self.nearest_search is None:
                return np.zeros(self.n)
            return self.world.search_grid.counters[self.nearest_search[0]].astype(float)
        raise ValueError(f"unknown scalar source {source!r}")

    def _radial_gap_times_angle(self) -> np.ndarray:
        idx, _, _ = self.nearest
        pos = self.world.positions
        has = idx >= 0
        out = np.zeros(self.n)
        if not has.any():
            return out
        a = pos[has]
        b = pos[idx[has]]
        gap = np.hypot(a[:, 0], a[:, 1]) - np.hypot(b[:, 0], b[:, 1])
        cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
        dot = a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1]
        theta = np.arctan2(cross, dot)
        theta = np.where(theta <= -np.pi, np.pi, theta)
        out[has] = gap * theta
        return out

    # -- vector sources -------------------------------------------------------

    def raw_vector(self, source: VectorSource) -> np.ndarray:
        V = VectorSource
        if source is V.CURRENT_VELOCITY:
            return np.array(self.world.velocities, dtype=float)
        if source is V.UNIT_TO_NEAREST_NEIGHBOR:
            return unit_rows(self.nearest[2])
        if source is V.UNIT_TO_ORIGIN:
            return unit_rows(-self.world.positions)
        if source is V.UNIT_TO_GOAL:
            return unit_rows(self.world.goal_offsets())
        if source is V.UNIT_TO_SAME_GROUP_CENTROID:
            return unit_rows(self.same_centroid[0])
        if source is V.UNIT_TO_DIFF_GROUP_CENTROID:
            return unit_rows(self.diff_centroid[0])
        if source is V.UNIT_AVG_HEADING:
            return unit_rows(self.mean_neighbor_velocity)
        if source is V.UNIT_TO_NEAREST_SEARCH_LOCATION:
            if self.nearest_search is None:
                return np.zeros((self.n, 2))
            return unit_rows(self.nearest_search[1])
        if source is V.UNIT_TO_COUNTER_WEIGHTED_SEARCH_CENTROID:
            return self._weighted_search_direction()
        raise ValueError(f"unknown vector source {source!r}")

    def _weighted_search_direction(self) -> np.ndarray:
        if self.search is None:
            return np.zeros((self.n, 2))
        grid = self.world.search_grid
        _, dist = self.search
        w = np.where(dist < self.radius, grid.counters[None, :], 0.0)
        total = w.sum(axis=1)
        has = total > 0
        centroid = np.zeros((self.n, 2))
        centroid[has] = (w[has] @ grid.points) / total[has, None]
        off = np.where(has[:, None], centroid - self.world.positions, 0.0)
        return unit_rows(off)

    # -- expressions ----------------------------------------------------------

    def scalar_column(self, expr: ScalarExpr) -> np.ndarray:
        x = self.raw_scalar(expr.source)
        for t in expr.transform:
            x = t.apply(x)
        if not np.all(np.isfinite(x)):
            raise MeasurementError(f"non-finite value from scalar expression {expr.describe()}")
        return x

    def vector_column(self, expr: VectorExpr) -> np.ndarray:
        v = self.raw_vector(expr.source)
        return rotate_ccw(v) if expr.rotate_orthogonal else v

    def frames(self, scalar_exprs: Sequence[ScalarExpr],
               vector_exprs: Sequence[VectorExpr]) -> tuple[np.ndarray, np.ndarray]:
        """Scalars (n_agents, n) and vectors (n_agents, m, 2) in declaration order."""
        S = np.empty((self.n, len(scalar_exprs)))
        for k, e in enumerate(scalar_exprs):
            S[:, k] = self.scalar_column(e)
        V = np.empty((self.n, len(vector_exprs), 2))
        for k, e in enumerate(vector_exprs):
            V[:, k, :] = self.vector_column(e)
        return S, V


def extract_scalar(expr: ScalarExpr, agent_index: int, world: WorldView,
                   scenario: ScenarioSpec) -> float:
    _check_index(agent_index, world)
    return float(SensorContext(world, scenario).scalar_column(expr)[agent_index])


def extract_vector(expr: VectorExpr, agent_index: int, world: WorldView,
                   scenario: ScenarioSpec) -> np.ndarray:
    _check_index(agent_index, world)
    return SensorContext(world, scenario).vector_column(expr)[agent_index]


def build_frame(spec: ControllerSpec, agent_index: int, world: WorldView,
                scenario: ScenarioSpec) -> MeasurementFrame:
    _check_index(agent_index, world)
    S, V = SensorContext(world, scenario).frames(spec.scalar_exprs, spec.vector_exprs)
    return MeasurementFrame(S[agent_index], V[agent_index])


def _check_index(agent_index, world):
    if not 0 <= agent_index < len(world.positions):
        raise IndexError(f"agent index {agent_index} out of range for {len(world.positions)} agents")
