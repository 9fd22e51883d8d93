"""Built-in controller structures and scenarios for the five demo tasks.

The flocking, cohesion/segregation and pattern-formation matrices are fixed
hand-tuned values. The collision-avoidance and search structures
ship with zero matrices here; tuned values live in ``presets/*.json`` and are
produced by the optimizer.
"""
from __future__ import annotations

import numpy as np

from .controller import ControllerSpec
from .measurements import ScalarExpr, ScalarSource as SS, VectorExpr, VectorSource as VS, power, scale
from .tasks import (Placement, ScenarioSpec, SearchGridConfig, Task, collision_cost_terms,
                    search_cost_terms)

FLOCKING_PARAMS = [
    [-50, 0, 0],
    [0, 5, 0],
    [0, 0, 0.5],
    [0, 0, 25],
    [0, 0, 10],
]

COHESION_PARAMS = [
    [-0.3, -0.3, 0, -3, 0, 5.4],
    [0.3, 0, 0, 0, 0, -2.4],
    [0, -0.3, -3, -3, 0, 0.9],
    [0, 0, -9, 0, 0, 1.2],
    [0, 0, 0, 0, 0.03, 0.03],
]

PATTERN_PARAMS = [
    [2.5, -0.5, 0, -2.5],
    [0, 0, 5, 0],
    [0.5, 0, 0, -1],
]


def flocking_controller(map_half_extent: float = 50.0, vmax: float = 2.0) -> ControllerSpec:
    scalars = [
        ScalarExpr(SS.DIST_NEAREST_NEIGHBOR, [power(-3)]),
        ScalarExpr(SS.DIST_ORIGIN, [scale(1.0 / map_half_extent), power(6)]),
        ScalarExpr(SS.CONSTANT),
    ]
    vectors = [
        VectorExpr(VS.UNIT_TO_NEAREST_NEIGHBOR),
        VectorExpr(VS.UNIT_TO_ORIGIN),
        # single-group swarm: same-group centroid is the neighbour centroid
        VectorExpr(VS.UNIT_TO_SAME_GROUP_CENTROID),
        VectorExpr(VS.UNIT_AVG_HEADING),
        VectorExpr(VS.CURRENT_VELOCITY),
    ]
    return ControllerSpec(FLOCKING_PARAMS, scalars, vectors, vmax, name="flocking",
                          note="hand-tuned parameters")


def cohesion_controller(vmax: float = 5.0) -> ControllerSpec:
    scalars = [
        ScalarExpr(SS.COUNT_SAME_GROUP),
        ScalarExpr(SS.COUNT_DIFF_GROUP),
        ScalarExpr(SS.DIST_NEAREST_NEIGHBOR, [power(-2)]),
        ScalarExpr(SS.DIST_DIFF_GROUP_CENTROID, [power(-3)]),
        ScalarExpr(SS.DIST_ORIGIN),
        ScalarExpr(SS.CONSTANT),
    ]
    # Five rows: same-group centroid, its orthogonal, other-group centroid,
    # nearest neighbour, origin. There is no row for the other-group orthogonal.
    vectors = [
        VectorExpr(VS.UNIT_TO_SAME_GROUP_CENTROID),
        VectorExpr(VS.UNIT_TO_SAME_GROUP_CENTROID, rotate_orthogonal=True),
        VectorExpr(VS.UNIT_TO_DIFF_GROUP_CENTROID),
        VectorExpr(VS.UNIT_TO_NEAREST_NEIGHBOR),
        VectorExpr(VS.UNIT_TO_ORIGIN),
    ]
    return ControllerSpec(COHESION_PARAMS, scalars, vectors, vmax, name="cohesion_segregation",
                          note="hand-tuned parameters")


def pattern_controller(vmax: float = 5.0) -> ControllerSpec:
    scalars = [
        ScalarExpr(SS.DIST_NEAREST_NEIGHBOR),
        ScalarExpr(SS.DIST_ORIGIN),
        ScalarExpr(SS.RADIAL_GAP_TIMES_ANGLE),
        ScalarExpr(SS.CONSTANT),
    ]
    vectors = [
        VectorExpr(VS.UNIT_TO_NEAREST_NEIGHBOR),
        VectorExpr(VS.UNIT_TO_NEAREST_NEIGHBOR, rotate_orthogonal=True),
        VectorExpr(VS.UNIT_TO_ORIGIN),
    ]
    return ControllerSpec(PATTERN_PARAMS, scalars, vectors, vmax, name="pattern_formation",
                          note="hand-tuned parameters")


def collision_structure(params=None, vmax: float = 2.0) -> ControllerSpec:
    scalars = [
        ScalarExpr(SS.DIST_GOAL),
        ScalarExpr(SS.DIST_NEAREST_NEIGHBOR, [power(-1)]),
        ScalarExpr(SS.CONSTANT),
    ]
    vectors = [
        VectorExpr(VS.UNIT_TO_NEAREST_NEIGHBOR),
        VectorExpr(VS.UNIT_TO_GOAL),
        VectorExpr(VS.UNIT_TO_NEAREST_NEIGHBOR, rotate_orthogonal=True),
        VectorExpr(VS.UNIT_TO_GOAL, rotate_orthogonal=True),
    ]
    params = np.zeros((4, 3)) if params is None else params
    return ControllerSpec(params, scalars, vectors, vmax, name="collision_avoidance",
                          note="structure template; parameters to be optimized")


def search_structure(params=None, vmax: float = 2.0, counter_max: float = 100.0) -> ControllerSpec:
    scalars = [
        ScalarExpr(SS.NEAREST_SEARCH_COUNTER, [scale(1.0 / counter_max)]),
        ScalarExpr(SS.DIST_NEAREST_NEIGHBOR, [power(-2)]),
        ScalarExpr(SS.CONSTANT),
    ]
    vectors = [
        VectorExpr(VS.UNIT_TO_COUNTER_WEIGHTED_SEARCH_CENTROID),
        VectorExpr(VS.UNIT_TO_NEAREST_NEIGHBOR),
        VectorExpr(VS.CURRENT_VELOCITY),
        VectorExpr(VS.UNIT_TO_ORIGIN),
    ]
    params = np.zeros((4, 3)) if params is None else params
    return ControllerSpec(params, scalars, vectors, vmax, name="search",
                          note="structure template; parameters to be optimized")


def flocking_scenario() -> ScenarioSpec:
    return ScenarioSpec(Task.FLOCKING, n_agents=40, map_half_extent=50.0, sensing_radius=4.0,
                        dt=0.1, horizon_steps=2000, placement=Placement.UNIFORM_DISC, param_bounds=(-60.0, 60.0), name="flocking")


def cohesion_scenario() -> ScenarioSpec:
    return ScenarioSpec(Task.COHESION_SEGREGATION, n_agents=15, groups=3, map_half_extent=50.0,
                        sensing_radius=25.0, dt=0.1, horizon_steps=3000,
                        placement=Placement.UNIFORM_DISC, init_half_extent=12.5,
                        param_bounds=(-60.0, 60.0), name="cohesion_segregation")


def pattern_scenario() -> ScenarioSpec:
    return ScenarioSpec(Task.PATTERN_FORMATION, n_agents=100, map_half_extent=50.0,
                        sensing_radius=10.0, dt=0.1, horizon_steps=2000,
                        placement=Placement.UNIFORM_DISC, init_half_extent=20.0,
                        param_bounds=(-60.0, 60.0), name="pattern_formation")


def collision_scenario() -> ScenarioSpec:
    return ScenarioSpec(Task.COLLISION_AVOIDANCE, n_agents=4, map_half_extent=10.0,
                        sensing_radius=5.0, dt=0.1, horizon_steps=100,
                        cost_terms=tuple(collision_cost_terms()), placement=Placement.ANTIPODAL,
                        ring_radius=5.0, goal_radius=0.5, proximity_threshold=1.0,
                        per_step_cost=True, name="collision_avoidance")


def search_scenario() -> ScenarioSpec:
    return ScenarioSpec(Task.SEARCH, n_agents=5, map_half_extent=10.0, sensing_radius=5.0,
                        dt=0.1, horizon_steps=300, cost_terms=tuple(search_cost_terms()),
                        search_grid=SearchGridConfig(), per_step_cost=True, name="search")
