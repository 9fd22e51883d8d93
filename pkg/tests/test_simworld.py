import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import make_scenario, make_world
from swarmctl import presets, simworld
from swarmctl.controller import ControllerSpec
from swarmctl.measurements import ScalarExpr, ScalarSource as SS, VectorExpr, VectorSource as VS, power
from swarmctl.simworld import SearchGrid, SimulationError, WorldView
from swarmctl.tasks import Placement, ScenarioError, Task


def constant_controller(vx, vy):
    return ControllerSpec([[vx], [vy]], [ScalarExpr(SS.CONSTANT)],
                          [VectorExpr(VS.UNIT_TO_ORIGIN), VectorExpr(VS.UNIT_TO_ORIGIN, True)], 10.0)


def test_same_seed_same_world():
    sc = presets.flocking_scenario()
    a, b = simworld.init_world(sc, 5), simworld.init_world(sc, 5)
    assert np.array_equal(a.positions, b.positions)
    assert not np.array_equal(a.positions, simworld.init_world(sc, 6).positions)


def test_antipodal_ring():
    sc = presets.collision_scenario()
    w = simworld.init_world(sc, 0)
    ang = np.degrees(np.arctan2(w.positions[:, 1], w.positions[:, 0])) % 360
    assert np.allclose(ang, [0, 90, 180, 270])
    assert np.allclose(np.hypot(*w.positions.T), sc.ring_radius)
    assert np.allclose(w.goals, -w.positions)


def test_search_grid_is_6x6():
    sc = presets.search_scenario()
    grid = simworld.init_world(sc, 0).search_grid
    assert grid.points.shape == (36, 2)
    assert len(np.unique(grid.points[:, 0])) == 6 and len(np.unique(grid.points[:, 1])) == 6
    assert np.all(grid.counters == sc.search_grid.counter_max)


def test_disc_placement_stays_in_disc():
    sc = presets.cohesion_scenario()
    w = simworld.init_world(sc, 1)
    assert np.hypot(*w.positions.T).max() <= sc.init_half_extent
    assert sorted(np.bincount(w.groups)) == [5, 5, 5]


def test_euler_step():
    sc = make_scenario(dt=0.1)
    w = make_world([[5, 0], [-5, 0]])
    # unit_to_origin from (5,0) is (-1,0); its rotation is (0,-1)
    nxt = simworld.step(w, constant_controller(1.0, 0.0), sc)
    assert np.allclose(nxt.positions[0], [4.9, 0.0])
    assert np.allclose(nxt.velocities[0], [-1.0, 0.0])
    assert nxt.step == 1 and nxt.time == pytest.approx(0.1)


def test_counter_increment_and_reset():
    grid = SearchGrid([[0, 0], [10, 10]], [0, 37], counter_max=100, reset_radius=2.0, counter_rate=1.0)
    nxt = grid.advanced(np.array([[30.0, 30.0]]), dt=1.0)
    assert np.array_equal(nxt.counters, [1, 38])
    nxt = grid.advanced(np.array([[10.0, 11.5]]), dt=1.0)
    assert np.array_equal(nxt.counters, [1, 0])
    capped = SearchGrid([[0, 0]], [99.5], 100, 2.0, 1.0).advanced(np.array([[9.0, 9.0]]), 1.0)
    assert capped.counters[0] == 100


def test_agents_freeze_at_goal():
    sc = make_scenario(goal_radius=0.5)
    w = make_world([[0.2, 0], [5, 5]], goals=[[0, 0], [np.nan, np.nan]])
    vel = simworld.control_velocities(w, constant_controller(1.0, 0.0), sc)
    assert np.array_equal(vel[0], [0, 0]) and np.linalg.norm(vel[1]) > 0


def test_run_records_horizon_steps():
    sc = presets.collision_scenario()
    traj = simworld.run(sc, presets.collision_structure(), 0)
    assert len(traj) == 100 and len(traj.step_costs) == 100
    one = simworld.run(sc, presets.collision_structure(), 0, horizon_steps=1)
    direct = simworld.step(simworld.init_world(sc, 0), presets.collision_structure(), sc)
    assert np.array_equal(one.states[0].positions, direct.positions)


def test_runs_are_deterministic():
    sc = presets.flocking_scenario().with_(horizon_steps=50)
    a = simworld.run(sc, presets.flocking_controller(), 3).to_csv()
    b = simworld.run(sc, presets.flocking_controller(), 3).to_csv()
    assert a == b


def test_csv_layout():
    sc = presets.collision_scenario().with_(horizon_steps=3)
    text = simworld.run(sc, presets.collision_structure(), 0).to_csv(include_cost=True)
    lines = text.splitlines()
    assert lines[0] == "step,time,agent_id,group,x,y,vx,vy,cost"
    assert len(lines) == 1 + 3 * 4
    assert lines[1].startswith("1,0.1,0,0,5.0,0.0,")


def test_non_finite_control_raises():
    spec = ControllerSpec([[1.0]], [ScalarExpr(SS.DIST_ORIGIN, [power(400)])],
                          [VectorExpr(VS.UNIT_TO_ORIGIN)], 1.0)
    with pytest.raises(SimulationError):
        simworld.step(make_world([[10, 0], [-10, 0]]), spec, make_scenario())


def test_single_agent_rejected():
    with pytest.raises(ScenarioError):
        make_scenario(n_agents=1)


def test_world_view_is_read_only():
    w = make_world([[0, 0], [1, 1]])
    with pytest.raises(ValueError):
        w.positions[0, 0] = 3.0
    assert w.agents[1].position == (1.0, 1.0)
    assert WorldView.from_agents(w.agents).positions.tolist() == w.positions.tolist()


def test_concat_appends_states():
    sc = presets.collision_scenario().with_(horizon_steps=4)
    a = simworld.run(sc, presets.collision_structure(), 0)
    assert len(a.concat(a)) == 8


@settings(max_examples=25, deadline=None)
@given(arrays(float, (6, 2), elements=st.floats(-10, 10)), st.permutations(range(6)))
def test_relabeling_agents_permutes_the_step(pos, perm):
    # a controller without tie-sensitive sources commutes with agent relabeling
    spec = ControllerSpec([[1.0, -0.5], [0.3, 0.0], [0.0, 2.0]],
                          [ScalarExpr(SS.CONSTANT), ScalarExpr(SS.COUNT_SAME_GROUP)],
                          [VectorExpr(VS.UNIT_TO_ORIGIN), VectorExpr(VS.UNIT_TO_SAME_GROUP_CENTROID),
                           VectorExpr(VS.UNIT_AVG_HEADING, True)], 3.0)
    sc = make_scenario(n_agents=6, sensing_radius=6.0)
    vel = np.cos(pos)
    groups = np.arange(6) % 2
    perm = np.array(perm)
    a = simworld.step(make_world(pos, vel, groups), spec, sc)
    b = simworld.step(make_world(pos[perm], vel[perm], groups[perm]), spec, sc)
    assert np.allclose(a.positions[perm], b.positions, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_speed_limit_holds_along_trajectories(seed):
    sc = presets.flocking_scenario().with_(horizon_steps=20, n_agents=10)
    traj = simworld.run(sc, presets.flocking_controller(), seed)
    for w in traj.states:
        assert np.hypot(*w.velocities.T).max() <= presets.flocking_controller().vmax + 1e-9


def test_placements_exist():
    assert {p.value for p in Placement} == {"uniform", "uniform_disc", "antipodal"}
    assert Task("search") is Task.SEARCH
