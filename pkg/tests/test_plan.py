import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from backbone_arm.collide import config_valid, interpolate, segment_valid
from backbone_arm.deploy import BackboneConfig, deploy_backbone
from backbone_arm.env import Environment, TeamSpec
from backbone_arm.kinematics import ArmModel, inverse_kinematics, planar_positions, random_config
from backbone_arm.plan import (
    ArmPath,
    InvalidEndpoint,
    PlannerParams,
    PlanningError,
    align_free_yaw,
    path_cost,
    plan,
    reduce_dof,
    retract_path,
)
from conftest import square
from oracles import fk_rotations

FAST = PlannerParams(max_attempts=3, max_iters=600, shortcut_iters=40, rng_seed=7)
WALL_ENV = Environment(
    (-20, -20, 20, 20),
    (square(6, 0, 1.5), [[-4, 4], [4, 4], [4, 6], [-4, 6]], [[-9, -9], [-6, -9], [-6, -2], [-9, -2]]),
    (0, 0),
)


def legs_problem(env, n, g0, g1):
    team = TeamSpec(n, 5.0, 0.5)
    m = ArmModel.from_team(env.base_station, team)
    q0 = inverse_kinematics(m, deploy_backbone(env, team, g0))
    q1 = inverse_kinematics(m, deploy_backbone(env, team, g1))
    return m, q0, q1


def check_path(path: ArmPath, m, q0, q1, env, params=PlannerParams()):
    wp = path.waypoints
    np.testing.assert_allclose(wp[0], q0, atol=1e-9)
    np.testing.assert_allclose(wp[-1], q1, atol=1e-9)
    for a, b in zip(wp[:-1], wp[1:]):
        assert segment_valid(m, a, b, env, params.collision_step, params.collision_res)
    assert path.cost == pytest.approx(path_cost(wp, m))


def test_params_validation():
    for bad in (dict(max_attempts=0), dict(attempt_time_budget=0), dict(goal_bias=1.0), dict(step=0), dict(workers=0)):
        with pytest.raises(ValueError):
            PlannerParams(**bad)
    p = PlannerParams()
    assert (p.attempt_time_budget, p.max_attempts) == (20.0, 200)


def test_start_equals_goal(illustrative):
    m = ArmModel((0, 0), [4.5] * 3)
    path = plan(m, m.vertical(), m.vertical(), illustrative)
    assert len(path) == 1 and path.cost == 0.0


def test_invalid_endpoint_rejected():
    m = ArmModel((0, 0), [9.0])
    bad = np.array([[0.0, 0.0]])  # shadow ends inside the square
    with pytest.raises(InvalidEndpoint):
        plan(m, m.vertical(), bad, WALL_ENV, FAST)
    with pytest.raises(InvalidEndpoint):
        plan(m, m.vertical(), np.zeros((2, 2)), WALL_ENV, FAST)


def test_empty_map_single_robot_near_straight(empty_env):
    m = ArmModel((0, 0), [4.5])
    q0 = inverse_kinematics(m, BackboneConfig((0, 0), np.zeros((0, 2)), (3, 1)))
    q1 = inverse_kinematics(m, BackboneConfig((0, 0), np.zeros((0, 2)), (-2, 3)))
    path = plan(m, q0, q1, empty_env, FAST)
    check_path(path, m, q0, q1, empty_env)
    # oracle: cost of the straight joint-space line, sampled very finely
    straight = path_cost(interpolate(q0, q1, step=1e-4), m)
    assert path.cost <= 1.05 * straight


def test_path_cost_examples():
    m = ArmModel((0, 0), [4.5])
    assert path_cost(m.vertical()[None], m) == 0.0
    q1 = np.array([[0.0, math.acos(3 / 4.5)]])
    assert path_cost(np.stack([m.vertical(), q1]), m) == pytest.approx(3.0, abs=1e-12)


def test_path_cost_against_fk_oracle(rng):
    m = ArmModel((1, -1), [4.5, 3.0, 2.0])
    wp = np.stack([np.column_stack([rng.uniform(-3, 3, 3), rng.uniform(-1.5, 1.5, 3)]) for _ in range(2)])
    pts = [fk_rotations(m.base, m.link_lengths, w)[:, :2] for w in wp]
    expected = np.hypot(*(pts[1] - pts[0]).T).sum()
    assert path_cost(wp, m) == pytest.approx(expected, abs=1e-9)


def test_reduce_dof_examples():
    v = np.array([0.0, math.pi / 2])
    flat = np.array([0.3, 0.2])
    both2 = np.array([v, v, flat, flat])
    assert reduce_dof(both2, both2).tolist() == [True, True, False, False]
    start3 = np.array([v, flat, flat, flat])
    assert reduce_dof(start3, both2).tolist() == [True, False, False, False]
    allv = np.array([v] * 4)
    assert reduce_dof(allv, allv).all()


def test_frozen_prefix_does_not_move(illustrative):
    m, q0, q1 = legs_problem(illustrative, 8, (-3, 3), (3, -7))
    k = int(reduce_dof(q0, q1).sum())
    assert k > 0
    path = plan(m, q0, q1, illustrative, FAST)
    np.testing.assert_array_equal(path.waypoints[:, :k], np.broadcast_to(q0[:k], path.waypoints[:, :k].shape))


def test_retract_path_is_valid(illustrative):
    m, q0, q1 = legs_problem(illustrative, 6, (13, -2), (-8, 11))
    wps = retract_path(q0, q1)
    np.testing.assert_array_equal(wps[0], q0)
    np.testing.assert_array_equal(wps[-1], q1)
    for a, b in zip(wps[:-1], wps[1:]):
        assert segment_valid(m, a, b, illustrative)


def test_cluttered_plan_is_valid_and_deterministic(illustrative):
    m, q0, q1 = legs_problem(illustrative, 6, (13, -2), (-8, 11))
    a = plan(m, q0, q1, illustrative, FAST)
    b = plan(m, q0, q1, illustrative, FAST)
    check_path(a, m, q0, q1, illustrative)
    np.testing.assert_array_equal(a.waypoints, b.waypoints)
    assert a.cost == b.cost and a.solutions >= 1


def test_rrt_only_finds_path(illustrative):
    m, q0, q1 = legs_problem(illustrative, 4, (-8, 2), (12, 8))
    p = PlannerParams(max_attempts=2, max_iters=3000, retract_seed=False, rng_seed=3)
    path = plan(m, q0, q1, illustrative, p)
    check_path(path, m, q0, q1, illustrative)


def test_more_attempts_never_cost_more(illustrative):
    m, q0, q1 = legs_problem(illustrative, 6, (13, -2), (-8, 11))
    few = plan(m, q0, q1, illustrative, PlannerParams(max_attempts=1, max_iters=600, rng_seed=5))
    many = plan(m, q0, q1, illustrative, PlannerParams(max_attempts=4, max_iters=600, rng_seed=5))
    assert many.cost <= few.cost + 1e-9


def test_planning_error_when_nothing_found(illustrative):
    m, q0, q1 = legs_problem(illustrative, 6, (13, -2), (-8, 11))
    p = PlannerParams(max_attempts=1, max_iters=1, max_restarts=0, retract_seed=False)
    with pytest.raises(PlanningError):
        plan(m, q0, q1, illustrative, p)


@pytest.mark.slow
def test_worker_pool_matches_serial(illustrative):
    m, q0, q1 = legs_problem(illustrative, 4, (13, -2), (-8, 11))
    serial = plan(m, q0, q1, illustrative, FAST)
    pooled = plan(m, q0, q1, illustrative, PlannerParams(**{**FAST.__dict__, "workers": 2}))
    np.testing.assert_array_equal(serial.waypoints, pooled.waypoints)


def test_projected_waypoints_stay_connected(illustrative):
    m, q0, q1 = legs_problem(illustrative, 6, (13, -2), (-8, 11))
    path = plan(m, q0, q1, illustrative, FAST)
    pos = planar_positions(m, path.waypoints)
    assert (np.linalg.norm(np.diff(pos, axis=1), axis=-1) <= 4.5 + 1e-9).all()
    assert all(config_valid(m, w, illustrative) for w in path.waypoints[:: max(1, len(path) // 50)])


@given(st.integers(0, 10_000))
def test_free_yaw_alignment_keeps_projection(seed):
    rng = np.random.default_rng(seed)
    m = ArmModel((0, 0), rng.uniform(1, 5, 6))
    cfg = random_config(m, rng)
    ref = random_config(m, rng)
    cfg[rng.random(6) < 0.5, 1] = math.pi / 2
    out = align_free_yaw(cfg, ref)
    np.testing.assert_allclose(planar_positions(m, out), planar_positions(m, cfg), atol=1e-9)
    vertical = np.abs(cfg[:, 1] - math.pi / 2) <= 1e-12
    heading = np.cumsum(out[:, 0])
    ref_heading = np.cumsum(ref[:, 0])
    np.testing.assert_allclose(np.cos(heading - ref_heading)[vertical], 1.0, atol=1e-9)


def test_leader_leaves_base_in_a_straight_line(empty_env):
    m = ArmModel((0, 0), [4.5, 4.5])
    goal = inverse_kinematics(m, BackboneConfig((0, 0), [[0, 0]], (3, 1)))
    path = plan(m, m.vertical(), goal, empty_env, FAST)
    check_path(path, m, m.vertical(), goal, empty_env)
    assert path.cost == pytest.approx(math.hypot(3, 1), abs=1e-9)
