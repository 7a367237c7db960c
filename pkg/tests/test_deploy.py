import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from backbone_arm.deploy import (
    BackboneConfig,
    InsufficientRobots,
    UnreachableGoal,
    deploy_backbone,
    place_relays,
    validate_backbone,
    workspace,
)
from backbone_arm.env import Environment, TeamSpec, random_free_point
from backbone_arm.maps import load_map
from backbone_arm.visgraph import build_visibility_graph, polyline_length, shortest_path

ILLUSTRATIVE = load_map("illustrative")


def test_direct_link_uses_no_relays(empty_env, team4):
    cfg = deploy_backbone(empty_env, team4, (3, 2))
    assert cfg.used_count == 0
    np.testing.assert_array_equal(cfg.relay_positions, np.zeros((4, 2)))


def test_empty_map_hand_stepped(empty_env, team4):
    cfg = deploy_backbone(empty_env, team4, (12, 0))
    assert cfg.used_count == 2
    np.testing.assert_array_equal(cfg.relay_positions, [[0, 0], [0, 0], [4.5, 0], [9.0, 0]])
    np.testing.assert_array_equal(cfg.leader_position, [12, 0])


def test_parked_relays_form_prefix(illustrative, team4):
    cfg = deploy_backbone(illustrative, team4, (-8, 2))
    parked = np.hypot(*(cfg.relay_positions - cfg.base).T) <= 1e-9
    k = cfg.n_relays - cfg.used_count
    assert parked[:k].all() and not parked[k:].any()


def test_corner_nodes_become_relays():
    sq = [[5, -0.5], [6, -0.5], [6, 0.5], [5, 0.5]]
    env = Environment((-20, -20, 20, 20), (sq,), (0, 0))
    team = TeamSpec(4, 5.0, 0.5)
    cfg = deploy_backbone(env, team, (12, 0))
    assert validate_backbone(cfg, env, team).passed
    # every bend of the visibility path carries a relay
    g = build_visibility_graph(env, [(0, 0), (12, 0)])
    path = shortest_path(g, (0, 0), (12, 0))
    for corner in path[1:-1]:
        assert np.min(np.hypot(*(cfg.relay_positions - corner).T)) < 1e-12


def test_unreachable_and_insufficient(illustrative):
    team = TeamSpec(1, 5.0, 0.5)
    with pytest.raises(UnreachableGoal):
        deploy_backbone(illustrative, team, (6, 0))  # inside an obstacle
    with pytest.raises(InsufficientRobots):
        deploy_backbone(illustrative, team, (-18, 18))


def test_goal_on_base(empty_env, team4):
    cfg = deploy_backbone(empty_env, team4, (0, 0))
    assert cfg.used_count == 0
    assert validate_backbone(cfg, empty_env, team4).passed


def test_validate_flags_occluded_relay(team4):
    sq = [[2, -1], [3, -1], [3, 1], [2, 1]]
    env = Environment((-20, -20, 20, 20), (sq,), (0, 0))
    cfg = BackboneConfig((0, 0), [[0, 0], [0, 0], [0, 0], [4, 0]], (6, 0))
    report = validate_backbone(cfg, env, team4)
    assert not report.passed
    assert [f.index for f in report.failures] == [4]
    assert not report.failures[0].visible


def test_validate_flags_radius_margin(empty_env, team4):
    cfg = BackboneConfig((0, 0), [[0, 0], [0, 0], [0, 0], [4.51, 0]], (6, 0))
    report = validate_backbone(cfg, empty_env, team4)
    assert [f.index for f in report.failures] == [4]
    assert report.failures[0].margin == pytest.approx(-0.01)


def test_backbone_file_round_trip(empty_env, team4):
    cfg = deploy_backbone(empty_env, team4, (12, 5))
    again = BackboneConfig.loads(cfg.dumps())
    np.testing.assert_array_equal(again.chain, cfg.chain)
    assert again.used_count == cfg.used_count


def test_heterogeneous_radii(illustrative):
    team = TeamSpec(5, (3.0, 4.0, 5.0, 6.0, 7.0, 3.5), 0.5)
    for goal in [(-18, 10), (15, -18), (-3, 17)]:
        cfg = deploy_backbone(illustrative, team, goal)
        assert validate_backbone(cfg, workspace(illustrative, team), team).passed


def test_place_relays_subdivides_long_edges():
    path = np.array([[0.0, 0.0], [20.0, 0.0]])
    relays = place_relays(path, np.full(6, 4.5))
    np.testing.assert_allclose(relays, [[4.5, 0], [9, 0], [13.5, 0], [18, 0]])


@given(st.integers(0, 100_000), st.integers(1, 10), st.sampled_from([0.0, 0.3]))
def test_deploy_always_validates(seed, n, robot_radius):
    team = TeamSpec(n, 5.0, 0.5, robot_radius)
    free = workspace(ILLUSTRATIVE, team)
    goal = random_free_point(free, np.random.default_rng(seed))
    try:
        cfg = deploy_backbone(ILLUSTRATIVE, team, goal, free=free)
    except InsufficientRobots:
        return
    assert validate_backbone(cfg, free, team).passed
    g = build_visibility_graph(free, [free.base_station, goal])
    path = shortest_path(g, free.base_station, goal)
    # every bend carries a relay, and each edge is cut into hops of at most 4.5 m
    edges = np.hypot(*np.diff(path, axis=0).T)
    assert cfg.used_count <= sum(math.ceil(e / 4.5 - 1e-12) for e in edges) - 1
    if len(path) == 2:
        assert cfg.used_count <= math.ceil(polyline_length(path) / 4.5)
    assert cfg.used_count <= n


def test_used_count_monotone_along_path(illustrative):
    team = TeamSpec(10, 5.0, 0.5)
    goal = np.array([-17.0, 17.0])
    g = build_visibility_graph(illustrative, [illustrative.base_station, goal])
    path = shortest_path(g, illustrative.base_station, goal)
    # goals sampled on the final path edge, moving toward the base
    a, b = path[-2], path[-1]
    counts = [deploy_backbone(illustrative, team, a + t * (b - a)).used_count for t in np.linspace(1, 0.05, 12)]
    assert counts == sorted(counts, reverse=True)
