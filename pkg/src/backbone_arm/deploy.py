"""Target backbone computation: relay placement along a visibility path."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from .env import EPS, Environment, TeamSpec, dilate_obstacles, line_of_sight, point_in_free_space
from .visgraph import NoPathError, build_visibility_graph, shortest_path

DILATION_SIDES = 16


class InfeasibleGoal(ValueError):
    """The leader goal cannot be served by the team."""


class UnreachableGoal(InfeasibleGoal):
    pass


class InsufficientRobots(InfeasibleGoal):
    pass


@dataclass
class BackboneConfig:
    """Positions of the base, relays 1..N (base to leader order) and leader."""

    base: np.ndarray
    relay_positions: np.ndarray
    leader_position: np.ndarray

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=float).reshape(2)
        self.relay_positions = np.asarray(self.relay_positions, dtype=float).reshape(-1, 2)
        self.leader_position = np.asarray(self.leader_position, dtype=float).reshape(2)

    @property
    def n_relays(self) -> int:
        return len(self.relay_positions)

    @property
    def chain(self) -> np.ndarray:
        """(N + 2, 2) array: base, relays, leader."""
        return np.vstack([self.base, self.relay_positions, self.leader_position])

    @property
    def robots(self) -> np.ndarray:
        """(N + 1, 2) array: relays then leader."""
        return self.chain[1:]

    @property
    def used_count(self) -> int:
        parked = np.hypot(*(self.relay_positions - self.base).T) <= EPS
        return int((~parked).sum())

    def to_dict(self) -> dict:
        return {
            "base": self.base.tolist(),
            "relays": self.relay_positions.tolist(),
            "leader": self.leader_position.tolist(),
            "used_count": self.used_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BackboneConfig":
        relays = data.get("relays") or []
        return cls(data["base"], np.asarray(relays, dtype=float).reshape(-1, 2), data["leader"])

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), default_flow_style=None, sort_keys=False)

    @classmethod
    def loads(cls, text: str) -> "BackboneConfig":
        return cls.from_dict(yaml.safe_load(text))

    @classmethod
    def parked(cls, base, n_relays: int, leader=None) -> "BackboneConfig":
        base = np.asarray(base, dtype=float)
        return cls(base, np.tile(base, (n_relays, 1)), base if leader is None else leader)


def workspace(env: Environment, team: TeamSpec) -> Environment:
    """The environment as seen by robot centres (obstacles grown by the footprint)."""
    return dilate_obstacles(env, team.robot_radius, DILATION_SIDES)


def _greedy_walk(path: np.ndarray, hops: np.ndarray) -> list[np.ndarray] | None:
    """Walk ``path`` from the base, inserting relays whenever the next node is
    out of range. ``hops[k]`` is the reach of the k-th link from the base.
    Returns the relay list, or None when more than ``len(hops) - 1`` are needed.
    """
    ref = path[0]
    relays: list[np.ndarray] = []
    for j, node in enumerate(path[1:], start=1):
        while True:
            k = len(relays)
            if k >= len(hops):
                return None
            d = float(np.hypot(*(node - ref)))
            if d <= hops[k]:
                break
            ref = ref + (node - ref) / d * hops[k]
            relays.append(ref)
        if j < len(path) - 1:
            if len(relays) >= len(hops) - 1:
                return None
            relays.append(node.copy())
            ref = node
    if len(relays) > len(hops) - 1:
        return None
    return relays


def place_relays(path: np.ndarray, link_lengths: np.ndarray) -> list[np.ndarray]:
    """Relay positions (base to leader) along ``path`` for a chain of links.

    Used relays occupy the highest indices, so the link from the base to the
    first used relay is ``link_lengths[N - m]`` when ``m`` relays are used.
    The smallest self-consistent ``m`` is taken; if none exists the walk is
    redone with the shortest link everywhere.
    """
    L = np.asarray(link_lengths, dtype=float)
    n = len(L) - 1
    for m in range(n + 1):
        relays = _greedy_walk(path, L[n - m:])
        if relays is not None and len(relays) == m:
            return relays
    relays = _greedy_walk(path, np.full(n + 1, L.min()))
    if relays is None:
        raise InsufficientRobots(f"goal needs more than {n} relays")
    return relays


def deploy_backbone(env: Environment, team: TeamSpec, leader_goal, *, free: Environment | None = None) -> BackboneConfig:
    """Target backbone for ``leader_goal``.

    ``free`` is the dilated workspace; it is computed from ``env`` and
    ``team.robot_radius`` when omitted.
    """
    free = workspace(env, team) if free is None else free
    goal = np.asarray(leader_goal, dtype=float)
    base = free.base_station
    if not point_in_free_space(goal, free):
        raise UnreachableGoal(f"goal ({goal[0]:g}, {goal[1]:g}) is not in free space")
    if np.hypot(*(goal - base)) <= EPS:
        path = np.array([base, goal])
    else:
        g = build_visibility_graph(free, [base, goal])
        try:
            path = shortest_path(g, base, goal)
        except NoPathError as exc:
            raise UnreachableGoal(f"no visibility path to ({goal[0]:g}, {goal[1]:g})") from exc
    relays = place_relays(path, team.link_lengths)
    n = team.n_relays
    positions = np.tile(base, (n, 1))
    if relays:
        positions[n - len(relays):] = np.array(relays)
    return BackboneConfig(base, positions, goal)


@dataclass
class LinkCheck:
    index: int
    distance: float
    margin: float
    visible: bool

    @property
    def ok(self) -> bool:
        return self.visible and self.margin >= -EPS


@dataclass
class BackboneReport:
    links: list[LinkCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(link.ok for link in self.links)

    @property
    def failures(self) -> list[LinkCheck]:
        return [link for link in self.links if not link.ok]


def validate_backbone(cfg: BackboneConfig, env: Environment, team: TeamSpec) -> BackboneReport:
    """Check every chain link against ``c_i - delta`` and line of sight."""
    chain = cfg.chain
    if len(chain) - 1 != len(team.link_lengths):
        raise ValueError("backbone size does not match the team")
    report = BackboneReport()
    for i, (a, b) in enumerate(zip(chain[:-1], chain[1:])):
        d = float(np.hypot(*(b - a)))
        report.links.append(
            LinkCheck(i + 1, d, float(team.link_lengths[i]) - d, line_of_sight(a, b, env))
        )
    return report
