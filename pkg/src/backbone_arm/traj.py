"""Timed robot trajectories from arm paths, connectivity audits, and the
sequential over-the-backbone baseline used for mission-time comparisons."""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .collide import COLLISION_RES, COLLISION_STEP, interpolate
from .deploy import BackboneConfig, validate_backbone
from .env import EPS, Environment, TeamSpec, links_visible
from .kinematics import ArmModel, planar_positions
from .plan import ArmPath


@dataclass
class RobotTrajectories:
    """Synchronised samples: ``positions[t, r]`` is robot r (relays, then the
    leader) at ``times[t]``."""

    base: np.ndarray
    times: np.ndarray  # (T,)
    positions: np.ndarray  # (T, R, 2)

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def n_robots(self) -> int:
        return self.positions.shape[1]

    def chains(self) -> np.ndarray:
        """(T, R + 1, 2) with the base prepended to every sample."""
        base = np.broadcast_to(self.base, (len(self.times), 1, 2))
        return np.concatenate([base, self.positions], axis=1)

    def start(self) -> BackboneConfig:
        return BackboneConfig(self.base, self.positions[0, :-1], self.positions[0, -1])

    def end(self) -> BackboneConfig:
        return BackboneConfig(self.base, self.positions[-1, :-1], self.positions[-1, -1])

    def to_csv(self, t0: float = 0.0, header: bool = True) -> str:
        cols = ["t"] + [f"{a}{r + 1}" for r in range(self.n_robots) for a in ("x", "y")]
        data = np.column_stack([self.times + t0, self.positions.reshape(len(self.times), -1)])
        buf = io.StringIO()
        np.savetxt(buf, data, delimiter=",", fmt="%.6f", header=",".join(cols) if header else "", comments="")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, base) -> "RobotTrajectories":
        lines = text.strip().splitlines()
        if len(lines) < 2:
            raise ValueError("trajectory file has no samples")
        data = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
        return cls(np.asarray(base, dtype=float), data[:, 0], data[:, 1:].reshape(len(data), -1, 2))


def to_robot_trajectories(
    path: ArmPath | np.ndarray,
    model: ArmModel,
    v_max: float = 0.5,
    dt: float = 0.1,
    step: float = COLLISION_STEP,
    res: float | None = COLLISION_RES,
) -> RobotTrajectories:
    """Time-parameterise an arm path.

    All robots reach each (densified) waypoint together; each leg lasts as
    long as its slowest robot needs at ``v_max``. The result is resampled on
    a uniform ``dt`` grid, with a final sample at the exact end time.
    """
    wp = np.asarray(getattr(path, "waypoints", path), dtype=float)
    if len(wp) > 1:
        parts = [wp[:1]] + [
            interpolate(a, b, step, model, res)[1:] for a, b in zip(wp[:-1], wp[1:])
        ]
        wp = np.concatenate(parts)
    pos = planar_positions(model, wp)[:, 1:]  # (S, R, 2)
    if len(pos) == 1:
        return RobotTrajectories(model.base.copy(), np.zeros(1), pos.copy())
    seg = np.linalg.norm(np.diff(pos, axis=0), axis=-1).max(axis=1) / v_max
    # re-yawing vertical joints moves nobody; drop those zero-length steps
    step_ok = seg > 1e-12
    last = pos[-1].copy()
    pos = pos[np.concatenate([[True], step_ok])]
    pos[-1] = last
    t = np.concatenate([[0.0], np.cumsum(seg[step_ok])])
    total = float(t[-1])
    if total == 0:
        return RobotTrajectories(model.base.copy(), np.zeros(1), pos[:1].copy())
    grid = dt * np.arange(int(np.floor(total / dt + 1e-9)) + 1)
    if total - grid[-1] > 1e-9:
        grid = np.append(grid, total)
    else:
        grid[-1] = total
    flat = pos.reshape(len(pos), -1)
    out = np.column_stack([np.interp(grid, t, flat[:, c]) for c in range(flat.shape[1])])
    return RobotTrajectories(model.base.copy(), grid, out.reshape(len(grid), -1, 2))


@dataclass
class ConnectivityReport:
    times: np.ndarray
    distances: np.ndarray  # (T, K) per chain link
    visible: np.ndarray  # (T, K)
    radii: np.ndarray  # (K,)

    @property
    def radius_violations(self) -> np.ndarray:
        return self.distances > self.radii + EPS

    @property
    def violations(self) -> int:
        return int((self.radius_violations | ~self.visible).sum())

    @property
    def max_distance(self) -> np.ndarray:
        """Per-link maximum over time."""
        return self.distances.max(axis=0)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_csv(self, t0: float = 0.0) -> str:
        k = self.distances.shape[1]
        cols = ["t"] + [f"d{i + 1}" for i in range(k)] + [f"los{i + 1}" for i in range(k)]
        data = np.column_stack([self.times + t0, self.distances, self.visible.astype(float)])
        buf = io.StringIO()
        np.savetxt(buf, data, delimiter=",", fmt=["%.6f"] * (k + 1) + ["%d"] * k, header=",".join(cols), comments="")
        return buf.getvalue()


def validate_connectivity(tr: RobotTrajectories, env: Environment, team: TeamSpec) -> ConnectivityReport:
    """Distance and line of sight of every chain link at every sample.

    Radius violations count against the full communication radius; the
    safety gap is the planner's margin, not part of the link model.
    """
    chains = tr.chains()
    a, b = chains[:, :-1], chains[:, 1:]
    dist = np.linalg.norm(b - a, axis=-1)
    vis = links_visible(a.reshape(-1, 2), b.reshape(-1, 2), env).reshape(dist.shape)
    return ConnectivityReport(tr.times.copy(), dist, vis, np.asarray(team.comm_radius))


# ---------------------------------------------------------------- baseline


def _dedup(chain: np.ndarray) -> np.ndarray:
    keep = [chain[0]]
    for p in chain[1:]:
        if np.hypot(*(p - keep[-1])) > EPS:
            keep.append(p)
    return np.array(keep)


def _arc_positions(chain: np.ndarray) -> np.ndarray:
    """Arc length along the chain polyline at each robot (base excluded)."""
    return np.cumsum(np.linalg.norm(np.diff(chain, axis=0), axis=1))


def shared_prefix_length(a: np.ndarray, b: np.ndarray) -> float:
    """Length of the longest common initial stretch of two polylines."""
    a, b = _dedup(a), _dedup(b)
    if np.hypot(*(a[0] - b[0])) > EPS:
        return 0.0
    ia = ib = 1
    cur = a[0].copy()
    total = 0.0
    while ia < len(a) and ib < len(b):
        va, vb = a[ia] - cur, b[ib] - cur
        la, lb = np.hypot(*va), np.hypot(*vb)
        ua, ub = va / la, vb / lb
        if abs(ua[0] * ub[1] - ua[1] * ub[0]) > 1e-9 or ua @ ub < 0:
            break
        step = min(la, lb)
        cur = cur + ua * step
        total += step
        if la - step <= EPS:
            ia += 1
        if lb - step <= EPS:
            ib += 1
    return total


def baseline_routes(start: BackboneConfig, goal: BackboneConfig) -> np.ndarray:
    """Per-robot travel when robots hop one at a time along the backbones.

    A robot walks back along the old backbone to where it departs from the
    new one, then out along the new backbone to its slot.
    """
    if np.hypot(*(start.base - goal.base)) > EPS:
        raise ValueError("backbones must share the base")
    ca, cb = start.chain, goal.chain
    sa, sb = _arc_positions(ca), _arc_positions(cb)
    lam = shared_prefix_length(ca, cb)
    return (
        np.maximum(sa - lam, 0)
        + np.maximum(sb - lam, 0)
        + np.abs(np.minimum(sa, lam) - np.minimum(sb, lam))
    )


def baseline_over_backbone(
    start_cfg: BackboneConfig,
    goal_cfg: BackboneConfig,
    env: Environment,
    team: TeamSpec,
    v_max: float = 0.5,
) -> float:
    """Mission time of the sequential baseline: one robot moves at a time."""
    for name, cfg in (("start", start_cfg), ("goal", goal_cfg)):
        if not validate_backbone(cfg, env, team).passed:
            raise ValueError(f"{name} backbone is not valid")
    return float(baseline_routes(start_cfg, goal_cfg).sum() / v_max)
