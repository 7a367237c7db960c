"""Joint-space planning for the virtual arm.

A bidirectional RRT (connect variant) grows trees from the start and goal
configurations over the joints that actually move, paths are shortened by
random shortcuts, and the cheapest of several seeded attempts is returned.
Attempts are grouped in batches: a batch runs up to ``max_attempts``
attempts within ``attempt_time_budget`` seconds, and an empty batch is
restarted up to ``max_restarts`` times.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .collide import (
    COLLISION_RES,
    COLLISION_STEP,
    config_valid,
    interpolate,
    joint_delta,
    segment_first_invalid,
    segment_valid,
)
from .env import Environment
from .kinematics import PITCH_LIMITS, ArmModel, planar_positions, wrap_angle

VERTICAL_TOL = 1e-6


class PlanningError(RuntimeError):
    """No path was found within the attempt and time budget."""


class InvalidEndpoint(ValueError):
    pass


@dataclass(frozen=True)
class PlannerParams:
    attempt_time_budget: float = 20.0
    max_attempts: int = 200
    rng_seed: int = 0
    step: float = 0.3
    goal_bias: float = 0.05
    shortcut_iters: int = 100
    collision_step: float = COLLISION_STEP
    collision_res: float | None = COLLISION_RES
    max_iters: int = 3000
    max_restarts: int = 2
    workers: int = 1
    retract_seed: bool = True

    def __post_init__(self):
        if self.attempt_time_budget <= 0 or self.max_attempts <= 0 or self.max_iters <= 0:
            raise ValueError("budgets and counts must be positive")
        if self.step <= 0 or self.collision_step <= 0 or self.shortcut_iters < 0:
            raise ValueError("steps must be positive")
        if not 0 <= self.goal_bias < 1:
            raise ValueError("goal_bias must lie in [0, 1)")
        if self.workers < 1 or self.max_restarts < 0:
            raise ValueError("workers >= 1 and max_restarts >= 0 required")


@dataclass
class ArmPath:
    waypoints: np.ndarray  # (W, n, 2)
    cost: float
    attempts: int = 0
    solutions: int = 0

    def __len__(self):
        return len(self.waypoints)


def path_cost(waypoints: np.ndarray, model: ArmModel) -> float:
    """Total projected travel: sum over robots of their waypoint polyline lengths."""
    wp = np.asarray(getattr(waypoints, "waypoints", waypoints), dtype=float)
    if len(wp) < 2:
        return 0.0
    pos = planar_positions(model, wp)[:, 1:]
    return float(np.linalg.norm(np.diff(pos, axis=0), axis=-1).sum())


def reduce_dof(start: np.ndarray, goal: np.ndarray) -> np.ndarray:
    """Mask of joints frozen during planning: the longest prefix that is
    vertical in both configurations."""
    vert = (np.abs(start[:, 1] - math.pi / 2) <= VERTICAL_TOL) & (
        np.abs(goal[:, 1] - math.pi / 2) <= VERTICAL_TOL
    )
    k = len(vert) if vert.all() else int(np.argmin(vert))
    mask = np.zeros(len(vert), dtype=bool)
    mask[:k] = True
    return mask


def _frozen_count(start: np.ndarray, goal: np.ndarray) -> int:
    mask = reduce_dof(start, goal)
    # a frozen joint also has to agree in yaw, or later frames would differ
    same_yaw = np.abs(wrap_angle(goal[:, 0] - start[:, 0])) <= 1e-9
    k = 0
    while k < len(mask) and mask[k] and same_yaw[k]:
        k += 1
    return k


class _Problem:
    """Full-configuration helpers for planning over joints ``k..n-1``."""

    def __init__(self, model, start, goal, env, params):
        self.model, self.env, self.params = model, env, params
        self.start, self.goal = start, goal
        self.k = _frozen_count(start, goal)

    def full(self, x: np.ndarray) -> np.ndarray:
        """Reduced (..., m, 2) to full (..., n, 2)."""
        out = np.broadcast_to(self.start, x.shape[:-2] + self.start.shape).copy()
        out[..., self.k:, :] = x
        return out

    def samples(self, a, b):
        p = self.params
        return interpolate(self.full(a), self.full(b), p.collision_step, self.model, p.collision_res)

    def valid_prefix(self, a, b) -> tuple[int, int]:
        p = self.params
        return segment_first_invalid(
            self.model, self.full(a), self.full(b), self.env, p.collision_step, p.collision_res
        )

    def seg_ok(self, a, b) -> bool:
        p = self.params
        return segment_valid(self.model, a, b, self.env, p.collision_step, p.collision_res)

    def seg_cost(self, a, b) -> float:
        p = self.params
        return path_cost(interpolate(a, b, p.collision_step, self.model, p.collision_res), self.model)


class _Tree:
    def __init__(self, root: np.ndarray):
        self.nodes = np.empty((64,) + root.shape)
        self.parent = np.empty(64, dtype=np.int64)
        self.nodes[0] = root
        self.parent[0] = -1
        self.n = 1

    def add(self, x, parent) -> int:
        if self.n == len(self.nodes):
            self.nodes = np.concatenate([self.nodes, np.empty_like(self.nodes)])
            self.parent = np.concatenate([self.parent, np.empty_like(self.parent)])
        self.nodes[self.n] = x
        self.parent[self.n] = parent
        self.n += 1
        return self.n - 1

    def nearest(self, x) -> int:
        d = joint_delta(self.nodes[: self.n], x)
        return int(np.argmin((d * d).sum(axis=(1, 2))))

    def branch(self, i) -> list[np.ndarray]:
        out = []
        while i >= 0:
            out.append(self.nodes[i])
            i = self.parent[i]
        return out


def _steer(a, b, step):
    d = joint_delta(a, b)
    dist = math.sqrt(float((d * d).sum()))
    if dist <= step:
        return b.copy(), True
    x = a + d * (step / dist)
    x[:, 0] = wrap_angle(x[:, 0])
    return x, False


def _grow(prob: _Problem, tree: _Tree, target: np.ndarray, greedy: bool) -> tuple[int, bool]:
    """Extend ``tree`` toward ``target``; with ``greedy`` keep going until
    blocked. Returns (index of last added node or -1, reached)."""
    i = tree.nearest(target)
    a = tree.nodes[i]
    if greedy:
        b, reached = target, True
    else:
        b, reached = _steer(a, target, prob.params.step)
    bad, count = prob.valid_prefix(a, b)
    if bad == count:
        last_ok = count - 1
    else:
        reached = False
        last_ok = bad - 1
    if last_ok <= 0:
        return -1, False
    # reduced coordinates of the valid samples
    red = prob.samples(a, b)[: last_ok + 1, prob.k:]
    # keep a node every `step` of joint-space distance plus the final one
    d = joint_delta(red[:-1], red[1:])
    arc = np.concatenate([[0.0], np.cumsum(np.sqrt((d * d).sum(axis=(1, 2))))])
    marks = np.floor(arc / prob.params.step + 1e-12).astype(int)
    keep = list(np.nonzero(np.diff(marks))[0] + 1)
    if not keep or keep[-1] != last_ok:
        keep.append(last_ok)
    parent = i
    for j in keep:
        x = b.copy() if (reached and j == last_ok) else red[j]
        parent = tree.add(x, parent)
    return parent, reached


def _rrt_connect(prob: _Problem, rng: np.random.Generator, deadline: float) -> list[np.ndarray] | None:
    k, n = prob.k, prob.model.n_joints
    xs, xg = prob.start[k:].copy(), prob.goal[k:].copy()
    ta, tb = _Tree(xs), _Tree(xg)
    a_is_start = True
    for it in range(prob.params.max_iters):
        if it % 32 == 0 and time.perf_counter() > deadline:
            return None
        if rng.random() < prob.params.goal_bias:
            target = tb.nodes[0].copy()
        else:
            target = np.stack(
                [rng.uniform(-math.pi, math.pi, n - k), rng.uniform(*PITCH_LIMITS, n - k)], axis=-1
            )
        ia, _ = _grow(prob, ta, target, greedy=False)
        if ia >= 0:
            ib, reached = _grow(prob, tb, ta.nodes[ia], greedy=True)
            if reached:
                side_a = ta.branch(ia)[::-1]
                side_b = tb.branch(ib)[1:]
                path = side_a + side_b
                return path if a_is_start else path[::-1]
        ta, tb = tb, ta
        a_is_start = not a_is_start
    return None


def _shortcut(prob: _Problem, path: list[np.ndarray], rng: np.random.Generator) -> tuple[list[np.ndarray], list[float]]:
    full = [prob.full(x) for x in path]
    costs = [prob.seg_cost(a, b) for a, b in zip(full[:-1], full[1:])]
    for _ in range(prob.params.shortcut_iters):
        if len(full) < 3:
            break
        i, j = sorted(rng.choice(len(full), 2, replace=False))
        if j - i < 2:
            continue
        c = prob.seg_cost(full[i], full[j])
        if c < sum(costs[i:j]) - 1e-12 and prob.seg_ok(full[i], full[j]):
            full = full[: i + 1] + full[j:]
            costs = costs[:i] + [c] + costs[j:]
    return full, costs


def _densify(prob: _Problem, full: list[np.ndarray]) -> np.ndarray:
    if len(full) == 1:
        return full[0][None].copy()
    parts = [full[0][None]]
    for a, b in zip(full[:-1], full[1:]):
        parts.append(prob.samples(a[prob.k:], b[prob.k:])[1:])
    out = np.concatenate(parts)
    out[0], out[-1] = prob.start, prob.goal
    return out


def retract_path(start: np.ndarray, goal: np.ndarray) -> list[np.ndarray]:
    """Fold-and-unfold waypoints from ``start`` to ``goal``.

    Joints beyond the common prefix are raised to vertical from the leader
    end backwards (each robot slides along its own link toward its
    predecessor), re-yawed while vertical (which leaves the projection
    unchanged), then lowered to their goal pitch from the base outwards
    (each robot slides along its goal link). Every intermediate backbone
    lies on links of either endpoint, so the path is valid whenever both
    endpoints are.
    """
    n = len(start)
    same = np.abs(joint_delta(start, goal)).max(axis=1) <= 1e-9
    j = n if same.all() else int(np.argmin(same))
    cur = start.copy()
    out = [cur.copy()]
    for k in range(n - 1, j - 1, -1):
        up = math.copysign(math.pi / 2, cur[k, 1])
        if abs(cur[k, 1] - up) > 1e-12:
            cur[k, 1] = up
            out.append(cur.copy())
    if np.abs(joint_delta(cur[j:, 0], goal[j:, 0])).max(initial=0) > 1e-12:
        cur[j:, 0] = goal[j:, 0]
        out.append(cur.copy())
    for k in range(j, n):
        if abs(cur[k, 1] - goal[k, 1]) > 1e-12:
            cur[k, 1] = goal[k, 1]
            out.append(cur.copy())
    out[-1] = goal.copy()
    return out


def _retract_candidate(prob: _Problem) -> np.ndarray | None:
    full = retract_path(prob.start, prob.goal)
    if not all(prob.seg_ok(a, b) for a, b in zip(full[:-1], full[1:])):
        return None
    rng = np.random.default_rng(np.random.SeedSequence([prob.params.rng_seed, 2**31]))
    full, _ = _shortcut(prob, [x[prob.k:] for x in full], rng)
    return _densify(prob, full)


def _attempt(prob: _Problem, seed, deadline: float) -> np.ndarray | None:
    rng = np.random.default_rng(seed)
    raw = _rrt_connect(prob, rng, deadline)
    if raw is None:
        return None
    full = [prob.full(x) for x in raw]
    # tree edges were checked on their parents' sample grid; recheck on their own
    if not all(prob.seg_ok(a, b) for a, b in zip(full[:-1], full[1:])):
        return None
    full, _ = _shortcut(prob, [x[prob.k:] for x in full], rng)
    return _densify(prob, full)


def _run_attempt(args):
    model, start, goal, env, params, seed, deadline = args
    prob = _Problem(model, start, goal, env, params)
    return _attempt(prob, seed, deadline)


def align_free_yaw(cfg: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Re-yaw the exactly vertical joints of ``cfg`` to the headings of ``ref``.

    A vertical link has no planar extent, so its yaw is free: changing it
    and compensating the next joint's yaw leaves every projected position
    unchanged. Matching headings turns a lowering or raising link into a
    straight radial move instead of a spiral.
    """
    out = np.array(cfg, dtype=float)
    ref_heading = np.cumsum(ref[:, 0])
    heading = 0.0
    for k in range(len(out)):
        if abs(out[k, 1] - math.pi / 2) <= 1e-12:
            new = float(wrap_angle(ref_heading[k] - heading))
            if k + 1 < len(out):
                out[k + 1, 0] = float(wrap_angle(out[k + 1, 0] + out[k, 0] - new))
            out[k, 0] = new
        heading += out[k, 0]
    return out


def plan(model: ArmModel, start: np.ndarray, goal: np.ndarray, env: Environment, params: PlannerParams = PlannerParams()) -> ArmPath:
    """Least-cost path found over the attempt batches.

    Free yaws of vertical joints are first aligned between the endpoints
    (see :func:`align_free_yaw`); those re-yaw moves appear as the first and
    last waypoint steps and do not move any robot.

    Results depend only on the seed as long as no wall-clock deadline is hit;
    with several workers the attempts are identical to the serial run, so the
    returned path is too.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    for name, cfg in (("start", start), ("goal", goal)):
        if cfg.shape != (model.n_joints, 2):
            raise InvalidEndpoint(f"{name} has shape {cfg.shape}, expected {(model.n_joints, 2)}")
        if not config_valid(model, cfg, env):
            raise InvalidEndpoint(f"{name} configuration is in collision")
    if np.abs(joint_delta(start, goal)).max() <= 1e-9:
        return ArmPath(start[None].copy(), 0.0)
    s1 = align_free_yaw(start, goal)
    g1 = align_free_yaw(goal, s1)
    path = _plan_between(model, s1, g1, env, params)
    wp = path.waypoints
    if np.abs(joint_delta(start, s1)).max() > 0:
        wp = np.concatenate([start[None], wp])
    if np.abs(joint_delta(goal, g1)).max() > 0:
        wp = np.concatenate([wp, goal[None]])
    return ArmPath(wp, path_cost(wp, model), path.attempts, path.solutions)


def _plan_between(model, start, goal, env, params) -> ArmPath:
    if np.abs(joint_delta(start, goal)).max() <= 1e-9:
        return ArmPath(start[None].copy(), 0.0)
    prob = _Problem(model, start, goal, env, params)
    if prob.seg_ok(start, goal):
        wp = _densify(prob, [start, goal])
        return ArmPath(wp, path_cost(wp, model), attempts=0, solutions=1)

    attempts = solutions = 0
    seeded = _retract_candidate(prob) if params.retract_seed else None
    for batch in range(params.max_restarts + 1):
        seeds = np.random.SeedSequence([params.rng_seed, batch]).spawn(params.max_attempts)
        deadline = time.perf_counter() + params.attempt_time_budget
        results = []
        if params.workers > 1:
            jobs = [(model, start, goal, env, params, s, deadline) for s in seeds]
            with ProcessPoolExecutor(params.workers) as pool:
                results = list(pool.map(_run_attempt, jobs))
        else:
            for s in seeds:
                if time.perf_counter() > deadline:
                    break
                results.append(_attempt(prob, s, deadline))
        attempts += len(results)
        best = None
        if seeded is not None:
            best = (path_cost(seeded, model), seeded)
            solutions += batch == 0
        for wp in results:
            if wp is None:
                continue
            solutions += 1
            c = path_cost(wp, model)
            if best is None or c < best[0]:
                best = (c, wp)
        if best is not None:
            return ArmPath(best[1], best[0], attempts=attempts, solutions=solutions)
    raise PlanningError(f"no path after {attempts} attempts")
