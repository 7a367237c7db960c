"""Arm validity against obstacles extruded along z without bound.

A 3D link meets an infinitely tall prism exactly when its ground projection
meets the polygon, so every check here runs on projected joints only. This
covers configurations that dip below the ground plane as well.
"""
from __future__ import annotations

import math

import numpy as np

from . import _geom
from .env import Environment
from .kinematics import ArmModel, planar_positions, wrap_angle

COLLISION_STEP = 0.05  # rad per joint between checked samples
COLLISION_RES = 0.05  # m of projected joint travel between checked samples


def configs_valid(model: ArmModel, cfgs: np.ndarray, env: Environment) -> np.ndarray:
    """Batched :func:`config_valid` over an (M, n, 2) stack of configurations."""
    cfgs = np.asarray(cfgs, dtype=float).reshape(-1, model.n_joints, 2)
    pos = np.ascontiguousarray(planar_positions(model, cfgs))
    return _geom.chains_valid(pos, *env.tables)


def config_valid(model: ArmModel, cfg: np.ndarray, env: Environment) -> bool:
    """True iff every projected joint is free and every projected link is clear."""
    return bool(configs_valid(model, cfg, env)[0])


def first_invalid(model: ArmModel, cfgs: np.ndarray, env: Environment) -> int:
    """Index of the first invalid configuration in a stack (len if none)."""
    pos = np.ascontiguousarray(planar_positions(model, cfgs))
    return int(_geom.first_invalid(pos, *env.tables))


def joint_delta(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``b - a`` with yaw taken along the shorter arc."""
    d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    d[..., 0] = wrap_angle(d[..., 0])
    return d


def sweep_bound(model: ArmModel, delta: np.ndarray) -> float:
    """Upper bound on how far any projected joint travels along a straight
    joint-space move by ``delta``.

    The planar velocity of joint j is bounded by sum_i L_i (|dpitch_i| + |dHeading_i|)
    over i <= j, where the heading change accumulates the yaw changes.
    """
    heading = np.cumsum(np.abs(delta[..., 0]), axis=-1)
    return float((model.link_lengths * (np.abs(delta[..., 1]) + heading)).sum(axis=-1).max())


def n_samples(model: ArmModel, delta: np.ndarray, step: float, res: float | None) -> int:
    n = math.ceil(float(np.abs(delta).max()) / step - 1e-12) if delta.size else 1
    if res:
        n = max(n, math.ceil(sweep_bound(model, delta) / res - 1e-12))
    return max(1, n)


def interpolate(
    a: np.ndarray,
    b: np.ndarray,
    step: float = COLLISION_STEP,
    model: ArmModel | None = None,
    res: float | None = None,
    include_start: bool = True,
) -> np.ndarray:
    """Samples from ``a`` to ``b``, at most ``step`` change per joint angle.

    With a ``model`` and ``res`` the sampling is also fine enough that no
    projected joint moves more than ``res`` meters between samples.
    """
    a = np.asarray(a, dtype=float)
    d = joint_delta(a, b)
    if model is not None and res:
        n = n_samples(model, d, step, res)
    else:
        n = n_samples(None, d, step, None)
    t = np.linspace(0.0, 1.0, n + 1)
    if not include_start:
        t = t[1:]
    out = a[None] + t[:, None, None] * d[None]
    out[..., 0] = wrap_angle(out[..., 0])
    out[-1] = b
    return out


def segment_first_invalid(
    model: ArmModel,
    a: np.ndarray,
    b: np.ndarray,
    env: Environment,
    step: float = COLLISION_STEP,
    res: float | None = COLLISION_RES,
) -> tuple[int, int]:
    """(first invalid sample index, number of samples) along a straight move.

    Uses the same sample grid as :func:`interpolate`; the index equals the
    sample count when the whole move is valid.
    """
    a = np.ascontiguousarray(a, dtype=float)
    d = np.ascontiguousarray(joint_delta(a, b))
    n = n_samples(model, d, step, res)
    bad = _geom.first_invalid_on_segment(a, d, n, model.link_lengths, model.base, *env.tables)
    return int(bad), n + 1


def segment_valid(
    model: ArmModel,
    a: np.ndarray,
    b: np.ndarray,
    env: Environment,
    step: float = COLLISION_STEP,
    res: float | None = COLLISION_RES,
) -> bool:
    """Check a straight joint-space move, endpoints included.

    Samples are spaced by at most ``step`` radians per joint and, when
    ``res`` is set, by at most ``res`` meters of projected joint travel.
    """
    bad, count = segment_first_invalid(model, a, b, env, step, res)
    return bad == count
