"""Virtual serial arm whose joint projections are the robot positions.

Each robot is a 2-DOF universal joint (yaw, pitch). Yaw accumulates along the
chain; pitch is elevation above the ground plane and does not propagate into
later joint frames. Consequently link ``i`` projects onto the ground with
length ``L_i * cos(pitch_i)``, which can never exceed ``L_i``.

Arm configurations are ``(n_joints, 2)`` arrays of ``(yaw, pitch)`` pairs;
functions accept a leading batch dimension where noted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .deploy import BackboneConfig
from .env import TeamSpec

PITCH_LIMITS = (-math.pi / 2, math.pi / 2)
YAW_LIMITS = (-math.pi, math.pi)
IK_TOL = 1e-9


class DisconnectedTarget(ValueError):
    pass


@dataclass(frozen=True)
class ArmModel:
    base: np.ndarray
    link_lengths: np.ndarray

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float).reshape(2)
        links = np.asarray(self.link_lengths, dtype=float).reshape(-1)
        if len(links) == 0 or (links <= 0).any():
            raise ValueError("link lengths must be positive")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "link_lengths", links)

    @classmethod
    def from_team(cls, base, team: TeamSpec) -> "ArmModel":
        return cls(base, team.link_lengths)

    @property
    def n_joints(self) -> int:
        return len(self.link_lengths)

    @property
    def height(self) -> float:
        """Arm height in the full-vertical pose."""
        return float(self.link_lengths.sum())

    def vertical(self) -> np.ndarray:
        cfg = np.zeros((self.n_joints, 2))
        cfg[:, 1] = math.pi / 2
        return cfg


def wrap_angle(a):
    """Map angles into (-pi, pi]."""
    w = np.mod(np.asarray(a, dtype=float) + math.pi, 2 * math.pi) - math.pi
    return np.where(w <= -math.pi, w + 2 * math.pi, w)


def within_limits(cfg: np.ndarray, tol: float = 1e-9) -> bool:
    cfg = np.asarray(cfg)
    yaw, pitch = cfg[..., 0], cfg[..., 1]
    return bool(
        (pitch >= PITCH_LIMITS[0] - tol).all()
        and (pitch <= PITCH_LIMITS[1] + tol).all()
        and (yaw > YAW_LIMITS[0] - tol).all()
        and (yaw <= YAW_LIMITS[1] + tol).all()
    )


def forward_kinematics(model: ArmModel, cfg: np.ndarray) -> np.ndarray:
    """Joint positions ``p_1 .. p_n`` in 3D; batched over leading axes."""
    cfg = np.asarray(cfg, dtype=float)
    yaw = np.cumsum(cfg[..., 0], axis=-1)
    pitch = cfg[..., 1]
    L = model.link_lengths
    c = np.cos(pitch) * L
    steps = np.stack([c * np.cos(yaw), c * np.sin(yaw), np.sin(pitch) * L], axis=-1)
    pts = np.cumsum(steps, axis=-2)
    pts[..., :2] += model.base
    return pts


def planar_positions(model: ArmModel, cfg: np.ndarray) -> np.ndarray:
    """Projected joint positions including the base, shape (..., n+1, 2)."""
    pts = forward_kinematics(model, cfg)[..., :2]
    base = np.broadcast_to(model.base, pts.shape[:-2] + (1, 2))
    return np.concatenate([base, pts], axis=-2)


def project(points3d: np.ndarray, base) -> BackboneConfig:
    """Drop z; the last joint is the leader and the rest are relays."""
    pts = np.asarray(points3d, dtype=float)
    return BackboneConfig(np.asarray(base, dtype=float), pts[:-1, :2].copy(), pts[-1, :2].copy())


def inverse_kinematics(model: ArmModel, target: BackboneConfig) -> np.ndarray:
    """Closed-form joint angles whose projection reproduces ``target``.

    Works joint by joint in the frame of the previous projected joint:
    ``pitch = arccos(d / L)`` (always the upward solution) and
    ``yaw = atan2(y, x)`` relative to the accumulated yaw, with yaw 0 when
    the robot sits on top of its predecessor.
    """
    chain = target.chain
    if len(chain) - 1 != model.n_joints:
        raise ValueError(
            f"backbone has {len(chain) - 1} robots but the arm has {model.n_joints} joints"
        )
    cfg = np.zeros((model.n_joints, 2))
    heading = 0.0
    for i in range(model.n_joints):
        dx, dy = chain[i + 1] - chain[i]
        # rotate into the previous joint's frame
        c, s = math.cos(heading), math.sin(heading)
        x, y = c * dx + s * dy, -s * dx + c * dy
        d = math.hypot(x, y)
        L = model.link_lengths[i]
        if d > L + IK_TOL:
            raise DisconnectedTarget(f"link {i + 1}: distance {d:.6g} exceeds {L:.6g}")
        if d <= IK_TOL * 1e-3:
            yaw, pitch = 0.0, math.pi / 2
        else:
            yaw = float(wrap_angle(math.atan2(y, x)))
            pitch = math.acos(min(d / L, 1.0))
        cfg[i] = yaw, pitch
        heading += yaw
    return cfg


def link_distances(model: ArmModel, cfg: np.ndarray) -> np.ndarray:
    pos = planar_positions(model, cfg)
    return np.linalg.norm(np.diff(pos, axis=-2), axis=-1)


def random_config(model: ArmModel, rng: np.random.Generator, size=None) -> np.ndarray:
    shape = (() if size is None else (size,)) + (model.n_joints,)
    yaw = wrap_angle(rng.uniform(-math.pi, math.pi, shape))
    pitch = rng.uniform(*PITCH_LIMITS, shape)
    return np.stack([yaw, pitch], axis=-1)
