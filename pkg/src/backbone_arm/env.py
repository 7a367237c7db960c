"""Planar workspace: obstacles, dilation and the line-of-sight link model.

Obstacles are simple polygons stored counter-clockwise. Contact with an
obstacle boundary is treated as a collision (and as an occlusion) in every
predicate below, so results stay conservative under floating-point noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml
from shapely.geometry import MultiPolygon, Polygon
from shapely.ops import unary_union

from . import _geom

EPS = 1e-9


class InvalidEnvironment(ValueError):
    """Raised when an environment file or object violates its invariants."""


def _signed_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _is_simple(poly: np.ndarray) -> bool:
    return Polygon(poly).is_valid


@dataclass(frozen=True)
class Environment:
    """Planar workspace.

    Parameters
    ----------
    bounds : (xmin, ymin, xmax, ymax) in meters.
    obstacles : list of (k, 2) arrays, counter-clockwise, k >= 3.
    base_station : 2D point.
    """

    bounds: tuple[float, float, float, float]
    obstacles: tuple[np.ndarray, ...]
    base_station: np.ndarray
    _edges: np.ndarray = field(init=False, repr=False, compare=False)
    _tables: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        xmin, ymin, xmax, ymax = (float(b) for b in self.bounds)
        if not (xmax > xmin and ymax > ymin):
            raise InvalidEnvironment(f"degenerate bounds {self.bounds}")
        object.__setattr__(self, "bounds", (xmin, ymin, xmax, ymax))
        polys = []
        for i, ob in enumerate(self.obstacles):
            arr = np.asarray(ob, dtype=float).reshape(-1, 2)
            if len(arr) >= 2 and np.allclose(arr[0], arr[-1]):
                arr = arr[:-1]
            if len(arr) < 3:
                raise InvalidEnvironment(f"obstacle {i} has fewer than 3 vertices")
            if not _is_simple(arr) or abs(_signed_area(arr)) < EPS:
                raise InvalidEnvironment(f"obstacle {i} is not a simple polygon")
            if _signed_area(arr) < 0:
                arr = arr[::-1].copy()
            arr.setflags(write=False)
            polys.append(arr)
        object.__setattr__(self, "obstacles", tuple(polys))
        base = np.asarray(self.base_station, dtype=float).reshape(2)
        base.setflags(write=False)
        object.__setattr__(self, "base_station", base)
        if polys:
            edges = np.concatenate(
                [np.stack([p, np.roll(p, -1, axis=0)], axis=1) for p in polys]
            )
        else:
            edges = np.zeros((0, 2, 2))
        edges.setflags(write=False)
        object.__setattr__(self, "_edges", edges)
        offsets = np.concatenate([[0], np.cumsum([len(p) for p in polys])]).astype(np.int64)
        boxes = np.array(
            [[*p.min(axis=0), *p.max(axis=0)] for p in polys], dtype=float
        ).reshape(-1, 4)
        tables = (
            np.array([xmin, ymin, xmax, ymax]),
            np.ascontiguousarray(edges.reshape(-1, 4)),
            offsets,
            boxes,
        )
        object.__setattr__(self, "_tables", tables)
        if not point_in_free_space(base, self):
            raise InvalidEnvironment("base station is not in free space")

    @property
    def edges(self) -> np.ndarray:
        """All obstacle edges as an (E, 2, 2) array."""
        return self._edges

    @property
    def tables(self) -> tuple:
        """(bounds, edge table, polygon offsets, polygon boxes) for the kernels."""
        return self._tables

    @property
    def width(self) -> float:
        return self.bounds[2] - self.bounds[0]

    @property
    def height(self) -> float:
        return self.bounds[3] - self.bounds[1]


@dataclass(frozen=True)
class TeamSpec:
    """Relay team: ``n_relays`` robots plus the leader.

    ``comm_radius`` holds one radius per chain link (length ``n_relays + 1``);
    a scalar is broadcast. The last entry is the leader's link to relay N.
    """

    n_relays: int
    comm_radius: tuple[float, ...] | float = 5.0
    safety_gap: float = 0.5
    robot_radius: float = 0.0

    def __post_init__(self):
        if self.n_relays < 0:
            raise ValueError("n_relays must be >= 0")
        radii = self.comm_radius
        if np.isscalar(radii):
            radii = (float(radii),) * (self.n_relays + 1)
        radii = tuple(float(r) for r in radii)
        if len(radii) != self.n_relays + 1:
            raise ValueError(
                f"expected {self.n_relays + 1} radii, got {len(radii)}"
            )
        if min(radii) <= 0:
            raise ValueError("communication radii must be positive")
        if not 0 < self.safety_gap < min(radii):
            raise ValueError("safety gap must lie in (0, min radius)")
        if self.robot_radius < 0:
            raise ValueError("robot radius must be >= 0")
        object.__setattr__(self, "comm_radius", radii)

    @property
    def link_lengths(self) -> np.ndarray:
        return np.asarray(self.comm_radius) - self.safety_gap


# ---------------------------------------------------------------- file I/O


def environment_from_dict(data: dict) -> Environment:
    try:
        bounds = tuple(float(v) for v in data["bounds"])
        obstacles = [np.asarray(o, dtype=float) for o in data.get("obstacles") or []]
        base = np.asarray(data["base"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidEnvironment(f"malformed environment: {exc}") from exc
    if len(bounds) != 4 or base.shape != (2,):
        raise InvalidEnvironment("bounds needs 4 numbers and base 2")
    for i, ob in enumerate(obstacles):
        if ob.ndim != 2 or ob.shape[1] != 2:
            raise InvalidEnvironment(f"obstacle {i} must be a list of [x, y] pairs")
    return Environment(bounds, tuple(obstacles), base)


def load_environment(text: str) -> Environment:
    """Parse an environment document (YAML, so JSON works too)."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InvalidEnvironment(f"parse error: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidEnvironment("environment document must be a mapping")
    return environment_from_dict(data)


def read_environment(path: str | Path) -> Environment:
    return load_environment(Path(path).read_text())


def dump_environment(env: Environment) -> str:
    data = {
        "bounds": list(env.bounds),
        "base": env.base_station.tolist(),
        "obstacles": [ob.tolist() for ob in env.obstacles],
    }
    return yaml.safe_dump(data, default_flow_style=None, sort_keys=False)


# ------------------------------------------------------------- predicates


def points_free(points: np.ndarray, env: Environment) -> np.ndarray:
    """Vectorised :func:`point_in_free_space` over an (M, 2) array."""
    pts = np.ascontiguousarray(np.asarray(points, dtype=float).reshape(-1, 2))
    return _geom.points_free_batch(pts, *env.tables)


def point_in_free_space(p, env: Environment) -> bool:
    """True iff ``p`` is inside the bounds and strictly outside every obstacle."""
    x, y = (float(v) for v in np.asarray(p, dtype=float).reshape(2))
    return bool(_geom.point_free(x, y, *env.tables))


def line_of_sight(p, q, env: Environment) -> bool:
    """Mutual visibility of two points; grazing an obstacle counts as blocked."""
    px, py = (float(v) for v in np.asarray(p, dtype=float).reshape(2))
    qx, qy = (float(v) for v in np.asarray(q, dtype=float).reshape(2))
    t = env.tables
    return bool(
        _geom.point_free(px, py, *t)
        and _geom.point_free(qx, qy, *t)
        and _geom.segment_clear(px, py, qx, qy, *t[1:])
    )


def links_visible(p: np.ndarray, q: np.ndarray, env: Environment) -> np.ndarray:
    """Vectorised :func:`line_of_sight` over paired (S, 2) arrays."""
    p = np.ascontiguousarray(np.asarray(p, dtype=float).reshape(-1, 2))
    q = np.ascontiguousarray(np.asarray(q, dtype=float).reshape(-1, 2))
    return _geom.visible_batch(p, q, *env.tables)


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


# --------------------------------------------------------------- dilation


def disk_polygon(radius: float, k: int = 16) -> np.ndarray:
    """Regular k-gon circumscribed about a disk of ``radius``.

    Facet normals sit at multiples of 2*pi/k, so for k divisible by 4 the
    polygon has axis-aligned facets.
    """
    r = radius / math.cos(math.pi / k)
    ang = (2 * np.arange(k) + 1) * math.pi / k
    return np.column_stack([r * np.cos(ang), r * np.sin(ang)])


def minkowski_disk(poly: np.ndarray, radius: float, k: int = 16) -> Polygon:
    """Minkowski sum of a simple polygon with the circumscribed disk k-gon.

    Built as the union of the polygon with the convex hull of every edge
    swept by the k-gon; exact for non-convex inputs.
    """
    disk = disk_polygon(radius, k)
    pieces = [Polygon(poly)]
    for a, b in zip(poly, np.roll(poly, -1, axis=0)):
        pieces.append(Polygon(np.vstack([a + disk, b + disk])).convex_hull)
    return unary_union(pieces)


def _clean_ring(coords: np.ndarray) -> np.ndarray:
    ring = np.asarray(coords, dtype=float)[:-1]
    keep = []
    n = len(ring)
    for i in range(n):
        a, b, c = ring[i - 1], ring[i], ring[(i + 1) % n]
        if abs(_orient(*a, *b, *c)) > 1e-12 and np.hypot(*(b - a)) > 1e-12:
            keep.append(b)
    out = np.array(keep)
    if _signed_area(out) < 0:
        out = out[::-1]
    return out


def dilate_obstacles(env: Environment, radius: float, k: int = 16) -> Environment:
    """Grow obstacles by ``radius`` and shrink the bounds by the same amount.

    Overlapping grown obstacles are merged. Holes enclosed by a merged
    obstacle are filled, since they are unreachable from outside anyway.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if k < 8:
        raise ValueError("disk approximation needs k >= 8")
    if radius == 0:
        return env
    grown = unary_union([minkowski_disk(np.asarray(ob), radius, k) for ob in env.obstacles])
    if grown.is_empty:
        polys = []
    elif isinstance(grown, MultiPolygon):
        polys = list(grown.geoms)
    else:
        polys = [grown]
    obstacles = tuple(_clean_ring(np.asarray(p.exterior.coords)) for p in polys)
    xmin, ymin, xmax, ymax = env.bounds
    bounds = (xmin + radius, ymin + radius, xmax - radius, ymax - radius)
    try:
        return Environment(bounds, obstacles, env.base_station)
    except InvalidEnvironment as exc:
        raise InvalidEnvironment(f"dilation by {radius} m: {exc}") from exc


def random_free_point(env: Environment, rng: np.random.Generator, max_tries: int = 10000) -> np.ndarray:
    """Uniform rejection sample from the free space."""
    lo = np.array(env.bounds[:2])
    hi = np.array(env.bounds[2:])
    for _ in range(max_tries):
        p = rng.uniform(lo, hi)
        if point_in_free_space(p, env):
            return p
    raise RuntimeError("could not sample a free point")


def polygon_area(poly: Sequence) -> float:
    return abs(_signed_area(np.asarray(poly, dtype=float)))
