"""Reference implementations used to cross-check the package.

These are deliberately slow and written without the package's kernels:
plain-Python orientation tests, shapely set predicates, a 3D
segment-versus-prism test, dense Dijkstra on a matrix, and an explicit
rotation-matrix forward kinematics.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.sparse.csgraph import dijkstra as csgraph_dijkstra
from scipy.spatial import ConvexHull
from shapely.geometry import LineString, Point, Polygon


def orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def on_segment(a, b, p) -> bool:
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def segments_touch(p, q, a, b) -> bool:
    """Closed segment intersection with exact float orientation signs."""
    d1, d2 = orient(p, q, a), orient(p, q, b)
    d3, d4 = orient(a, b, p), orient(a, b, q)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    return (
        (d1 == 0 and on_segment(p, q, a))
        or (d2 == 0 and on_segment(p, q, b))
        or (d3 == 0 and on_segment(a, b, p))
        or (d4 == 0 and on_segment(a, b, q))
    )


def inside_bounds(p, bounds) -> bool:
    return bounds[0] <= p[0] <= bounds[2] and bounds[1] <= p[1] <= bounds[3]


def los_bruteforce(p, q, bounds, obstacles) -> bool:
    """Line of sight with boundary contact counted as blocked."""
    if not (inside_bounds(p, bounds) and inside_bounds(q, bounds)):
        return False
    for poly in obstacles:
        shp = Polygon(poly)
        if shp.intersects(Point(p)) or shp.intersects(Point(q)):
            return False
        n = len(poly)
        for i in range(n):
            if segments_touch(p, q, poly[i], poly[(i + 1) % n]):
                return False
    return True


def los_shapely(p, q, bounds, obstacles) -> bool:
    if not (inside_bounds(p, bounds) and inside_bounds(q, bounds)):
        return False
    geom = Point(p) if np.allclose(p, q) else LineString([p, q])
    return not any(Polygon(o).intersects(geom) for o in obstacles)


def minkowski_convex(poly, disk) -> Polygon:
    """Minkowski sum of two convex polygons as the hull of all vertex sums."""
    pts = (np.asarray(poly)[:, None, :] + np.asarray(disk)[None, :, :]).reshape(-1, 2)
    hull = ConvexHull(pts)
    return Polygon(pts[hull.vertices])


def regular_polygon_area(circumradius: float, k: int) -> float:
    return 0.5 * k * circumradius**2 * math.sin(2 * math.pi / k)


def graph_shortest_length(nodes, visible_pair, s: int, t: int) -> float:
    """Dense-matrix Dijkstra from scipy over pairs accepted by ``visible_pair``."""
    n = len(nodes)
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if visible_pair(nodes[i], nodes[j]):
                w[i, j] = w[j, i] = math.dist(nodes[i], nodes[j])
    return float(csgraph_dijkstra(w, directed=False, indices=s)[t])


def fk_rotations(base, lengths, cfg) -> np.ndarray:
    """Forward kinematics composed from explicit z-rotations and elevations."""
    p = np.array([base[0], base[1], 0.0])
    R = np.eye(3)
    out = []
    for L, (yaw, pitch) in zip(lengths, cfg):
        c, s = math.cos(yaw), math.sin(yaw)
        R = R @ np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        link = np.array([L * math.cos(pitch), 0.0, L * math.sin(pitch)])
        p = p + R @ link
        out.append(p.copy())
    return np.array(out)


def segment_hits_prism_3d(p, q, poly) -> bool:
    """Does the closed 3D segment pq meet the infinite vertical prism over ``poly``?

    Endpoint containment is tested directly; otherwise the segment has to
    pierce one of the prism's vertical side faces. Each face is the plane
    through an edge, extended without bound in z, so a piercing point needs
    only its horizontal coordinates checked against the edge span.
    """
    shp = Polygon(poly)
    if shp.intersects(Point(p[0], p[1])) or shp.intersects(Point(q[0], q[1])):
        return True
    d = np.asarray(q, float) - np.asarray(p, float)
    n = len(poly)
    for i in range(n):
        a, b = np.asarray(poly[i], float), np.asarray(poly[(i + 1) % n], float)
        e = b - a
        normal = np.array([e[1], -e[0], 0.0])  # horizontal normal of the face
        denom = normal @ d
        a3 = np.array([a[0], a[1], 0.0])
        if abs(denom) < 1e-15:
            # parallel to the face plane: touches only if it lies in it
            if abs(normal @ (np.asarray(p, float) - a3)) < 1e-12 and segments_touch(p[:2], q[:2], a, b):
                return True
            continue
        t = normal @ (a3 - np.asarray(p, float)) / denom
        if 0.0 <= t <= 1.0:
            hit = np.asarray(p, float) + t * d
            u = (hit[:2] - a) @ e / (e @ e)
            if 0.0 <= u <= 1.0:
                return True
    return False


def config_valid_3d(base, lengths, cfg, bounds, obstacles) -> bool:
    """Arm validity by testing every 3D link against every infinite prism."""
    joints = np.vstack([[base[0], base[1], 0.0], fk_rotations(base, lengths, cfg)])
    for j in joints:
        if not inside_bounds(j, bounds):
            return False
    for p, q in zip(joints[:-1], joints[1:]):
        for poly in obstacles:
            if segment_hits_prism_3d(p, q, poly):
                return False
    return True
