"""Compiled planar predicates shared by the environment and collision code.

Obstacles are passed as a flat edge table ``(E, 4)`` of ``ax, ay, bx, by``,
an ``(O + 1,)`` offset array delimiting each polygon's edges, and an
``(O, 4)`` table of polygon bounding boxes used to skip far obstacles.
"""
import numpy as np
from numba import njit

EPS = 1e-9


@njit(cache=True, inline="always")
def _sgn(v):
    if v > EPS:
        return 1
    if v < -EPS:
        return -1
    return 0


@njit(cache=True)
def seg_touches(px, py, qx, qy, ax, ay, bx, by):
    """Closed intersection of segments pq and ab, EPS-thresholded orientations."""
    s1 = _sgn((qx - px) * (ay - py) - (qy - py) * (ax - px))
    s2 = _sgn((qx - px) * (by - py) - (qy - py) * (bx - px))
    if s1 * s2 > 0:
        return False
    s3 = _sgn((bx - ax) * (py - ay) - (by - ay) * (px - ax))
    s4 = _sgn((bx - ax) * (qy - ay) - (by - ay) * (qx - ax))
    if s3 * s4 > 0:
        return False
    if (s1 == 0 and s2 == 0) or (s3 == 0 and s4 == 0):
        return (
            min(px, qx) <= max(ax, bx) + EPS
            and min(ax, bx) <= max(px, qx) + EPS
            and min(py, qy) <= max(ay, by) + EPS
            and min(ay, by) <= max(py, qy) + EPS
        )
    return True


@njit(cache=True)
def point_free(x, y, bounds, edges, offsets, boxes):
    if x < bounds[0] - EPS or x > bounds[2] + EPS or y < bounds[1] - EPS or y > bounds[3] + EPS:
        return False
    for k in range(boxes.shape[0]):
        if x < boxes[k, 0] - EPS or x > boxes[k, 2] + EPS or y < boxes[k, 1] - EPS or y > boxes[k, 3] + EPS:
            continue
        inside = False
        for e in range(offsets[k], offsets[k + 1]):
            ax, ay, bx, by = edges[e, 0], edges[e, 1], edges[e, 2], edges[e, 3]
            dx, dy = bx - ax, by - ay
            l2 = dx * dx + dy * dy
            t = ((x - ax) * dx + (y - ay) * dy) / l2 if l2 > 0 else 0.0
            t = min(1.0, max(0.0, t))
            ex, ey = ax + t * dx - x, ay + t * dy - y
            if ex * ex + ey * ey <= EPS * EPS:
                return False
            if (ay > y) != (by > y):
                if x < ax + (y - ay) * dx / dy:
                    inside = not inside
        if inside:
            return False
    return True


@njit(cache=True)
def segment_clear(px, py, qx, qy, edges, offsets, boxes):
    """True iff segment pq touches no obstacle edge."""
    lox, hix = min(px, qx) - EPS, max(px, qx) + EPS
    loy, hiy = min(py, qy) - EPS, max(py, qy) + EPS
    for k in range(boxes.shape[0]):
        if hix < boxes[k, 0] or lox > boxes[k, 2] or hiy < boxes[k, 1] or loy > boxes[k, 3]:
            continue
        for e in range(offsets[k], offsets[k + 1]):
            if seg_touches(px, py, qx, qy, edges[e, 0], edges[e, 1], edges[e, 2], edges[e, 3]):
                return False
    return True


@njit(cache=True)
def points_free_batch(pts, bounds, edges, offsets, boxes):
    out = np.empty(pts.shape[0], dtype=np.bool_)
    for i in range(pts.shape[0]):
        out[i] = point_free(pts[i, 0], pts[i, 1], bounds, edges, offsets, boxes)
    return out


@njit(cache=True)
def visible_batch(p, q, bounds, edges, offsets, boxes):
    out = np.empty(p.shape[0], dtype=np.bool_)
    for i in range(p.shape[0]):
        out[i] = (
            point_free(p[i, 0], p[i, 1], bounds, edges, offsets, boxes)
            and point_free(q[i, 0], q[i, 1], bounds, edges, offsets, boxes)
            and segment_clear(p[i, 0], p[i, 1], q[i, 0], q[i, 1], edges, offsets, boxes)
        )
    return out


@njit(cache=True)
def chains_valid(pos, bounds, edges, offsets, boxes):
    """``pos`` is (M, K, 2); chain m is valid iff all its points are free and
    every consecutive pair is mutually visible."""
    m_count, k_count = pos.shape[0], pos.shape[1]
    out = np.empty(m_count, dtype=np.bool_)
    for m in range(m_count):
        ok = True
        for k in range(k_count):
            if not point_free(pos[m, k, 0], pos[m, k, 1], bounds, edges, offsets, boxes):
                ok = False
                break
        if ok:
            for k in range(k_count - 1):
                if not segment_clear(
                    pos[m, k, 0], pos[m, k, 1], pos[m, k + 1, 0], pos[m, k + 1, 1],
                    edges, offsets, boxes,
                ):
                    ok = False
                    break
        out[m] = ok
    return out


@njit(cache=True)
def first_invalid(pos, bounds, edges, offsets, boxes):
    """Index of the first invalid chain in (M, K, 2), or M if all are valid."""
    for m in range(pos.shape[0]):
        for k in range(pos.shape[1]):
            if not point_free(pos[m, k, 0], pos[m, k, 1], bounds, edges, offsets, boxes):
                return m
        for k in range(pos.shape[1] - 1):
            if not segment_clear(
                pos[m, k, 0], pos[m, k, 1], pos[m, k + 1, 0], pos[m, k + 1, 1],
                edges, offsets, boxes,
            ):
                return m
    return pos.shape[0]


@njit(cache=True)
def first_invalid_on_segment(a, d, n_steps, lengths, base, bounds, edges, offsets, boxes):
    """Walk ``a + (i / n_steps) * d`` for i = 0..n_steps, running forward
    kinematics of the (yaw, pitch) chain at each sample. Returns the first
    invalid sample index, or ``n_steps + 1`` if every sample is valid."""
    n = a.shape[0]
    pos = np.empty((n + 1, 2))
    pos[0, 0] = base[0]
    pos[0, 1] = base[1]
    for i in range(n_steps + 1):
        t = i / n_steps
        heading = 0.0
        ok = True
        for j in range(n):
            heading += a[j, 0] + t * d[j, 0]
            c = lengths[j] * np.cos(a[j, 1] + t * d[j, 1])
            pos[j + 1, 0] = pos[j, 0] + c * np.cos(heading)
            pos[j + 1, 1] = pos[j, 1] + c * np.sin(heading)
            if not point_free(pos[j + 1, 0], pos[j + 1, 1], bounds, edges, offsets, boxes):
                ok = False
                break
        if ok and not point_free(pos[0, 0], pos[0, 1], bounds, edges, offsets, boxes):
            ok = False
        if ok:
            for j in range(n):
                if not segment_clear(pos[j, 0], pos[j, 1], pos[j + 1, 0], pos[j + 1, 1], edges, offsets, boxes):
                    ok = False
                    break
        if not ok:
            return i
    return n_steps + 1
