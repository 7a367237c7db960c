"""Visibility graph over dilated obstacle vertices and Dijkstra queries."""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .env import Environment, links_visible, points_free

# Obstacle vertices lie on the obstacle boundary, which is "blocked" under the
# conservative contact rule; candidate nodes are nudged outward by this much.
NODE_CLEARANCE = 0.05


class NoPathError(RuntimeError):
    pass


@dataclass
class VisibilityGraph:
    nodes: np.ndarray  # (V, 2)
    adjacency: list[dict[int, float]]

    def index_of(self, p, tol: float = 1e-9) -> int:
        d = np.hypot(*(self.nodes - np.asarray(p, dtype=float)).T)
        i = int(np.argmin(d))
        if d[i] > tol:
            raise KeyError(f"{tuple(p)} is not a graph node")
        return i

    @property
    def n_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2


def obstacle_nodes(env: Environment, clearance: float = NODE_CLEARANCE) -> np.ndarray:
    """Obstacle vertices pushed off the boundary along the outward bisector."""
    out = []
    for poly in env.obstacles:
        prev = np.roll(poly, 1, axis=0)
        nxt = np.roll(poly, -1, axis=0)
        for a, v, b in zip(prev, poly, nxt):
            e1 = (v - a) / np.hypot(*(v - a))
            e2 = (b - v) / np.hypot(*(b - v))
            # outward normals of a CCW polygon point to the right of each edge
            n = np.array([e1[1], -e1[0]]) + np.array([e2[1], -e2[0]])
            norm = np.hypot(*n)
            if norm < 1e-12:
                n = np.array([e1[1], -e1[0]])
            else:
                n = n / norm
            out.append(v + clearance * n)
    nodes = np.array(out).reshape(-1, 2)
    return nodes[points_free(nodes, env)] if len(nodes) else nodes


def build_visibility_graph(env: Environment, extra=(), clearance: float = NODE_CLEARANCE) -> VisibilityGraph:
    """All mutually visible pairs among obstacle vertices and ``extra`` points.

    Extra points come first in the node list, in the order given.
    """
    extra = np.asarray(extra, dtype=float).reshape(-1, 2)
    if len(extra) and not points_free(extra, env).all():
        bad = extra[~points_free(extra, env)][0]
        raise ValueError(f"extra point {tuple(bad)} is not in free space")
    nodes = np.vstack([extra, obstacle_nodes(env, clearance)])
    v = len(nodes)
    adjacency: list[dict[int, float]] = [dict() for _ in range(v)]
    if v < 2:
        return VisibilityGraph(nodes, adjacency)
    ii, jj = np.triu_indices(v, k=1)
    visible = links_visible(nodes[ii], nodes[jj], env)
    for i, j in zip(ii[visible], jj[visible]):
        w = float(np.hypot(*(nodes[i] - nodes[j])))
        adjacency[i][j] = w
        adjacency[j][i] = w
    return VisibilityGraph(nodes, adjacency)


def dijkstra(g: VisibilityGraph, source: int) -> tuple[np.ndarray, np.ndarray]:
    """Single-source distances and predecessor indices (-1 for none).

    Ties are broken toward the lower predecessor index so results do not
    depend on heap internals.
    """
    n = len(g.nodes)
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=int)
    dist[source] = 0.0
    heap = [(0.0, source)]
    done = np.zeros(n, dtype=bool)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v in sorted(g.adjacency[u]):
            if done[v]:
                continue
            nd = d + g.adjacency[u][v]
            if nd < dist[v] - 1e-12 or (abs(nd - dist[v]) <= 1e-12 and u < pred[v]):
                dist[v] = min(nd, dist[v])
                pred[v] = u
                heapq.heappush(heap, (dist[v], v))
    return dist, pred


def shortest_path(g: VisibilityGraph, start, goal) -> np.ndarray:
    """Shortest polyline from ``start`` to ``goal``; both must be graph nodes."""
    s, t = g.index_of(start), g.index_of(goal)
    if s == t:
        return g.nodes[[s]].copy()
    dist, pred = dijkstra(g, s)
    if not np.isfinite(dist[t]):
        raise NoPathError("goal is not reachable from start")
    seq = [t]
    while seq[-1] != s:
        seq.append(int(pred[seq[-1]]))
    return g.nodes[seq[::-1]].copy()


def polyline_length(poly: np.ndarray) -> float:
    poly = np.asarray(poly, dtype=float)
    if len(poly) < 2:
        return 0.0
    return float(np.hypot(*np.diff(poly, axis=0).T).sum())
