"""Deterministic SVG drawings of maps, backbones, trajectories and graphs.

Output is written by hand with fixed number formatting so identical inputs
give byte-identical files.
"""
from __future__ import annotations

import numpy as np

from .deploy import BackboneConfig
from .env import Environment
from .traj import RobotTrajectories
from .visgraph import VisibilityGraph

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
SCALE = 20.0  # px per meter


def _fmt(v: float) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class _Canvas:
    def __init__(self, bounds, margin: float = 1.0):
        xmin, ymin, xmax, ymax = (float(b) for b in bounds)
        self.x0, self.y1 = xmin - margin, ymax + margin
        self.w = (xmax - xmin + 2 * margin) * SCALE
        self.h = (ymax - ymin + 2 * margin) * SCALE
        self.items: list[str] = []

    def xy(self, p) -> str:
        x = (p[0] - self.x0) * SCALE
        y = (self.y1 - p[1]) * SCALE  # svg y grows downward
        return f"{_fmt(x)},{_fmt(y)}"

    def poly(self, pts, closed: bool, **attrs):
        tag = "polygon" if closed else "polyline"
        points = " ".join(self.xy(p) for p in pts)
        self.items.append(f'<{tag} points="{points}"{_attrs(attrs)}/>')

    def circle(self, p, r_px: float, **attrs):
        x, y = self.xy(p).split(",")
        self.items.append(f'<circle cx="{x}" cy="{y}" r="{_fmt(r_px)}"{_attrs(attrs)}/>')

    def group(self, name: str):
        self.items.append(f'<g id="{name}">')

    def end(self):
        self.items.append("</g>")

    def document(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(self.w)}" height="{_fmt(self.h)}" '
            f'viewBox="0 0 {_fmt(self.w)} {_fmt(self.h)}">'
        )
        return "\n".join([head, *self.items, "</svg>"]) + "\n"


def _attrs(attrs: dict) -> str:
    return "".join(f' {k.replace("_", "-")}="{v}"' for k, v in attrs.items())


def render_svg(
    env: Environment,
    backbones: list[BackboneConfig] = (),
    trajectories: RobotTrajectories | None = None,
    graph: VisibilityGraph | None = None,
    goals=None,
) -> str:
    """Draw ``env`` and optional overlays.

    Layers, bottom to top: visibility graph edges, obstacles, robot
    trajectory polylines, backbones (dashed, base to leader), and markers
    for the base, goals and trajectory start/end positions.
    """
    xmin, ymin, xmax, ymax = env.bounds
    c = _Canvas(env.bounds)
    c.group("bounds")
    c.poly([(xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)], True, fill="#ffffff", stroke="#000000", stroke_width="2")
    c.end()
    if graph is not None:
        c.group("visibility-graph")
        for i, nbrs in enumerate(graph.adjacency):
            for j in sorted(nbrs):
                if j > i:
                    c.poly([graph.nodes[i], graph.nodes[j]], False, stroke="#cccccc", stroke_width="0.5", fill="none")
        c.end()
    c.group("obstacles")
    for poly in env.obstacles:
        c.poly(poly, True, fill="#555555", stroke="#333333", stroke_width="1")
    c.end()
    if trajectories is not None:
        c.group("trajectories")
        for r in range(trajectories.n_robots):
            color = PALETTE[r % len(PALETTE)]
            c.poly(trajectories.positions[:, r], False, fill="none", stroke=color, stroke_width="1.5")
        for r in range(trajectories.n_robots):
            color = PALETTE[r % len(PALETTE)]
            c.circle(trajectories.positions[0, r], 3, fill="none", stroke=color, stroke_width="1.5")
            c.circle(trajectories.positions[-1, r], 3, fill=color)
        c.end()
    for k, bb in enumerate(backbones):
        c.group(f"backbone-{k}")
        c.poly(bb.chain, False, fill="none", stroke="#000000", stroke_width="1.5", stroke_dasharray="6,4")
        for p in bb.relay_positions:
            c.circle(p, 4, fill="#2ca02c", stroke="#000000", stroke_width="0.5")
        c.circle(bb.leader_position, 5, fill="#d62728", stroke="#000000", stroke_width="0.5")
        c.end()
    if goals is not None:
        c.group("goals")
        for g in np.asarray(goals, dtype=float).reshape(-1, 2):
            x, y = (float(v) for v in c.xy(g).split(","))
            c.items.append(
                f'<path d="M{_fmt(x - 5)},{_fmt(y - 5)}L{_fmt(x + 5)},{_fmt(y + 5)}'
                f'M{_fmt(x - 5)},{_fmt(y + 5)}L{_fmt(x + 5)},{_fmt(y - 5)}" stroke="#d62728" stroke-width="2"/>'
            )
        c.end()
    c.group("base")
    c.circle(env.base_station, 6, fill="#1f77b4", stroke="#000000", stroke_width="1")
    c.end()
    return c.document()


def line_plot_svg(
    series: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray | None]],
    xlabel: str,
    ylabel: str,
    width: int = 480,
    height: int = 320,
) -> str:
    """Small line chart with optional +-error bars; ``series`` maps a label
    to (x, y, err)."""
    pad_l, pad_r, pad_t, pad_b = 60, 20, 20, 45
    xs = np.concatenate([np.asarray(v[0], float) for v in series.values()])
    ys = np.concatenate([
        np.asarray(v[1], float) + (np.asarray(v[2], float) if v[2] is not None else 0)
        for v in series.values()
    ])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    if x_hi == x_lo:
        x_hi = x_lo + 1
    y_hi = float(np.nanmax(ys)) * 1.1 or 1.0
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def px(x, y):
        return pad_l + (x - x_lo) / (x_hi - x_lo) * pw, pad_t + ph - y / y_hi * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        f'<polyline points="{pad_l},{pad_t} {pad_l},{pad_t + ph} {pad_l + pw},{pad_t + ph}" fill="none" stroke="#000000"/>',
    ]
    for x in np.unique(xs):
        X, Y = px(x, 0)
        out.append(f'<text x="{_fmt(X)}" y="{_fmt(Y + 16)}" font-size="11" text-anchor="middle">{_fmt(x)}</text>')
    for frac in (0.0, 0.5, 1.0):
        X, Y = px(x_lo, y_hi * frac / 1.1)
        out.append(f'<text x="{_fmt(X - 6)}" y="{_fmt(Y + 4)}" font-size="11" text-anchor="end">{y_hi * frac / 1.1:.3g}</text>')
    out.append(f'<text x="{pad_l + pw / 2:g}" y="{height - 8}" font-size="12" text-anchor="middle">{xlabel}</text>')
    out.append(
        f'<text x="14" y="{pad_t + ph / 2:g}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 14 {pad_t + ph / 2:g})">{ylabel}</text>'
    )
    for k, (label, (x, y, err)) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        pts = [px(a, b) for a, b in zip(x, y)]
        out.append(
            f'<polyline points="{" ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in pts)}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        for i, (a, b) in enumerate(zip(x, y)):
            X, Y = px(a, b)
            out.append(f'<circle cx="{_fmt(X)}" cy="{_fmt(Y)}" r="3" fill="{color}"/>')
            if err is not None:
                _, y0 = px(a, b - err[i])
                _, y1 = px(a, b + err[i])
                out.append(f'<line x1="{_fmt(X)}" y1="{_fmt(y0)}" x2="{_fmt(X)}" y2="{_fmt(y1)}" stroke="{color}"/>')
        out.append(
            f'<text x="{pad_l + 10}" y="{pad_t + 14 * (k + 1)}" font-size="11" fill="{color}">{label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
