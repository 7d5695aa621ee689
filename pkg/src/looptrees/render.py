"""Static SVG plots of excursions, looptrees and vernation trees."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from .combinatorics import PlaneTree, w_process
from .excursion import Excursion, hitting_time
from .metrics import pairwise

SIZE = 480
MARGIN = 20


@dataclass
class Layout:
    circles: list[tuple[float, float, float]] = field(default_factory=list)  # cx, cy, r
    polygons: list[list[tuple[float, float]]] = field(default_factory=list)
    segments: list[tuple[float, float, float, float]] = field(default_factory=list)
    points: list[tuple[float, float]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def _parents(f: Excursion) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[int | None], np.ndarray]:
    """Each loop's deepest ancestor loop whose interior carries its base."""
    r, h, _ = f.jump_arrays()
    X = f.x_profile(r)  # X[i, j] = x_{r_i}^{r_j}
    parent: list[int | None] = []
    for j in range(len(r)):
        best = None
        for i in range(j):
            if 0 < X[i, j] < h[i] - 1e-12 and (best is None or r[i] > r[best]):
                best = i
        parent.append(best)
    return r, h, X, parent, f.left_limit(r)


def layout(f: Excursion, coefficient: float = 1.0, tree_part: bool = False, polygon_from: int | None = None) -> Layout:
    """
    Recursive tangent-circle placement.

    Loop j of length c·Δ_j is drawn tangent, outward, to its parent loop at
    angular position x/Δ; with ``tree_part`` a segment of the tree length
    separating the two is inserted.  Loops without a parent loop are placed
    radially around the root.
    """
    out = Layout()
    out.points.append((0.0, 0.0))
    r, h, X, parent, fl = _parents(f)
    if len(r) == 0:
        if tree_part:
            height = float(f.sup())
            out.segments.append((0.0, 0.0, 0.0, height))
        return out
    centers: dict[int, tuple[float, float]] = {}
    base_angle: dict[int, float] = {}
    radius = coefficient * h / (2 * math.pi)

    def gap(j: int, attach_time: float) -> float:
        if not tree_part:
            return 0.0
        return float(pairwise(f, attach_time, r[j], "tree")[0])

    tops = [j for j in range(len(r)) if parent[j] is None]
    if len(tops) > 1:
        out.notes.append("radial placement of top-level loops")
    for k, j in enumerate(tops):
        ang = math.pi / 2 + 2 * math.pi * k / len(tops)
        u = (math.cos(ang), math.sin(ang))
        L = gap(j, 1.0)
        b = (L * u[0], L * u[1])
        if L > 0:
            out.segments.append((0.0, 0.0, b[0], b[1]))
        centers[j] = (b[0] + radius[j] * u[0], b[1] + radius[j] * u[1])
        base_angle[j] = ang + math.pi
    for j in range(len(r)):
        i = parent[j]
        if i is None:
            continue
        x = X[i, j]
        theta = base_angle[i] + 2 * math.pi * x / h[i]
        c = centers[i]
        u = (math.cos(theta), math.sin(theta))
        p = (c[0] + radius[i] * u[0], c[1] + radius[i] * u[1])
        L = gap(j, hitting_time(f, float(r[i]), float(fl[i] + x)))
        b = (p[0] + L * u[0], p[1] + L * u[1])
        if L > 0:
            out.segments.append((p[0], p[1], b[0], b[1]))
        centers[j] = (b[0] + radius[j] * u[0], b[1] + radius[j] * u[1])
        base_angle[j] = theta + math.pi
    for j in range(len(r)):
        cx, cy = centers[j]
        k = int(round(h[j]))
        if polygon_from is not None and k >= polygon_from and abs(h[j] - k) < 1e-9:
            pts = [
                (cx + radius[j] * math.cos(base_angle[j] + 2 * math.pi * m / k),
                 cy + radius[j] * math.sin(base_angle[j] + 2 * math.pi * m / k))
                for m in range(k)
            ]
            out.polygons.append(pts)
            out.points.extend(pts)
        else:
            out.circles.append((cx, cy, float(radius[j])))
    if _overlapping(out.circles):
        out.notes.append("loops overlap in the tangent layout")
    return out


def _overlapping(circles) -> bool:
    for a in range(len(circles)):
        for b in range(a + 1, len(circles)):
            (x1, y1, r1), (x2, y2, r2) = circles[a], circles[b]
            if math.hypot(x1 - x2, y1 - y2) < r1 + r2 - 1e-6 * (r1 + r2):
                return True
    return False


def _bbox(lay: Layout):
    xs, ys = [], []
    for cx, cy, r in lay.circles:
        xs += [cx - r, cx + r]
        ys += [cy - r, cy + r]
    for poly in lay.polygons:
        xs += [p[0] for p in poly]
        ys += [p[1] for p in poly]
    for x0, y0, x1, y1 in lay.segments:
        xs += [x0, x1]
        ys += [y0, y1]
    for x, y in lay.points:
        xs.append(x)
        ys.append(y)
    return min(xs), min(ys), max(xs), max(ys)


def _svg(body: list[str], notes: list[str]) -> str:
    meta = "".join(f"<metadata>{escape(n)}</metadata>" for n in notes)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">'
        f"{meta}" + "".join(body) + "</svg>\n"
    )


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def render_layout(lay: Layout) -> str:
    x0, y0, x1, y1 = _bbox(lay)
    span = max(x1 - x0, y1 - y0, 1e-9)
    k = (SIZE - 2 * MARGIN) / span

    def X(x):
        return _fmt(MARGIN + (x - x0) * k)

    def Y(y):
        return _fmt(SIZE - MARGIN - (y - y0) * k)

    body = []
    for a, b, c, d in lay.segments:
        body.append(f'<line x1="{X(a)}" y1="{Y(b)}" x2="{X(c)}" y2="{Y(d)}" stroke="black"/>')
    for cx, cy, r in lay.circles:
        body.append(f'<circle cx="{X(cx)}" cy="{Y(cy)}" r="{_fmt(r * k)}" fill="none" stroke="black"/>')
    for poly in lay.polygons:
        pts = " ".join(f"{X(x)},{Y(y)}" for x, y in poly)
        body.append(f'<polygon points="{pts}" fill="none" stroke="black"/>')
    rx, ry = lay.points[0]
    body.append(f'<circle cx="{X(rx)}" cy="{Y(ry)}" r="3" fill="red"/>')
    return _svg(body, lay.notes)


def render_excursion(f: Excursion) -> str:
    top = max(float(f.sup()), 1e-9)
    w = SIZE - 2 * MARGIN

    def X(t):
        return _fmt(MARGIN + t * w)

    def Y(v):
        return _fmt(SIZE - MARGIN - v / top * w)

    body = []
    for i in range(len(f.t) - 1):
        body.append(
            f'<line x1="{X(f.t[i])}" y1="{Y(f.right[i])}" x2="{X(f.t[i + 1])}" y2="{Y(f.left[i + 1])}" stroke="black"/>'
        )
    for t, l, r in f.breakpoints:
        if r > l:
            body.append(
                f'<line x1="{X(t)}" y1="{Y(l)}" x2="{X(t)}" y2="{Y(r)}" stroke="black" stroke-dasharray="4 3"/>'
            )
    return _svg(body, [])


def render(obj, what: str = "excursion", coefficient: float = 2.0) -> str:
    """SVG for an excursion, or for the looptree/vernation tree it codes."""
    if what not in ("excursion", "looptree", "vernation"):
        raise ValueError("what must be excursion, looptree or vernation")
    polygons = None
    if isinstance(obj, PlaneTree):
        obj = w_process(obj)
        polygons = 3
    if what == "excursion":
        return render_excursion(obj)
    if what == "looptree":
        return render_layout(layout(obj, 1.0, tree_part=False, polygon_from=polygons))
    return render_layout(layout(obj, coefficient, tree_part=True, polygon_from=polygons))
