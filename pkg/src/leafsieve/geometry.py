"""Minimum enclosing circle of a mask's pixels and the compactness ratio used
by the shape filter.

The enclosing circle uses the classic randomized incremental construction
(expected linear time). Inputs are canonicalized by sorting before a
fixed-seed shuffle, so the result is deterministic and invariant under input
permutation.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .mask import Bitmask

__all__ = ["Circle", "boundary_points", "min_enclosing_circle", "shape_ratio"]

_SHUFFLE_SEED = 0x1EAF5EED
# slack for containment checks; circumcircle arithmetic is exact only up to
# float rounding
_EPS_FACTOR = 1.0 + 1e-14


@dataclass(frozen=True)
class Circle:
    center: tuple[float, float]
    radius: float

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise ValueError(f"circle radius must be >= 0, got {self.radius}")

    def contains(self, point: tuple[float, float], slack: float = 0.0) -> bool:
        return math.hypot(point[0] - self.center[0], point[1] - self.center[1]) <= (
            self.radius + slack
        )


def boundary_points(m: Bitmask) -> list[tuple[float, float]]:
    """Centers of set pixels with at least one unset 4-neighbour.

    The image border counts as unset. Interior pixel centers are convex
    combinations of their neighbours' centers, so the minimum enclosing circle
    of this subset equals that of all set pixel centers.
    """
    if m.area == 0:
        raise ValueError("boundary of an empty mask is undefined")
    padded = np.pad(m.bits, 1, constant_values=False)
    interior = (
        padded[:-2, 1:-1]
        & padded[2:, 1:-1]
        & padded[1:-1, :-2]
        & padded[1:-1, 2:]
    )
    ys, xs = np.nonzero(m.bits & ~interior)
    return [(x + 0.5, y + 0.5) for x, y in zip(xs.tolist(), ys.tolist())]


def min_enclosing_circle(points: list[tuple[float, float]]) -> Circle:
    """Smallest circle containing every input point.

    Deterministic: points are sorted to a canonical order before the seeded
    shuffle, making the output independent of the caller's point order.
    """
    if not points:
        raise ValueError("minimum enclosing circle of no points is undefined")
    pts = sorted((float(x), float(y)) for x, y in points)
    random.Random(_SHUFFLE_SEED).shuffle(pts)

    circle: tuple[float, float, float] | None = None
    for i, p in enumerate(pts):
        if circle is None or not _inside(circle, p):
            circle = _with_point_on_boundary(pts[: i + 1], p)
    assert circle is not None
    return Circle((circle[0], circle[1]), circle[2])


def _inside(c: tuple[float, float, float], p: tuple[float, float]) -> bool:
    return math.hypot(p[0] - c[0], p[1] - c[1]) <= c[2] * _EPS_FACTOR


def _with_point_on_boundary(
    points: list[tuple[float, float]], p: tuple[float, float]
) -> tuple[float, float, float]:
    # smallest circle over `points` with p known to lie on the boundary
    c = (p[0], p[1], 0.0)
    for i, q in enumerate(points):
        if not _inside(c, q):
            if c[2] == 0.0:
                c = _diameter(p, q)
            else:
                c = _with_two_on_boundary(points[: i + 1], p, q)
    return c


def _with_two_on_boundary(
    points: list[tuple[float, float]],
    p: tuple[float, float],
    q: tuple[float, float],
) -> tuple[float, float, float]:
    # smallest circle over `points` with p and q on the boundary: either the
    # diameter circle of (p, q) or the tightest circumcircle on each side
    circ = _diameter(p, q)
    left: tuple[float, float, float] | None = None
    right: tuple[float, float, float] | None = None
    px, py = p
    qx, qy = q
    for r in points:
        if _inside(circ, r):
            continue
        cross = _cross(px, py, qx, qy, r[0], r[1])
        c = _circumcircle(p, q, r)
        if c is None:
            continue
        side = _cross(px, py, qx, qy, c[0], c[1])
        if cross > 0.0 and (
            left is None or side > _cross(px, py, qx, qy, left[0], left[1])
        ):
            left = c
        elif cross < 0.0 and (
            right is None or side < _cross(px, py, qx, qy, right[0], right[1])
        ):
            right = c
    if left is None:
        return circ if right is None else right
    if right is None:
        return left
    return left if left[2] <= right[2] else right


def _diameter(
    a: tuple[float, float], b: tuple[float, float]
) -> tuple[float, float, float]:
    cx = (a[0] + b[0]) / 2.0
    cy = (a[1] + b[1]) / 2.0
    return (cx, cy, max(math.hypot(cx - a[0], cy - a[1]), math.hypot(cx - b[0], cy - b[1])))


def _circumcircle(
    a: tuple[float, float], b: tuple[float, float], c: tuple[float, float]
) -> tuple[float, float, float] | None:
    # work relative to the bounding-box midpoint for numerical stability
    ox = (min(a[0], b[0], c[0]) + max(a[0], b[0], c[0])) / 2.0
    oy = (min(a[1], b[1], c[1]) + max(a[1], b[1], c[1])) / 2.0
    ax, ay = a[0] - ox, a[1] - oy
    bx, by = b[0] - ox, b[1] - oy
    cx, cy = c[0] - ox, c[1] - oy
    d = (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by)) * 2.0
    if d == 0.0:
        return None
    x = ox + (
        (ax * ax + ay * ay) * (by - cy)
        + (bx * bx + by * by) * (cy - ay)
        + (cx * cx + cy * cy) * (ay - by)
    ) / d
    y = oy + (
        (ax * ax + ay * ay) * (cx - bx)
        + (bx * bx + by * by) * (ax - cx)
        + (cx * cx + cy * cy) * (bx - ax)
    ) / d
    r = max(
        math.hypot(x - a[0], y - a[1]),
        math.hypot(x - b[0], y - b[1]),
        math.hypot(x - c[0], y - c[1]),
    )
    return (x, y, r)


def _cross(x0: float, y0: float, x1: float, y1: float, x2: float, y2: float) -> float:
    return (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)


def shape_ratio(m: Bitmask, *, min_radius: float = 0.5) -> float:
    """Mask area divided by the area of its minimum enclosing circle.

    The circle is fit to boundary pixel centers; its radius is floored at
    ``min_radius`` (half a pixel) so single-pixel masks don't divide by zero.
    Values may slightly exceed 1 for tiny rasterized disks; the shape filter
    only tests the low end, so no clamping is applied.
    """
    if m.area == 0:
        raise ValueError("shape ratio of an empty mask is undefined")
    circle = min_enclosing_circle(boundary_points(m))
    radius = max(circle.radius, min_radius)
    return m.area / (math.pi * radius * radius)
