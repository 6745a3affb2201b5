"""Shared mask builders, independent oracles, and synthetic scene generation.

The oracles here are deliberately naive (pixel loops, exhaustive enumeration)
and independent of the library code paths they check.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from leafsieve import Bitmask, CandidateMask, RgbImage

# colors chosen so the stock thresholds classify them unambiguously:
# leaf green: hue 62.6, sat 183; tray grey: sat 0; soil brown: hue 15
LEAF_RGB = (45, 160, 55)
TRAY_RGB = (150, 150, 150)
SOIL_RGB = (110, 75, 40)
PAPER_RGB = (205, 205, 205)


# ---------------------------------------------------------------- builders


def ellipse_mask(width, height, cx, cy, rx, ry) -> Bitmask:
    ys, xs = np.mgrid[0:height, 0:width]
    return Bitmask(((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0)


def rect_mask(width, height, x0, y0, x1, y1) -> Bitmask:
    grid = np.zeros((height, width), dtype=bool)
    grid[y0:y1, x0:x1] = True
    return Bitmask(grid)


def hline_mask(width, height, y, x0, x1) -> Bitmask:
    grid = np.zeros((height, width), dtype=bool)
    grid[y, x0:x1] = True
    return Bitmask(grid)


def random_mask(rng, width, height, density=0.4) -> Bitmask:
    return Bitmask(rng.random((height, width)) < density)


def union_bits(masks) -> Bitmask:
    out = np.zeros(masks[0].bits.shape, dtype=bool)
    for m in masks:
        out |= m.bits
    return Bitmask(out)


# ---------------------------------------------------------------- oracles


def iou_pixelwise(a: Bitmask, b: Bitmask) -> float:
    inter = union = 0
    for y in range(a.height):
        for x in range(a.width):
            pa = bool(a.bits[y, x])
            pb = bool(b.bits[y, x])
            inter += pa and pb
            union += pa or pb
    return inter / union if union else 0.0


def containment_pixelwise(inner: Bitmask, outer: Bitmask) -> float:
    inside = total = 0
    for y in range(inner.height):
        for x in range(inner.width):
            if inner.bits[y, x]:
                total += 1
                if outer.bits[y, x]:
                    inside += 1
    return inside / total


def coverage_pixelwise(masks) -> np.ndarray:
    h, w = masks[0].bits.shape
    counts = np.zeros((h, w), dtype=int)
    for y in range(h):
        for x in range(w):
            counts[y, x] = sum(1 for m in masks if m.bits[y, x])
    return counts


def point_in_polygon(x: float, y: float, pts) -> bool:
    """Classic even-odd crossing-number test."""
    inside = False
    n = len(pts)
    for i in range(n):
        x1, y1 = pts[i]
        x2, y2 = pts[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xint = (x2 - x1) * (y - y1) / (y2 - y1) + x1
            if x < xint:
                inside = not inside
    return inside


def rasterize_pixelwise(pts, width, height) -> np.ndarray:
    grid = np.zeros((height, width), dtype=bool)
    for y in range(height):
        for x in range(width):
            grid[y, x] = point_in_polygon(x + 0.5, y + 0.5, pts)
    return grid


def convex_hull(points):
    """Andrew monotone chain; returns hull vertices in CCW order."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


@functools.lru_cache(maxsize=None)
def _triple_indices(n: int) -> np.ndarray:
    return np.array(
        [(a, b, c) for a in range(n) for b in range(a + 1, n) for c in range(b + 1, n)],
        dtype=np.int64,
    )


def mec_bruteforce(points) -> tuple[float, float, float]:
    """O(n^3) enumeration of all pair/triple support circles (vectorized).

    Returns the smallest circle (cx, cy, r) containing every point.
    """
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    if n == 1:
        return float(pts[0, 0]), float(pts[0, 1]), 0.0

    centers = []
    radii = []
    i, j = np.triu_indices(n, k=1)
    pair_centers = (pts[i] + pts[j]) / 2.0
    pair_radii = np.linalg.norm(pts[i] - pts[j], axis=1) / 2.0
    centers.append(pair_centers)
    radii.append(pair_radii)

    if n >= 3:
        combos = _triple_indices(n)
        a, b, c = pts[combos[:, 0]], pts[combos[:, 1]], pts[combos[:, 2]]
        d = 2.0 * (
            a[:, 0] * (b[:, 1] - c[:, 1])
            + b[:, 0] * (c[:, 1] - a[:, 1])
            + c[:, 0] * (a[:, 1] - b[:, 1])
        )
        good = np.abs(d) > 1e-12
        a, b, c, d = a[good], b[good], c[good], d[good]
        a2 = (a * a).sum(axis=1)
        b2 = (b * b).sum(axis=1)
        c2 = (c * c).sum(axis=1)
        ux = (a2 * (b[:, 1] - c[:, 1]) + b2 * (c[:, 1] - a[:, 1]) + c2 * (a[:, 1] - b[:, 1])) / d
        uy = (a2 * (c[:, 0] - b[:, 0]) + b2 * (a[:, 0] - c[:, 0]) + c2 * (b[:, 0] - a[:, 0])) / d
        tri_centers = np.stack([ux, uy], axis=1)
        tri_radii = np.linalg.norm(tri_centers - a, axis=1)
        centers.append(tri_centers)
        radii.append(tri_radii)

    centers = np.concatenate(centers)
    radii = np.concatenate(radii)
    dist = np.linalg.norm(centers[:, None, :] - pts[None, :, :], axis=2)
    valid = (dist <= radii[:, None] * (1.0 + 1e-12) + 1e-9).all(axis=1)
    centers, radii = centers[valid], radii[valid]
    best = int(np.argmin(radii))
    return float(centers[best, 0]), float(centers[best, 1]), float(radii[best])


# --------------------------------------------------------- synthetic scenes


@dataclass
class SyntheticScene:
    image: RgbImage
    candidates: list[CandidateMask]
    leaf_ids: list[str]
    leaf_masks: list[Bitmask]
    junk_stage: dict[str, str]  # junk id -> stage expected to remove it
    width: int
    height: int


def build_leaf_scene(
    rng: np.random.Generator | None = None,
    width: int = 512,
    height: int = 512,
    with_tray: bool = True,
    with_soil: bool = True,
    with_plant: bool = True,
    with_container: bool = True,
    with_sliver: bool = True,
) -> SyntheticScene:
    """A scene with 5 green elliptical leaves (two overlapping) plus the
    classic junk candidates, each constructed so exactly one stage removes it.
    """

    def uniform(lo, hi):
        if rng is None:
            return (lo + hi) / 2.0
        return float(rng.uniform(lo, hi))

    def jitter(value, amount=10):
        if rng is None:
            return value
        return value + int(rng.integers(-amount, amount + 1))

    # L1/L2 overlap slightly; L3/L4 are the disjoint container pair
    rx1, ry1 = uniform(34, 42), uniform(22, 30)
    rx2, ry2 = uniform(34, 42), uniform(22, 30)
    c1 = (jitter(150), jitter(130))
    c2 = (int(c1[0] + rx1 + rx2 - uniform(8, 14)), jitter(c1[1], 6))
    c3 = (jitter(150, 8), jitter(330, 8))
    c4 = (c3[0] + 100, c3[1])
    c5 = (jitter(390, 8), jitter(230, 8))
    rx5 = uniform(36, 42)

    leaves = [
        ellipse_mask(width, height, c1[0], c1[1], rx1, ry1),
        ellipse_mask(width, height, c2[0], c2[1], rx2, ry2),
        ellipse_mask(width, height, c3[0], c3[1], uniform(36, 44), uniform(24, 30)),
        ellipse_mask(width, height, c4[0], c4[1], uniform(36, 44), uniform(24, 30)),
        ellipse_mask(width, height, c5[0], c5[1], rx5, uniform(26, 32)),
    ]
    # geometry guards for the stage oracles
    overlap = int(np.count_nonzero(leaves[0].bits & leaves[1].bits))
    assert 0 < overlap < 0.35 * min(leaves[0].area, leaves[1].area)
    assert not (leaves[2].bits & leaves[3].bits).any()

    leaf_ids = [f"leaf_{i + 1}" for i in range(5)]
    candidates = [
        CandidateMask(id=lid, mask=m, source="synthetic")
        for lid, m in zip(leaf_ids, leaves)
    ]
    junk_stage: dict[str, str] = {}

    if with_tray:
        tray = rect_mask(width, height, 30, 430, width - 30, height - 12)
        candidates.append(CandidateMask(id="tray", mask=tray, source="synthetic"))
        junk_stage["tray"] = "green"
    if with_soil:
        soil = rect_mask(width, height, 30, 20, 120, 90)
        candidates.append(CandidateMask(id="soil", mask=soil, source="synthetic"))
        junk_stage["soil"] = "green"
    if with_plant:
        candidates.append(
            CandidateMask(id="plant", mask=union_bits(leaves), source="synthetic")
        )
        junk_stage["plant"] = "not_all"
    if with_container:
        candidates.append(
            CandidateMask(
                id="container", mask=union_bits(leaves[2:4]), source="synthetic"
            )
        )
        junk_stage["container"] = "multi_leaf"
    if with_sliver:
        half = int(rx5) - 2
        sliver = hline_mask(width, height, c5[1], c5[0] - half, c5[0] + half + 1)
        assert containment_fast(sliver, leaves[4]) == 1.0
        candidates.append(CandidateMask(id="sliver", mask=sliver, source="synthetic"))
        junk_stage["sliver"] = "correct_shape"

    pixels = np.full((height, width, 3), PAPER_RGB, dtype=np.uint8)
    if with_soil:
        pixels[rect_mask(width, height, 30, 20, 120, 90).bits] = SOIL_RGB
    if with_tray:
        pixels[rect_mask(width, height, 30, 430, width - 30, height - 12).bits] = TRAY_RGB
    pixels[union_bits(leaves).bits] = LEAF_RGB

    return SyntheticScene(
        image=RgbImage(pixels),
        candidates=candidates,
        leaf_ids=leaf_ids,
        leaf_masks=leaves,
        junk_stage=junk_stage,
        width=width,
        height=height,
    )


def containment_fast(inner: Bitmask, outer: Bitmask) -> float:
    inside = int(np.count_nonzero(inner.bits & outer.bits))
    return inside / inner.area


def write_scene_fixture(image_dir, masks_dir, stem: str, scene: SyntheticScene) -> None:
    """Persist a synthetic scene as an image file plus a scene document."""
    from PIL import Image

    from leafsieve import (
        SceneImageRef,
        scene_document_from_candidates,
        write_scene_document,
    )

    image_dir.mkdir(parents=True, exist_ok=True)
    masks_dir.mkdir(parents=True, exist_ok=True)
    Image.fromarray(scene.image.pixels).save(image_dir / f"{stem}.png")
    doc = scene_document_from_candidates(
        SceneImageRef(path=f"{stem}.png", width=scene.width, height=scene.height),
        scene.candidates,
    )
    write_scene_document(doc, masks_dir / f"{stem}.json")
