"""Binary instance masks: dense bitset representation, RLE codec, set algebra,
and polygon rasterization.

The dense boolean grid is the canonical in-memory form; run-length encoding is
used only at the I/O boundary. All types are immutable after construction and
all operations are pure functions, so callers may parallelize freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Bitmask",
    "RleMask",
    "Polygon",
    "CoverageMap",
    "area",
    "iou",
    "containment_fraction",
    "union_all",
    "coverage_map",
    "mean_coverage",
    "rasterize",
    "encode_rle",
    "decode_rle",
]


class Bitmask:
    """Immutable binary mask over a ``height x width`` pixel grid, row-major.

    The set-pixel count is computed once at construction, so ``area`` is O(1);
    the underlying array is copied and marked read-only.
    """

    __slots__ = ("_bits", "_area")

    def __init__(self, bits) -> None:
        arr = np.array(bits, dtype=bool, order="C", copy=True)
        if arr.ndim != 2:
            raise ValueError(f"mask grid must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(
                f"mask dimensions must be positive, got {arr.shape[1]}x{arr.shape[0]}"
            )
        arr.setflags(write=False)
        self._bits = arr
        self._area = int(np.count_nonzero(arr))

    @classmethod
    def zeros(cls, width: int, height: int) -> "Bitmask":
        return cls(np.zeros((height, width), dtype=bool))

    @classmethod
    def full(cls, width: int, height: int) -> "Bitmask":
        return cls(np.ones((height, width), dtype=bool))

    @property
    def bits(self) -> np.ndarray:
        """Read-only ``(height, width)`` boolean grid."""
        return self._bits

    @property
    def width(self) -> int:
        return self._bits.shape[1]

    @property
    def height(self) -> int:
        return self._bits.shape[0]

    @property
    def area(self) -> int:
        return self._area

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Bitmask):
            return NotImplemented
        return self._bits.shape == other._bits.shape and bool(
            np.array_equal(self._bits, other._bits)
        )

    __hash__ = None  # mutable-sized payload; not meant for dict keys

    def __repr__(self) -> str:
        return f"Bitmask({self.width}x{self.height}, area={self._area})"


@dataclass(frozen=True)
class RleMask:
    """Row-major run-length encoding of a binary mask.

    ``counts`` alternates background/foreground run lengths over the row-major
    pixel scan; the first count is background pixels and is the only one
    allowed to be zero (a scan starting with foreground).
    """

    width: int
    height: int
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        if self.width < 1 or self.height < 1:
            raise ValueError(
                f"RLE dimensions must be positive, got {self.width}x{self.height}"
            )
        if not counts:
            raise ValueError("RLE counts must be non-empty")
        if counts[0] < 0 or any(c < 1 for c in counts[1:]):
            raise ValueError(
                "RLE counts must be positive after the leading background count"
            )
        total = sum(counts)
        if total != self.width * self.height:
            raise ValueError(
                f"RLE counts sum to {total}, expected "
                f"{self.width}x{self.height} = {self.width * self.height}"
            )

    @property
    def foreground_area(self) -> int:
        """Set-pixel count, without decoding."""
        return sum(self.counts[1::2])


@dataclass(frozen=True)
class Polygon:
    """Ordered vertex ring in pixel units; fractional coordinates allowed."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        pts = tuple((float(x), float(y)) for x, y in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 3:
            raise ValueError(f"polygon needs at least 3 vertices, got {len(pts)}")


@dataclass(frozen=True)
class CoverageMap:
    """Per-pixel count of how many masks cover each pixel."""

    width: int
    height: int
    counts: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.counts, dtype=np.int32, order="C", copy=True)
        if arr.shape != (self.height, self.width):
            raise ValueError(
                f"coverage counts shape {arr.shape} does not match "
                f"{self.width}x{self.height}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)


def _check_same_dims(a: Bitmask, b: Bitmask) -> None:
    if a.bits.shape != b.bits.shape:
        raise ValueError(
            f"mask dimension mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def area(m: Bitmask) -> int:
    """Number of set pixels."""
    return m.area


def iou(a: Bitmask, b: Bitmask) -> float:
    """Intersection over union of two same-sized masks.

    Two empty masks have IoU 0 by convention ("no object" never matches).
    """
    _check_same_dims(a, b)
    inter = int(np.count_nonzero(a.bits & b.bits))
    union = a.area + b.area - inter
    if union == 0:
        return 0.0
    return inter / union


def containment_fraction(inner: Bitmask, outer: Bitmask) -> float:
    """Fraction of ``inner``'s area that lies inside ``outer``."""
    _check_same_dims(inner, outer)
    if inner.area == 0:
        raise ValueError("containment fraction of an empty mask is undefined")
    inter = int(np.count_nonzero(inner.bits & outer.bits))
    return inter / inner.area


def union_all(masks: list[Bitmask]) -> Bitmask:
    """Pixelwise OR of all masks; the total mask of all covered pixels."""
    if not masks:
        raise ValueError("union of an empty mask list is undefined")
    first = masks[0]
    out = np.zeros(first.bits.shape, dtype=bool)
    for m in masks:
        _check_same_dims(first, m)
        np.logical_or(out, m.bits, out=out)
    return Bitmask(out)


def coverage_map(
    masks: list[Bitmask], *, width: int | None = None, height: int | None = None
) -> CoverageMap:
    """Per-pixel count of covering masks.

    With an empty list, ``width`` and ``height`` must be given to size the
    all-zero map.
    """
    if not masks:
        if width is None or height is None:
            raise ValueError("coverage_map of no masks requires explicit dimensions")
        return CoverageMap(width, height, np.zeros((height, width), dtype=np.int32))
    first = masks[0]
    counts = np.zeros(first.bits.shape, dtype=np.int32)
    for m in masks:
        _check_same_dims(first, m)
        counts += m.bits
    return CoverageMap(first.width, first.height, counts)


def mean_coverage(m: Bitmask, cov: CoverageMap) -> float:
    """Mean coverage count over the set pixels of ``m``.

    At least 1.0 whenever ``m`` contributed to the map; values above 1 mean
    the mask shares pixels with other masks.
    """
    if m.area == 0:
        raise ValueError("mean coverage of an empty mask is undefined")
    if cov.counts.shape != m.bits.shape:
        raise ValueError(
            f"coverage map {cov.width}x{cov.height} does not match mask "
            f"{m.width}x{m.height}"
        )
    return float(cov.counts[m.bits].mean())


def rasterize(poly: Polygon, width: int, height: int) -> Bitmask:
    """Scanline even-odd fill of a polygon onto a ``width x height`` canvas.

    A pixel is set iff its center ``(x + 0.5, y + 0.5)`` lies inside the
    polygon; geometry outside the canvas is clipped by the canvas bounds.
    """
    if width < 1 or height < 1:
        raise ValueError(f"canvas dimensions must be positive, got {width}x{height}")
    pts = np.asarray(poly.points, dtype=np.float64)
    x1 = pts[:, 0]
    y1 = pts[:, 1]
    x2 = np.roll(x1, -1)
    y2 = np.roll(y1, -1)

    grid = np.zeros((height, width), dtype=bool)
    row_lo = max(0, int(math.floor(y1.min() - 0.5)))
    row_hi = min(height - 1, int(math.ceil(y1.max())))
    for y in range(row_lo, row_hi + 1):
        yc = y + 0.5
        crossing = (y1 > yc) != (y2 > yc)
        if not crossing.any():
            continue
        xs = (x2[crossing] - x1[crossing]) * (yc - y1[crossing]) / (
            y2[crossing] - y1[crossing]
        ) + x1[crossing]
        xs.sort()
        for k in range(0, len(xs) - 1, 2):
            # pixel centers x + 0.5 in [xs[k], xs[k+1]) are inside
            lo = max(0, int(math.ceil(xs[k] - 0.5)))
            hi = min(width - 1, int(math.ceil(xs[k + 1] - 0.5)) - 1)
            if hi >= lo:
                grid[y, lo : hi + 1] = True
    return Bitmask(grid)


def encode_rle(m: Bitmask) -> RleMask:
    """Encode a mask into row-major alternating background/foreground runs."""
    flat = m.bits.ravel()
    boundaries = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    edges = np.concatenate(([0], boundaries, [flat.size]))
    runs = np.diff(edges).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return RleMask(m.width, m.height, tuple(runs))


def decode_rle(r: RleMask) -> Bitmask:
    """Decode runs back into a dense mask; ``decode(encode(m)) == m``."""
    values = np.arange(len(r.counts), dtype=np.int64) % 2 == 1
    flat = np.repeat(values, np.asarray(r.counts, dtype=np.int64))
    return Bitmask(flat.reshape(r.height, r.width))
