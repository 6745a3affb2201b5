"""Segmentation scoring: IoU matching, set-level precision/recall over IoU
threshold grids, best-match Dice, size summaries, and Pearson correlation of
pixel counts against physical plant measurements.

AP/AR here are unranked set-level precision/recall after one-to-one greedy
matching at each threshold, averaged over the grid and scaled to percent. The
pipeline emits no confidence ranking, so there is no PR-curve interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .mask import Bitmask, iou

__all__ = [
    "DEFAULT_THRESHOLDS",
    "parse_threshold_grid",
    "validate_thresholds",
    "EvalCounts",
    "Match",
    "EvalResult",
    "MeasurementRecord",
    "CorrelationResult",
    "MaskSizeSummary",
    "match_instances",
    "evaluate",
    "dsc",
    "best_match_dsc",
    "pearson",
    "correlation_matrix",
    "mask_size_summary",
]

# T in 0.50, 0.55, ... 0.95
DEFAULT_THRESHOLDS: tuple[float, ...] = tuple(t / 100 for t in range(50, 100, 5))


def validate_thresholds(thresholds: Sequence[float]) -> tuple[float, ...]:
    ts = tuple(float(t) for t in thresholds)
    if not ts:
        raise ValueError("threshold set must be non-empty")
    if any(not (0.0 < t < 1.0) for t in ts):
        raise ValueError(f"thresholds must lie in (0, 1), got {ts}")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError(f"thresholds must be strictly ascending, got {ts}")
    return ts


def parse_threshold_grid(spec: str) -> tuple[float, ...]:
    """Parse ``start:step:stop`` (both ends inclusive) into a threshold tuple.

    ``"0.5:0.05:0.95"`` is the stock grid; ``"0.75:0.05:0.75"`` is a single
    threshold.
    """
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"threshold grid must be start:step:stop, got {spec!r}")
    start, step, stop = (float(p) for p in parts)
    if step <= 0:
        raise ValueError(f"threshold step must be positive, got {step}")
    if stop < start:
        raise ValueError(f"threshold stop {stop} below start {start}")
    n = int(round((stop - start) / step)) + 1
    ts = tuple(round(start + i * step, 10) for i in range(n))
    return validate_thresholds(ts)


@dataclass(frozen=True)
class EvalCounts:
    """Instance-level detection counts at one IoU threshold."""

    tp: int
    fp: int
    fn: int

    def __add__(self, other: "EvalCounts") -> "EvalCounts":
        return EvalCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    def precision(self) -> float:
        """tp / (tp + fp); 1.0 when there are no predictions at all
        (vacuously nothing spurious was predicted)."""
        if self.tp + self.fp == 0:
            return 1.0
        return self.tp / (self.tp + self.fp)

    def recall(self) -> float:
        """tp / (tp + fn); 1.0 when there are no ground-truth instances
        (vacuously nothing was missed)."""
        if self.tp + self.fn == 0:
            return 1.0
        return self.tp / (self.tp + self.fn)


class Match(NamedTuple):
    pred_index: int
    gt_index: int
    iou: float


def _iou_table(preds: Sequence[Bitmask], gts: Sequence[Bitmask]) -> list[Match]:
    pairs: list[Match] = []
    for gi, gt in enumerate(gts):
        for pi, pred in enumerate(preds):
            overlap = iou(pred, gt)
            if overlap > 0.0:
                pairs.append(Match(pi, gi, overlap))
    return pairs


def _greedy_match(pairs: list[Match], n_preds: int, n_gts: int, t: float) -> list[Match]:
    # descending IoU, ties broken by (gt index, pred index) for determinism
    order = sorted(pairs, key=lambda m: (-m.iou, m.gt_index, m.pred_index))
    used_preds: set[int] = set()
    used_gts: set[int] = set()
    accepted: list[Match] = []
    for m in order:
        if m.iou < t:
            break
        if m.pred_index in used_preds or m.gt_index in used_gts:
            continue
        accepted.append(m)
        used_preds.add(m.pred_index)
        used_gts.add(m.gt_index)
    return accepted


def match_instances(
    preds: Sequence[Bitmask], gts: Sequence[Bitmask], t: float
) -> tuple[list[Match], EvalCounts]:
    """Greedy one-to-one matching of predictions to ground truths at IoU >= t.

    Pairs are accepted in descending IoU order with each prediction and each
    ground truth used at most once. Matched pairs are true positives,
    unmatched predictions false positives, unmatched ground truths false
    negatives.
    """
    matches = _greedy_match(_iou_table(preds, gts), len(preds), len(gts), t)
    tp = len(matches)
    return matches, EvalCounts(tp=tp, fp=len(preds) - tp, fn=len(gts) - tp)


@dataclass
class EvalResult:
    """Detection metrics over a threshold grid plus segmentation quality.

    Percent-scaled: AP/AR are mean precision/recall over the grid x100;
    ``ap_75``/``ar_75`` are None when 0.75 is not in the grid. ``mean_dsc``
    (in [0, 1]) is the mean over ground-truth instances of each one's
    best-match Dice score, None when there are no ground truths. ``matches``
    is the greedy correspondence over all overlapping pairs (no threshold),
    for inspection.
    """

    thresholds: tuple[float, ...]
    counts: list[EvalCounts]
    precisions: list[float]
    recalls: list[float]
    ap: float
    ar: float
    ap_75: float | None
    ar_75: float | None
    mean_dsc: float | None
    matches: list[Match] = field(default_factory=list)
    n_preds: int = 0
    n_gts: int = 0

    def to_json_dict(self) -> dict:
        return {
            "thresholds": list(self.thresholds),
            "per_threshold": [
                {
                    "t": t,
                    "tp": c.tp,
                    "fp": c.fp,
                    "fn": c.fn,
                    "precision": p,
                    "recall": r,
                }
                for t, c, p, r in zip(
                    self.thresholds, self.counts, self.precisions, self.recalls
                )
            ],
            "ap": self.ap,
            "ar": self.ar,
            "ap_75": self.ap_75,
            "ar_75": self.ar_75,
            "mean_dsc": self.mean_dsc,
            "matches": [
                {"pred": m.pred_index, "gt": m.gt_index, "iou": m.iou}
                for m in self.matches
            ],
            "n_preds": self.n_preds,
            "n_gts": self.n_gts,
        }


def evaluate(
    preds: Sequence[Bitmask],
    gts: Sequence[Bitmask],
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
) -> EvalResult:
    """Score one image's predictions against its ground truths."""
    ts = validate_thresholds(thresholds)
    pairs = _iou_table(preds, gts)

    counts: list[EvalCounts] = []
    precisions: list[float] = []
    recalls: list[float] = []
    for t in ts:
        accepted = _greedy_match(pairs, len(preds), len(gts), t)
        c = EvalCounts(tp=len(accepted), fp=len(preds) - len(accepted), fn=len(gts) - len(accepted))
        counts.append(c)
        precisions.append(c.precision())
        recalls.append(c.recall())

    ap = 100.0 * (math.fsum(precisions) / len(ts))
    ar = 100.0 * (math.fsum(recalls) / len(ts))
    ap_75 = ar_75 = None
    if 0.75 in ts:
        i = ts.index(0.75)
        ap_75 = 100.0 * precisions[i]
        ar_75 = 100.0 * recalls[i]

    mean = None
    if gts:
        mean, _ = best_match_dsc(preds, gts)

    return EvalResult(
        thresholds=ts,
        counts=counts,
        precisions=[100.0 * p for p in precisions],
        recalls=[100.0 * r for r in recalls],
        ap=ap,
        ar=ar,
        ap_75=ap_75,
        ar_75=ar_75,
        mean_dsc=mean,
        matches=_greedy_match(pairs, len(preds), len(gts), t=0.0),
        n_preds=len(preds),
        n_gts=len(gts),
    )


def dsc(a: Bitmask, b: Bitmask) -> float:
    """Pixel-level Dice similarity, ``2|a n b| / (|a| + |b|)``.

    Equals ``2*TP / (2*TP + FP + FN)`` with ``a`` as ground truth; undefined
    (error) when both masks are empty.
    """
    if a.bits.shape != b.bits.shape:
        raise ValueError(
            f"mask dimension mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    denom = a.area + b.area
    if denom == 0:
        raise ValueError("Dice of two empty masks is undefined")
    inter = int(np.count_nonzero(a.bits & b.bits))
    return 2.0 * inter / denom


def best_match_dsc(
    preds: Sequence[Bitmask], gts: Sequence[Bitmask]
) -> tuple[float, list[tuple[int, int | None, float]]]:
    """Mean over ground truths of the Dice score against the closest
    prediction.

    Predictions may be reused across ground truths (this measures mask
    accuracy only, not assignment); a ground truth with no predictions scores
    0. Returns the mean and a per-gt table of (gt index, best pred index or
    None, dsc).
    """
    if not gts:
        raise ValueError("best-match Dice requires at least one ground truth")
    table: list[tuple[int, int | None, float]] = []
    for gi, gt in enumerate(gts):
        best_score = 0.0
        best_pi: int | None = None
        for pi, pred in enumerate(preds):
            score = dsc(gt, pred)
            if score > best_score:
                best_score = score
                best_pi = pi
        table.append((gi, best_pi, best_score))
    mean = sum(row[2] for row in table) / len(gts)
    return mean, table


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError(f"inputs must be equal-length vectors, got {xs.shape} and {ys.shape}")
    if xs.size < 2:
        raise ValueError("correlation needs at least 2 samples")
    xc = xs - xs.mean()
    yc = ys - ys.mean()
    vx = float(np.dot(xc, xc))
    vy = float(np.dot(yc, yc))
    if vx == 0.0 or vy == 0.0:
        raise ValueError("correlation is undefined for zero-variance input")
    r = float(np.dot(xc, yc)) / math.sqrt(vx * vy)
    # clip float drift at the +-1 ends
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class MeasurementRecord:
    """Destructive ground truth for one harvested plant, plus image-derived
    pixel counts joined in later."""

    plant_id: str
    leaf_area: float
    leaf_count: int
    fresh_mass: float
    dry_mass: float
    pixels_manual: int | None = None
    pixels_auto: int | None = None

    def __post_init__(self) -> None:
        for name in ("leaf_area", "leaf_count", "fresh_mass", "dry_mass"):
            if getattr(self, name) < 0:
                raise ValueError(
                    f"plant {self.plant_id!r}: {name} must be non-negative"
                )
        for name in ("pixels_manual", "pixels_auto"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(
                    f"plant {self.plant_id!r}: {name} must be non-negative"
                )


@dataclass
class CorrelationResult:
    """Pairwise correlation matrix over selected record fields."""

    fields: list[str]
    matrix: np.ndarray
    n_used: int
    n_skipped: int
    used_plant_ids: list[str]

    def to_json_dict(self) -> dict:
        return {
            "fields": list(self.fields),
            "matrix": [[float(v) for v in row] for row in self.matrix],
            "n_used": self.n_used,
            "n_skipped": self.n_skipped,
            "used_plant_ids": list(self.used_plant_ids),
        }


def correlation_matrix(
    records: Sequence[MeasurementRecord], fields: Sequence[str]
) -> CorrelationResult:
    """Pairwise Pearson correlation over the selected fields.

    Records missing any selected field are skipped (the skip count is
    reported); fewer than 2 usable records is an error.
    """
    fields = list(fields)
    if not fields:
        raise ValueError("no fields selected")
    rows: list[list[float]] = []
    used_ids: list[str] = []
    skipped = 0
    for record in records:
        values = [getattr(record, f) for f in fields]
        if any(v is None for v in values):
            skipped += 1
            continue
        rows.append([float(v) for v in values])
        used_ids.append(record.plant_id)
    if len(rows) < 2:
        raise ValueError(
            f"need at least 2 records with all of {fields}, got {len(rows)}"
        )
    data = np.asarray(rows, dtype=np.float64)
    k = len(fields)
    matrix = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            r = pearson(data[:, i], data[:, j])
            matrix[i, j] = matrix[j, i] = r
    return CorrelationResult(fields, matrix, len(rows), skipped, used_ids)


class MaskSizeSummary(NamedTuple):
    mean: float
    median: float
    min: int
    max: int


def mask_size_summary(masks: Sequence[Bitmask]) -> MaskSizeSummary:
    """Pixel-area summary statistics over a mask collection."""
    if not masks:
        raise ValueError("size summary of no masks is undefined")
    areas = np.array([m.area for m in masks], dtype=np.int64)
    return MaskSizeSummary(
        mean=float(areas.mean()),
        median=float(np.median(areas)),
        min=int(areas.min()),
        max=int(areas.max()),
    )
