"""Four-stage candidate-mask filtering pipeline with per-stage audit reporting.

Candidate masks from an exhaustive segmenter are reduced to leaf objects by,
in fixed order:

1. ``green``         -- keep candidates whose mean hue/saturation look like
                        plant material,
2. ``not_all``       -- drop candidates that nearly equal the union of all
                        candidates (whole-plant segmentations),
3. ``correct_shape`` -- drop candidates far too sparse for their minimum
                        enclosing circle (slivers, scribbles),
4. ``multi_leaf``    -- drop duplicate container masks that cover several
                        other candidates without being a leaf themselves.

Each stage only removes candidates, never mutates or adds them, and records
why each removal happened.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .color import RgbImage, mask_hsv_stats
from .geometry import shape_ratio
from .mask import (
    Bitmask,
    containment_fraction,
    coverage_map,
    iou,
    mean_coverage,
    union_all,
)

__all__ = [
    "STAGE_GREEN",
    "STAGE_NOT_ALL",
    "STAGE_SHAPE",
    "STAGE_MULTI_LEAF",
    "STAGE_ORDER",
    "CandidateMask",
    "FilterConfig",
    "Removal",
    "FilterReport",
    "filter_green",
    "filter_whole_plant",
    "filter_shape",
    "filter_multi_leaf",
    "run_pipeline",
]

STAGE_GREEN = "green"
STAGE_NOT_ALL = "not_all"
STAGE_SHAPE = "correct_shape"
STAGE_MULTI_LEAF = "multi_leaf"
STAGE_ORDER: tuple[str, ...] = (
    STAGE_GREEN,
    STAGE_NOT_ALL,
    STAGE_SHAPE,
    STAGE_MULTI_LEAF,
)


@dataclass(frozen=True)
class CandidateMask:
    """A mask candidate flowing through the pipeline: identity, bits, optional
    segmenter quality score, and provenance."""

    id: str
    mask: Bitmask
    score: float | None = None
    source: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("candidate id must be non-empty")
        if self.mask.area == 0:
            raise ValueError(f"candidate {self.id!r} has an empty mask")
        if self.score is not None and not (0.0 <= self.score <= 1.0):
            raise ValueError(f"candidate {self.id!r} score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class FilterConfig:
    """All filter thresholds in one record.

    Boundary semantics: the hue interval is closed, saturation strictly
    greater, whole-plant IoU strictly greater, shape ratio strictly less
    removes, mean coverage strictly greater flags, containment inclusive.
    """

    hue_min: float = 35.0
    hue_max: float = 75.0
    sat_min: float = 35.0
    whole_plant_min_masks: int = 3
    whole_plant_iou: float = 0.90
    shape_ratio_min: float = 0.10
    multileaf_mean_coverage: float = 1.5
    containment_keep: float = 0.90
    containment_remove: float = 0.90

    def __post_init__(self) -> None:
        if not (0 <= self.hue_min < self.hue_max < 180):
            raise ValueError(
                f"need 0 <= hue_min < hue_max < 180, got {self.hue_min}..{self.hue_max}"
            )
        for name in ("whole_plant_iou", "shape_ratio_min", "containment_keep", "containment_remove"):
            value = getattr(self, name)
            if not (0 < value <= 1):
                raise ValueError(f"{name}={value} outside (0, 1]")
        if self.multileaf_mean_coverage <= 1:
            raise ValueError(
                f"multileaf_mean_coverage={self.multileaf_mean_coverage} must exceed 1"
            )
        if self.whole_plant_min_masks < 1:
            raise ValueError("whole_plant_min_masks must be >= 1")


@dataclass(frozen=True)
class Removal:
    """One removed candidate with the statistics that triggered the removal."""

    id: str
    stats: dict[str, float]


@dataclass
class FilterReport:
    """Audit of one pipeline run: removals per stage plus survivors.

    Removed ids and survivors always partition the input ids exactly.
    """

    input_ids: list[str]
    stages_run: list[str]
    removed: dict[str, list[Removal]] = field(default_factory=dict)
    survivors: list[str] = field(default_factory=list)
    survivor_counts: dict[str, int] = field(default_factory=dict)

    def removed_ids(self, stage: str) -> list[str]:
        return [r.id for r in self.removed.get(stage, [])]

    def to_json_dict(self) -> dict:
        return {
            "input_ids": list(self.input_ids),
            "stages_run": list(self.stages_run),
            "removed": {
                stage: [{"id": r.id, **r.stats} for r in removals]
                for stage, removals in self.removed.items()
            },
            "survivors": list(self.survivors),
            "survivor_counts": dict(self.survivor_counts),
        }


def filter_green(
    scene: RgbImage, cands: list[CandidateMask], cfg: FilterConfig
) -> tuple[list[CandidateMask], list[Removal]]:
    """Keep candidates whose mean hue lies in [hue_min, hue_max] and whose
    mean saturation exceeds sat_min."""
    kept: list[CandidateMask] = []
    removed: list[Removal] = []
    for cand in cands:
        stats = mask_hsv_stats(scene, cand.mask)
        green = (
            cfg.hue_min <= stats.mean_hue <= cfg.hue_max
            and stats.mean_saturation > cfg.sat_min
        )
        if green:
            kept.append(cand)
        else:
            removed.append(
                Removal(
                    cand.id,
                    {
                        "mean_hue": stats.mean_hue,
                        "mean_saturation": stats.mean_saturation,
                    },
                )
            )
    return kept, removed


def filter_whole_plant(
    cands: list[CandidateMask], cfg: FilterConfig
) -> tuple[list[CandidateMask], list[Removal]]:
    """Remove candidates that nearly equal the union of all candidates.

    Only runs when at least ``whole_plant_min_masks`` candidates are present
    (fewer could legitimately be one object); the union includes the candidate
    under test.
    """
    if len(cands) < cfg.whole_plant_min_masks:
        return list(cands), []
    total = union_all([c.mask for c in cands])
    kept: list[CandidateMask] = []
    removed: list[Removal] = []
    for cand in cands:
        overlap = iou(cand.mask, total)
        if overlap > cfg.whole_plant_iou:
            removed.append(Removal(cand.id, {"iou_vs_union": overlap}))
        else:
            kept.append(cand)
    return kept, removed


def filter_shape(
    cands: list[CandidateMask], cfg: FilterConfig
) -> tuple[list[CandidateMask], list[Removal]]:
    """Remove candidates whose area is under ``shape_ratio_min`` of their
    minimum enclosing circle's area."""
    kept: list[CandidateMask] = []
    removed: list[Removal] = []
    for cand in cands:
        ratio = shape_ratio(cand.mask)
        if ratio < cfg.shape_ratio_min:
            removed.append(Removal(cand.id, {"shape_ratio": ratio}))
        else:
            kept.append(cand)
    return kept, removed


def filter_multi_leaf(
    cands: list[CandidateMask], cfg: FilterConfig
) -> tuple[list[CandidateMask], list[Removal]]:
    """Remove duplicate masks that span several other candidates.

    A candidate whose mean coverage exceeds ``multileaf_mean_coverage`` is a
    duplicate suspect. It is still kept when it sits almost entirely inside a
    single other candidate (an individual leaf under a container mask); it is
    removed when its area is instead covered by the union of the others (a
    container spanning several leaves). Suspects failing both tests are kept.

    All statistics are measured against the full input set, then removals are
    applied at once; there is no cascading re-evaluation.
    """
    if len(cands) < 2:
        return list(cands), []
    cov = coverage_map([c.mask for c in cands])
    removed: list[Removal] = []
    removed_ids: set[str] = set()
    for cand in cands:
        coverage = mean_coverage(cand.mask, cov)
        if coverage <= cfg.multileaf_mean_coverage:
            continue
        others = [c for c in cands if c.id != cand.id]
        best_single = max(
            containment_fraction(cand.mask, other.mask) for other in others
        )
        if best_single >= cfg.containment_keep:
            continue
        union_fraction = containment_fraction(
            cand.mask, union_all([c.mask for c in others])
        )
        if union_fraction >= cfg.containment_remove:
            removed.append(
                Removal(
                    cand.id,
                    {
                        "mean_coverage": coverage,
                        "max_single_containment": best_single,
                        "union_containment": union_fraction,
                    },
                )
            )
            removed_ids.add(cand.id)
    kept = [c for c in cands if c.id not in removed_ids]
    return kept, removed


_STAGE_FUNCS = {
    STAGE_NOT_ALL: filter_whole_plant,
    STAGE_SHAPE: filter_shape,
    STAGE_MULTI_LEAF: filter_multi_leaf,
}


def normalize_stages(stages) -> list[str]:
    """Validate a stage subset and return it in canonical pipeline order."""
    if stages is None:
        return list(STAGE_ORDER)
    requested = list(stages)
    unknown = [s for s in requested if s not in STAGE_ORDER]
    if unknown:
        raise ValueError(f"unknown stages {unknown}; valid stages are {list(STAGE_ORDER)}")
    return [s for s in STAGE_ORDER if s in requested]


def run_pipeline(
    scene: RgbImage | None,
    cands: list[CandidateMask],
    cfg: FilterConfig | None = None,
    stages=None,
) -> tuple[list[CandidateMask], FilterReport]:
    """Apply the selected stages in canonical order and report every decision.

    ``stages`` may be any subset of :data:`STAGE_ORDER` (None means all four);
    an empty subset passes every candidate through, giving the unfiltered
    baseline. ``scene`` may be None only when the green stage is not selected.
    """
    cfg = cfg or FilterConfig()
    ordered = normalize_stages(stages)

    ids = [c.id for c in cands]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValueError(f"duplicate candidate ids: {dupes}")
    if STAGE_GREEN in ordered and scene is None:
        raise ValueError("the green stage requires the scene image")

    report = FilterReport(input_ids=ids, stages_run=ordered)
    current = list(cands)
    for stage in ordered:
        if stage == STAGE_GREEN:
            current, removed = filter_green(scene, current, cfg)
        else:
            current, removed = _STAGE_FUNCS[stage](current, cfg)
        report.removed[stage] = removed
        report.survivor_counts[stage] = len(current)
    report.survivors = [c.id for c in current]
    return current, report
