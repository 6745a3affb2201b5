"""Batch command-line frontend: filter, eval, rasterize, and correlate over
directories of scenes.

Inputs pair up by filename stem (image.png <-> image.json). Scenes are
processed by a bounded worker pool; all machine outputs are JSON written
atomically, human summaries go to stdout and errors to stderr. Parallelism
never affects results: outputs are byte-identical for any --jobs value (the
run manifest's wall-time fields are the one timing-dependent exception).
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .filters import (
    STAGE_GREEN,
    STAGE_MULTI_LEAF,
    STAGE_NOT_ALL,
    STAGE_ORDER,
    STAGE_SHAPE,
    FilterConfig,
    run_pipeline,
)
from .io import (
    SceneDocument,
    SceneImageRef,
    SceneMaskEntry,
    atomic_write_text,
    decode_scene_masks,
    load_image,
    load_labelme,
    load_measurements,
    read_scene_document,
    scene_document_from_candidates,
    write_scene_document,
)
from .mask import encode_rle
from .metrics import (
    EvalCounts,
    correlation_matrix,
    evaluate,
    parse_threshold_grid,
)

__all__ = ["main"]

_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

# infrastructure files written next to scene outputs; never paired as scenes
_RESERVED_STEMS = ("filter_report", "run_manifest", "export_manifest")

_STAGE_ALIASES = {
    "green": STAGE_GREEN,
    "notall": STAGE_NOT_ALL,
    "not_all": STAGE_NOT_ALL,
    "shape": STAGE_SHAPE,
    "correct_shape": STAGE_SHAPE,
    "multileaf": STAGE_MULTI_LEAF,
    "multi_leaf": STAGE_MULTI_LEAF,
}


def _parse_stage_flag(text: str | None) -> list[str]:
    if text is None:
        return list(STAGE_ORDER)
    names = [t.strip() for t in text.split(",") if t.strip()]
    stages = []
    for name in names:
        if name not in _STAGE_ALIASES:
            raise ValueError(
                f"unknown stage {name!r}; valid: {sorted(set(_STAGE_ALIASES))}"
            )
        stages.append(_STAGE_ALIASES[name])
    return [s for s in STAGE_ORDER if s in stages]


def _default_jobs() -> int:
    env = os.environ.get("LEAFSIEVE_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _stems(directory: Path, suffixes) -> dict[str, Path]:
    found: dict[str, Path] = {}
    for path in sorted(directory.iterdir()):
        if (
            path.is_file()
            and path.suffix.lower() in suffixes
            and path.stem not in _RESERVED_STEMS
        ):
            found[path.stem] = path
    return found


def _pair_dirs(
    image_dir: Path, masks_dir: Path, skip_missing: bool
) -> tuple[list[tuple[str, Path, Path]], list[str]]:
    images = _stems(image_dir, _IMAGE_SUFFIXES)
    masks = _stems(masks_dir, (".json",))
    unpaired = sorted(set(images) ^ set(masks))
    pairs = [
        (stem, images[stem], masks[stem]) for stem in sorted(set(images) & set(masks))
    ]
    if unpaired and skip_missing:
        return pairs, []
    return pairs, unpaired


def _config_from_args(args) -> FilterConfig:
    return FilterConfig(
        hue_min=args.hue_min,
        hue_max=args.hue_max,
        sat_min=args.sat_min,
        whole_plant_min_masks=args.whole_plant_min_masks,
        whole_plant_iou=args.whole_plant_iou,
        shape_ratio_min=args.shape_ratio_min,
        multileaf_mean_coverage=args.multileaf_mean_coverage,
        containment_keep=args.containment_keep,
        containment_remove=args.containment_remove,
    )


def _config_hash(cfg: FilterConfig, stages: list[str]) -> str:
    payload = json.dumps(
        {"config": dataclasses.asdict(cfg), "stages": stages}, sort_keys=True
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def cmd_filter(args) -> int:
    try:
        stages = _parse_stage_flag(args.stages)
        cfg = _config_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.image_dir:
        pairs, unpaired = _pair_dirs(
            Path(args.image_dir), Path(args.masks_dir), args.skip_missing
        )
        if unpaired:
            for stem in unpaired:
                print(f"error: unpaired input {stem!r}", file=sys.stderr)
            return 2
    else:
        pairs = [(Path(args.masks).stem, Path(args.image), Path(args.masks))]

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    needs_image = STAGE_GREEN in stages

    def process(pair):
        stem, image_path, masks_path = pair
        started = time.perf_counter()
        doc = read_scene_document(masks_path)
        scene = None
        if needs_image:
            scene = load_image(image_path)
            if (scene.width, scene.height) != (doc.image.width, doc.image.height):
                raise ValueError(
                    f"{stem}: image is {scene.width}x{scene.height} but scene "
                    f"document says {doc.image.width}x{doc.image.height}"
                )
        cands = decode_scene_masks(doc)
        survivors, report = run_pipeline(scene, cands, cfg, stages)
        write_scene_document(
            scene_document_from_candidates(doc.image, survivors),
            out_dir / f"{stem}.json",
        )
        record = {
            "stem": stem,
            "image": str(image_path),
            "masks": str(masks_path),
            "input_masks": len(cands),
            "survivor_counts": dict(report.survivor_counts),
            "survivors": len(survivors),
            "wall_time_s": round(time.perf_counter() - started, 6),
        }
        return record, report

    results: dict[str, tuple[dict, object]] = {}
    failures: list[tuple[str, str]] = []
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        futures = {pool.submit(process, pair): pair[0] for pair in pairs}
        for future, stem in futures.items():
            try:
                results[stem] = future.result()
            except Exception as exc:  # noqa: BLE001 - batch keeps going
                failures.append((stem, str(exc)))

    report_payload = {
        "version": "leafsieve/1",
        "config_sha256": _config_hash(cfg, stages),
        "stages": stages,
        "reports": {
            stem: results[stem][1].to_json_dict() for stem in sorted(results)
        },
    }
    report_path = Path(args.report) if args.report else out_dir / "filter_report.json"
    atomic_write_text(report_path, json.dumps(report_payload, indent=2) + "\n")

    records = [results[stem][0] for stem in sorted(results)]
    manifest = {
        "version": "leafsieve/1",
        "command": "filter",
        "config_sha256": report_payload["config_sha256"],
        "stages": stages,
        "images": records,
        "totals": {
            "images": len(records),
            "input_masks": sum(r["input_masks"] for r in records),
            "survivors": sum(r["survivors"] for r in records),
            "wall_time_s": round(sum(r["wall_time_s"] for r in records), 6),
        },
    }
    atomic_write_text(
        out_dir / "run_manifest.json", json.dumps(manifest, indent=2) + "\n"
    )

    for record in records:
        print(f"{record['stem']}: {record['input_masks']} -> {record['survivors']} masks")
    if failures:
        for stem, message in sorted(failures):
            print(f"error: {stem}: {message}", file=sys.stderr)
        return 1
    return 0


def cmd_eval(args) -> int:
    try:
        thresholds = parse_threshold_grid(args.thresholds)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    preds = _stems(Path(args.pred_dir), (".json",))
    gts = _stems(Path(args.gt_dir), (".json",))
    unpaired = sorted(set(preds) ^ set(gts))
    if unpaired:
        for stem in unpaired:
            print(f"error: unpaired input {stem!r}", file=sys.stderr)
        return 2

    per_image: dict[str, dict] = {}
    pooled = [EvalCounts(0, 0, 0) for _ in thresholds]
    dsc_weighted = 0.0
    total_gts = 0
    failures: list[tuple[str, str]] = []
    for stem in sorted(preds):
        try:
            doc = read_scene_document(preds[stem])
            pred_masks = [c.mask for c in decode_scene_masks(doc)]
            shapes = load_labelme(
                gts[stem], canvas=(doc.image.width, doc.image.height)
            )
            # degenerate polygons rasterize empty and are not instances
            gt_masks = [m for _, m in shapes if m.area > 0]
            if len(gt_masks) < len(shapes):
                print(
                    f"warning: {stem}: skipped {len(shapes) - len(gt_masks)} "
                    "degenerate ground-truth polygon(s)",
                    file=sys.stderr,
                )
            result = evaluate(pred_masks, gt_masks, thresholds)
        except Exception as exc:  # noqa: BLE001 - batch keeps going
            failures.append((stem, str(exc)))
            continue
        per_image[stem] = result.to_json_dict()
        pooled = [a + b for a, b in zip(pooled, result.counts)]
        if result.mean_dsc is not None:
            dsc_weighted += result.mean_dsc * result.n_gts
            total_gts += result.n_gts

    precisions = [c.precision() for c in pooled]
    recalls = [c.recall() for c in pooled]
    ap = 100.0 * (math.fsum(precisions) / len(thresholds))
    ar = 100.0 * (math.fsum(recalls) / len(thresholds))
    ap_75 = ar_75 = None
    if 0.75 in thresholds:
        i = thresholds.index(0.75)
        ap_75 = 100.0 * precisions[i]
        ar_75 = 100.0 * recalls[i]
    mean_dsc = dsc_weighted / total_gts if total_gts else None

    payload = {
        "version": "leafsieve/1",
        "thresholds": list(thresholds),
        "per_image": per_image,
        "pooled": {
            "per_threshold": [
                {"t": t, "tp": c.tp, "fp": c.fp, "fn": c.fn,
                 "precision": 100.0 * p, "recall": 100.0 * r}
                for t, c, p, r in zip(thresholds, pooled, precisions, recalls)
            ],
            "ap": ap,
            "ar": ar,
            "ap_75": ap_75,
            "ar_75": ar_75,
            "mean_dsc": mean_dsc,
            "n_gts": total_gts,
        },
    }
    atomic_write_text(args.out, json.dumps(payload, indent=2) + "\n")

    print(f"AP       {ap:.1f}")
    print(f"AP_75    {'-' if ap_75 is None else f'{ap_75:.1f}'}")
    print(f"AR       {ar:.1f}")
    print(f"AR_75    {'-' if ar_75 is None else f'{ar_75:.1f}'}")
    print(f"mean_DSC {'-' if mean_dsc is None else f'{mean_dsc:.3f}'}")

    if failures:
        for stem, message in sorted(failures):
            print(f"error: {stem}: {message}", file=sys.stderr)
        return 1
    return 0


def cmd_rasterize(args) -> int:
    labelme_dir = Path(args.labelme_dir)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    annotations = _stems(labelme_dir, (".json",))
    if not annotations:
        print(f"error: no annotation files in {labelme_dir}", file=sys.stderr)
        return 2

    failures: list[tuple[str, str]] = []
    for stem, path in sorted(annotations.items()):
        try:
            with open(path, "r", encoding="utf-8") as fh:
                payload = json.load(fh)
            shapes = load_labelme(path)
            width = int(payload["imageWidth"])
            height = int(payload["imageHeight"])
            image_path = payload.get("imagePath") or f"{stem}.png"
        except Exception as exc:  # noqa: BLE001 - batch keeps going
            failures.append((stem, str(exc)))
            continue
        entries = []
        empty = 0
        for index, (label, mask) in enumerate(shapes):
            if mask.area == 0:
                empty += 1
                continue
            entries.append(
                SceneMaskEntry(
                    id=f"{index:03d}_{label}" if label else f"{index:03d}",
                    rle=encode_rle(mask),
                    source="labelme",
                )
            )
        doc = SceneDocument(
            image=SceneImageRef(path=image_path, width=width, height=height),
            masks=entries,
        )
        write_scene_document(doc, out_dir / f"{stem}.json")
        note = ""
        if empty:
            note = f" ({empty} degenerate polygon(s) skipped)"
        if not entries:
            print(f"warning: {stem}: no masks produced", file=sys.stderr)
        print(f"{stem}: {len(entries)} masks{note}")
    if failures:
        for stem, message in sorted(failures):
            print(f"error: {stem}: {message}", file=sys.stderr)
        return 1
    return 0


def _scene_pixel_count(path: Path) -> int:
    doc = read_scene_document(path)
    return sum(entry.rle.foreground_area for entry in doc.masks)


def cmd_correlate(args) -> int:
    try:
        records = load_measurements(args.measurements)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    sources: dict[str, Path] = {}
    for item in args.pixels_from:
        if "=" not in item:
            print(
                f"error: --pixels-from expects name=dir with name manual|auto, got {item!r}",
                file=sys.stderr,
            )
            return 2
        name, _, directory = item.partition("=")
        if name not in ("manual", "auto"):
            print(f"error: unknown pixel source {name!r} (use manual or auto)", file=sys.stderr)
            return 2
        sources[name] = Path(directory)

    join_failures: list[str] = []
    joined = []
    pixel_counts: dict[str, dict[str, int]] = {}
    for record in records:
        updates: dict[str, int | None] = {}
        for name, directory in sources.items():
            scene_path = directory / f"{record.plant_id}.json"
            field = "pixels_manual" if name == "manual" else "pixels_auto"
            if scene_path.is_file():
                count = _scene_pixel_count(scene_path)
                updates[field] = count
                pixel_counts.setdefault(record.plant_id, {})[name] = count
            else:
                join_failures.append(f"{record.plant_id} ({name})")
        joined.append(dataclasses.replace(record, **updates))

    fields = ["leaf_area", "dry_mass"]
    if "manual" in sources:
        fields.append("pixels_manual")
    if "auto" in sources:
        fields.append("pixels_auto")
    try:
        corr = correlation_matrix(joined, fields)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    payload = corr.to_json_dict()
    payload["version"] = "leafsieve/1"
    payload["pixel_counts"] = {
        pid: pixel_counts[pid] for pid in sorted(pixel_counts)
    }
    payload["join_failures"] = sorted(join_failures)
    atomic_write_text(args.out, json.dumps(payload, indent=2) + "\n")

    for failure in sorted(join_failures):
        print(f"warning: no pixel count for {failure}", file=sys.stderr)
    print(f"correlated {corr.n_used} plants ({corr.n_skipped} skipped)")
    for i, a in enumerate(fields):
        for j in range(i + 1, len(fields)):
            print(f"r({a}, {fields[j]}) = {corr.matrix[i][j]:.3f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leafsieve",
        description="Filter candidate instance masks down to leaf objects and "
        "evaluate segmentations against polygon ground truth.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    defaults = FilterConfig()

    p_filter = sub.add_parser("filter", help="run the filtering pipeline over scenes")
    src = p_filter.add_mutually_exclusive_group(required=True)
    src.add_argument("--image", help="single input image")
    src.add_argument("--image-dir", help="directory of input images")
    msk = p_filter.add_mutually_exclusive_group(required=True)
    msk.add_argument("--masks", help="single scene document")
    msk.add_argument("--masks-dir", help="directory of scene documents")
    p_filter.add_argument("--out-dir", required=True)
    p_filter.add_argument("--report", help="filter report path (default: OUT_DIR/filter_report.json)")
    p_filter.add_argument(
        "--stages",
        default=None,
        help="comma-separated subset of green,notall,shape,multileaf (default all; '' = none)",
    )
    p_filter.add_argument("--hue-min", type=float, default=defaults.hue_min)
    p_filter.add_argument("--hue-max", type=float, default=defaults.hue_max)
    p_filter.add_argument("--sat-min", type=float, default=defaults.sat_min)
    p_filter.add_argument(
        "--whole-plant-min-masks", type=int, default=defaults.whole_plant_min_masks
    )
    p_filter.add_argument(
        "--whole-plant-iou", type=float, default=defaults.whole_plant_iou
    )
    p_filter.add_argument(
        "--shape-ratio-min", type=float, default=defaults.shape_ratio_min
    )
    p_filter.add_argument(
        "--multileaf-mean-coverage",
        type=float,
        default=defaults.multileaf_mean_coverage,
    )
    p_filter.add_argument(
        "--containment-keep", type=float, default=defaults.containment_keep
    )
    p_filter.add_argument(
        "--containment-remove", type=float, default=defaults.containment_remove
    )
    p_filter.add_argument("--jobs", type=int, default=_default_jobs())
    p_filter.add_argument("--skip-missing", action="store_true")
    p_filter.set_defaults(func=cmd_filter)

    p_eval = sub.add_parser("eval", help="score prediction scenes against labelme ground truth")
    p_eval.add_argument("--pred-dir", required=True)
    p_eval.add_argument("--gt-dir", required=True)
    p_eval.add_argument("--thresholds", default="0.5:0.05:0.95")
    p_eval.add_argument("--out", required=True)
    p_eval.set_defaults(func=cmd_eval)

    p_rast = sub.add_parser("rasterize", help="convert labelme annotations to scene documents")
    p_rast.add_argument("--labelme-dir", required=True)
    p_rast.add_argument("--out-dir", required=True)
    p_rast.set_defaults(func=cmd_rasterize)

    p_corr = sub.add_parser("correlate", help="correlate pixel counts with physical measurements")
    p_corr.add_argument("--measurements", required=True)
    p_corr.add_argument(
        "--pixels-from",
        action="append",
        required=True,
        metavar="NAME=DIR",
        help="pixel-count source: manual=DIR and/or auto=DIR of scene documents keyed by plant id",
    )
    p_corr.add_argument("--out", required=True)
    p_corr.set_defaults(func=cmd_correlate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
