"""Batch export CLI: run the automatic mask generator over an image
directory and write one scene document per image, plus an export manifest
recording the exact generator settings."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .export import ExporterConfig, export_directory
from .scene import write_scene

__all__ = ["main"]


def build_parser() -> argparse.ArgumentParser:
    defaults = ExporterConfig()
    parser = argparse.ArgumentParser(
        prog="leafsieve-export",
        description="Export Segment Anything automatic masks as leafsieve scene documents.",
    )
    parser.add_argument("--image-dir", required=True)
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--points-per-side", type=int, default=defaults.points_per_side)
    parser.add_argument("--crop-layers", type=int, default=defaults.crop_n_layers)
    parser.add_argument("--model", default=defaults.model_variant, help="SAM variant (vit_h, vit_l, vit_b)")
    parser.add_argument("--checkpoint", help="path to the model weights")
    parser.add_argument("--device", default=defaults.device)
    return parser


def main(argv=None, generator_factory=None) -> int:
    """``generator_factory(cfg, checkpoint)`` may be injected for testing;
    the default builds the real Segment Anything generator."""
    args = build_parser().parse_args(argv)
    try:
        cfg = ExporterConfig(
            points_per_side=args.points_per_side,
            crop_n_layers=args.crop_layers,
            model_variant=args.model,
            device=args.device,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if generator_factory is None:
        from .backends import BackendUnavailableError, build_sam_generator

        if not args.checkpoint:
            print("error: --checkpoint is required to run the real model", file=sys.stderr)
            return 2
        try:
            generator = build_sam_generator(cfg, args.checkpoint)
        except BackendUnavailableError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    else:
        generator = generator_factory(cfg, args.checkpoint)

    records, failures = export_directory(args.image_dir, args.out_dir, generator, cfg)
    manifest = {
        "version": "leafsieve/1",
        "command": "export",
        "generator": {
            **dataclasses.asdict(cfg),
            "checkpoint": args.checkpoint,
            "other_hyperparameters": "library defaults",
        },
        "images": records,
        "totals": {
            "images": len(records),
            "masks": sum(r["masks"] for r in records),
            "failures": len(failures),
        },
    }
    write_scene(Path(args.out_dir) / "export_manifest.json", json.dumps(manifest, indent=2) + "\n")

    for record in records:
        print(f"{record['image']}: {record['masks']} masks")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
