"""File-format boundaries: scene interchange JSON, labelme annotations, image
decoding, and measurement CSVs.

One scene document per image. Loaders validate and reject rather than repair;
every error names the offending mask, shape, or CSV line.
"""

from __future__ import annotations

import csv
import json
import os
import warnings
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .color import RgbImage
from .filters import CandidateMask
from .mask import Bitmask, Polygon, RleMask, decode_rle, encode_rle, rasterize
from .metrics import MeasurementRecord

__all__ = [
    "SCENE_FORMAT_VERSION",
    "SceneFormatError",
    "RleValidationError",
    "SceneDimensionError",
    "DuplicateMaskIdError",
    "SceneImageRef",
    "SceneMaskEntry",
    "SceneDocument",
    "read_scene_document",
    "write_scene_document",
    "scene_document_from_candidates",
    "decode_scene_masks",
    "load_scene",
    "load_labelme",
    "load_image",
    "load_measurements",
    "atomic_write_text",
]

SCENE_FORMAT_VERSION = "leafsieve/1"


class SceneFormatError(ValueError):
    """Malformed or inconsistent scene document."""


class RleValidationError(SceneFormatError):
    """Mask run lengths do not describe the declared grid."""


class SceneDimensionError(SceneFormatError):
    """Mask dimensions disagree with the scene image."""


class DuplicateMaskIdError(SceneFormatError):
    """Two masks in one scene share an id."""


@dataclass(frozen=True)
class SceneImageRef:
    path: str
    width: int
    height: int
    sha256: str | None = None


@dataclass(frozen=True)
class SceneMaskEntry:
    id: str
    rle: RleMask
    score: float | None = None
    source: str = ""


@dataclass
class SceneDocument:
    """Validated in-memory form of one scene interchange file."""

    image: SceneImageRef
    masks: list[SceneMaskEntry] = field(default_factory=list)
    version: str = SCENE_FORMAT_VERSION

    def __post_init__(self) -> None:
        if self.version != SCENE_FORMAT_VERSION:
            raise SceneFormatError(
                f"unsupported scene format version {self.version!r}"
            )
        if self.image.width < 1 or self.image.height < 1:
            raise SceneFormatError(
                f"image dimensions must be positive, got "
                f"{self.image.width}x{self.image.height}"
            )
        seen: set[str] = set()
        for entry in self.masks:
            if entry.id in seen:
                raise DuplicateMaskIdError(f"duplicate mask id {entry.id!r}")
            seen.add(entry.id)
            if (entry.rle.width, entry.rle.height) != (
                self.image.width,
                self.image.height,
            ):
                raise SceneDimensionError(
                    f"mask {entry.id!r} is {entry.rle.width}x{entry.rle.height}, "
                    f"image is {self.image.width}x{self.image.height}"
                )

    def to_json_dict(self) -> dict:
        image: dict = {
            "path": self.image.path,
            "width": self.image.width,
            "height": self.image.height,
        }
        if self.image.sha256 is not None:
            image["sha256"] = self.image.sha256
        masks = []
        for entry in self.masks:
            item: dict = {
                "id": entry.id,
                "rle": {
                    "counts": list(entry.rle.counts),
                    "width": entry.rle.width,
                    "height": entry.rle.height,
                },
            }
            if entry.score is not None:
                item["score"] = entry.score
            item["source"] = entry.source
            masks.append(item)
        return {"version": self.version, "image": image, "masks": masks}


def _require(payload: dict, key: str, context: str):
    if key not in payload:
        raise SceneFormatError(f"{context}: missing field {key!r}")
    return payload[key]


def scene_document_from_json_dict(payload: dict) -> SceneDocument:
    if not isinstance(payload, dict):
        raise SceneFormatError("scene document must be a JSON object")
    version = _require(payload, "version", "scene")
    image_raw = _require(payload, "image", "scene")
    masks_raw = _require(payload, "masks", "scene")
    image = SceneImageRef(
        path=str(_require(image_raw, "path", "image")),
        width=int(_require(image_raw, "width", "image")),
        height=int(_require(image_raw, "height", "image")),
        sha256=image_raw.get("sha256"),
    )
    masks: list[SceneMaskEntry] = []
    for mask_raw in masks_raw:
        mask_id = str(_require(mask_raw, "id", "mask"))
        rle_raw = _require(mask_raw, "rle", f"mask {mask_id!r}")
        try:
            rle = RleMask(
                width=int(_require(rle_raw, "width", f"mask {mask_id!r} rle")),
                height=int(_require(rle_raw, "height", f"mask {mask_id!r} rle")),
                counts=tuple(_require(rle_raw, "counts", f"mask {mask_id!r} rle")),
            )
        except ValueError as exc:
            raise RleValidationError(f"mask {mask_id!r}: {exc}") from exc
        score = mask_raw.get("score")
        masks.append(
            SceneMaskEntry(
                id=mask_id,
                rle=rle,
                score=None if score is None else float(score),
                source=str(mask_raw.get("source", "")),
            )
        )
    return SceneDocument(image=image, masks=masks, version=str(version))


def read_scene_document(path) -> SceneDocument:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SceneFormatError(f"{path}: invalid JSON ({exc})") from exc
    return scene_document_from_json_dict(payload)


def atomic_write_text(path, text: str) -> None:
    """Write via a same-directory temp file + rename, so batch runs are
    resumable and readers never see partial files."""
    path = os.fspath(path)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_scene_document(doc: SceneDocument, path) -> None:
    """Serialize with canonical field ordering; byte-stable across round
    trips."""
    atomic_write_text(path, json.dumps(doc.to_json_dict(), indent=2) + "\n")


def scene_document_from_candidates(
    image: SceneImageRef, cands: list[CandidateMask]
) -> SceneDocument:
    masks = [
        SceneMaskEntry(
            id=c.id, rle=encode_rle(c.mask), score=c.score, source=c.source
        )
        for c in cands
    ]
    return SceneDocument(image=image, masks=masks)


def decode_scene_masks(doc: SceneDocument) -> list[CandidateMask]:
    """Decode every mask entry; empty masks are rejected at this boundary."""
    cands: list[CandidateMask] = []
    for entry in doc.masks:
        if entry.rle.foreground_area == 0:
            raise SceneFormatError(f"mask {entry.id!r} is empty")
        cands.append(
            CandidateMask(
                id=entry.id,
                mask=decode_rle(entry.rle),
                score=entry.score,
                source=entry.source,
            )
        )
    return cands


def load_scene(path, image_path=None) -> tuple[RgbImage, list[CandidateMask]]:
    """Load a scene document plus its image, fully validated.

    The image is read from ``image_path`` when given, else from the document's
    embedded path resolved against the document's directory.
    """
    doc = read_scene_document(path)
    if image_path is None:
        image_path = doc.image.path
        if not os.path.isabs(image_path):
            image_path = os.path.join(os.path.dirname(os.fspath(path)), image_path)
    img = load_image(image_path)
    if (img.width, img.height) != (doc.image.width, doc.image.height):
        raise SceneDimensionError(
            f"{path}: document says {doc.image.width}x{doc.image.height} but "
            f"image file is {img.width}x{img.height}"
        )
    return img, decode_scene_masks(doc)


def load_labelme(path, canvas: tuple[int, int] | None = None) -> list[tuple[str, Bitmask]]:
    """Rasterize the polygon shapes of a labelme annotation file.

    ``canvas`` is (width, height) and must match the document's own
    dimensions when given; None uses the document's dimensions. Non-polygon
    shapes are skipped with a warning.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SceneFormatError(f"{path}: invalid JSON ({exc})") from exc
    width = int(_require(payload, "imageWidth", "labelme"))
    height = int(_require(payload, "imageHeight", "labelme"))
    if canvas is not None and (width, height) != tuple(canvas):
        raise SceneDimensionError(
            f"{path}: annotation canvas {width}x{height} does not match "
            f"requested {canvas[0]}x{canvas[1]}"
        )
    shapes = payload.get("shapes", [])
    out: list[tuple[str, Bitmask]] = []
    skipped = 0
    for shape in shapes:
        if shape.get("shape_type") != "polygon":
            skipped += 1
            continue
        label = str(shape.get("label", ""))
        points = [(float(x), float(y)) for x, y in _require(shape, "points", "shape")]
        out.append((label, rasterize(Polygon(tuple(points)), width, height)))
    if skipped:
        warnings.warn(
            f"{path}: skipped {skipped} non-polygon shape(s)", stacklevel=2
        )
    return out


def load_image(path) -> RgbImage:
    """Decode a PNG or JPEG into 8-bit RGB.

    Alpha is dropped, grayscale expanded, and 16-bit PNGs reduced to their
    high byte.
    """
    with Image.open(path) as img:
        if img.format not in ("PNG", "JPEG"):
            raise ValueError(f"{path}: unsupported image format {img.format!r}")
        if img.mode in ("I", "I;16", "I;16B", "I;16L"):
            arr = np.asarray(img, dtype=np.uint32)
            img = Image.fromarray((arr >> 8).astype(np.uint8), mode="L")
        rgb = img.convert("RGB")
        return RgbImage(np.asarray(rgb))


_MEASUREMENT_COLUMNS = (
    "plant_id",
    "leaf_area_cm2",
    "leaf_count",
    "fresh_mass_g",
    "dry_mass_g",
)


def load_measurements(path) -> list[MeasurementRecord]:
    """Read per-plant physical measurements from a headered CSV.

    Required columns: plant_id, leaf_area_cm2, leaf_count, fresh_mass_g,
    dry_mass_g. Malformed rows are rejected with their line number.
    """
    records: list[MeasurementRecord] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty file, expected a CSV header")
        missing = [c for c in _MEASUREMENT_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise ValueError(f"{path}: header is missing columns {missing}")
        for row in reader:
            line = reader.line_num
            try:
                records.append(
                    MeasurementRecord(
                        plant_id=row["plant_id"].strip(),
                        leaf_area=float(row["leaf_area_cm2"]),
                        leaf_count=int(row["leaf_count"]),
                        fresh_mass=float(row["fresh_mass_g"]),
                        dry_mass=float(row["dry_mass_g"]),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}: line {line}: {exc}") from exc
    return records
