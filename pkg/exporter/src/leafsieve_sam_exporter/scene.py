"""Scene-document serialization for the "leafsieve/1" wire format.

Field order and formatting mirror the consumer's canonical serialization
byte-for-byte, so a read/rewrite on the consumer side is a fixed point.
"""

from __future__ import annotations

import json
import os

__all__ = ["SCENE_FORMAT_VERSION", "scene_json", "write_scene"]

SCENE_FORMAT_VERSION = "leafsieve/1"


def scene_json(
    image_path: str,
    width: int,
    height: int,
    masks: list[dict],
    sha256: str | None = None,
) -> str:
    """Render one scene document; each mask dict needs ``id``, ``counts``,
    and optionally ``score`` and ``source``."""
    image: dict = {"path": image_path, "width": width, "height": height}
    if sha256 is not None:
        image["sha256"] = sha256
    entries = []
    for mask in masks:
        counts = [int(c) for c in mask["counts"]]
        if sum(counts) != width * height:
            raise ValueError(
                f"mask {mask['id']!r}: counts sum {sum(counts)} != {width * height}"
            )
        entry: dict = {
            "id": str(mask["id"]),
            "rle": {"counts": counts, "width": width, "height": height},
        }
        if mask.get("score") is not None:
            entry["score"] = float(mask["score"])
        entry["source"] = str(mask.get("source", ""))
        entries.append(entry)
    document = {"version": SCENE_FORMAT_VERSION, "image": image, "masks": entries}
    return json.dumps(document, indent=2) + "\n"


def write_scene(path, text: str) -> None:
    """Atomic write (same-directory temp file + rename)."""
    path = os.fspath(path)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)
