"""Deterministic stub generator mimicking the automatic mask generator's
output records, so the adapter is testable without model weights."""

from __future__ import annotations

import numpy as np
import pytest
from PIL import Image


class StubGenerator:
    """Emits blob masks derived deterministically from the image content."""

    def __init__(self, points_per_side=32, crop_n_layers=1, n_masks=5):
        self.points_per_side = points_per_side
        self.crop_n_layers = crop_n_layers
        self.n_masks = n_masks
        self.calls = 0

    def generate(self, image: np.ndarray) -> list[dict]:
        self.calls += 1
        height, width = image.shape[:2]
        seed = int(image.astype(np.uint64).sum()) % (2**32)
        rng = np.random.default_rng(seed)
        records = []
        for k in range(self.n_masks):
            cx = float(rng.uniform(4, width - 4))
            cy = float(rng.uniform(4, height - 4))
            r = float(rng.uniform(2, min(width, height) / 3))
            ys, xs = np.mgrid[0:height, 0:width]
            segmentation = (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
            records.append(
                {
                    "segmentation": segmentation,
                    "area": int(segmentation.sum()),
                    "predicted_iou": float(rng.uniform(0.7, 1.04)),
                    "stability_score": float(rng.uniform(0.9, 1.0)),
                }
            )
        return records


@pytest.fixture
def stub_generator():
    return StubGenerator()


@pytest.fixture
def image_dir(tmp_path):
    directory = tmp_path / "images"
    directory.mkdir()
    rng = np.random.default_rng(11)
    for stem in ("plantA", "plantB", "plantC"):
        pixels = rng.integers(0, 256, size=(48, 64, 3), dtype=np.uint8)
        Image.fromarray(pixels).save(directory / f"{stem}.png")
    return directory
