"""RGB to HSV conversion and per-mask color statistics for the green filter.

Hue is expressed in half-degrees ``[0, 180)`` and saturation/value in
``[0, 255]`` (the 8-bit OpenCV scaling); the stock filter thresholds
(hue 35..75, saturation > 35) are written in this convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mask import Bitmask

__all__ = ["RgbImage", "HsvStats", "rgb_to_hsv", "mask_hsv_stats"]


class RgbImage:
    """Immutable 8-bit RGB image, shape ``(height, width, 3)``."""

    __slots__ = ("_pixels",)

    def __init__(self, pixels) -> None:
        arr = np.array(pixels, order="C", copy=True)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"image must have shape (h, w, 3), got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image dimensions must be positive, got {arr.shape}")
        if arr.dtype != np.uint8:
            if arr.min() < 0 or arr.max() > 255:
                raise ValueError("channel values must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        arr.setflags(write=False)
        self._pixels = arr

    @property
    def pixels(self) -> np.ndarray:
        return self._pixels

    @property
    def width(self) -> int:
        return self._pixels.shape[1]

    @property
    def height(self) -> int:
        return self._pixels.shape[0]

    def __repr__(self) -> str:
        return f"RgbImage({self.width}x{self.height})"


@dataclass(frozen=True)
class HsvStats:
    """Mean hue/saturation over a mask region."""

    mean_hue: float
    mean_saturation: float
    pixel_count: int

    def __post_init__(self) -> None:
        if not (0.0 <= self.mean_hue < 180.0):
            raise ValueError(f"mean hue {self.mean_hue} outside [0, 180)")
        if not (0.0 <= self.mean_saturation <= 255.0):
            raise ValueError(f"mean saturation {self.mean_saturation} outside [0, 255]")
        if self.pixel_count < 1:
            raise ValueError("pixel count must be positive")


def _hsv_channels(rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized HSV over an ``(n, 3)`` float64 RGB array.

    Hue of achromatic pixels is 0; saturation of black is 0.
    """
    r, g, b = rgb[:, 0], rgb[:, 1], rgb[:, 2]
    v = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    delta = v - mn

    safe_v = np.where(v > 0, v, 1.0)
    s = np.where(v > 0, delta / safe_v * 255.0, 0.0)

    safe_d = np.where(delta > 0, delta, 1.0)
    h_deg = np.select(
        [delta == 0, v == r, v == g],
        [
            np.zeros_like(v),
            60.0 * (g - b) / safe_d,
            60.0 * (2.0 + (b - r) / safe_d),
        ],
        default=60.0 * (4.0 + (r - g) / safe_d),
    )
    h_deg = np.where(h_deg < 0, h_deg + 360.0, h_deg)
    h = h_deg / 2.0
    # sums that round up to exactly 360 degrees wrap back to hue 0
    h = np.where(h >= 180.0, 0.0, h)
    return h, s, v


def rgb_to_hsv(r: float, g: float, b: float) -> tuple[float, float, float]:
    """Convert one RGB triple (each in [0, 255]) to scaled HSV.

    Returns ``(h, s, v)`` with hue in half-degrees ``[0, 180)`` and
    saturation/value in ``[0, 255]``.
    """
    for name, value in (("r", r), ("g", g), ("b", b)):
        if not (0 <= value <= 255):
            raise ValueError(f"channel {name}={value} outside [0, 255]")
    arr = np.array([[r, g, b]], dtype=np.float64)
    h, s, v = _hsv_channels(arr)
    return float(h[0]), float(s[0]), float(v[0])


def mask_hsv_stats(img: RgbImage, m: Bitmask) -> HsvStats:
    """Arithmetic mean of per-pixel hue and saturation over the mask's pixels.

    Green sits mid-range in hue, far from the 0/180 wrap, so a plain
    (non-circular) mean is used.
    """
    if (img.height, img.width) != (m.height, m.width):
        raise ValueError(
            f"image {img.width}x{img.height} does not match mask {m.width}x{m.height}"
        )
    if m.area == 0:
        raise ValueError("color statistics of an empty mask are undefined")
    selected = img.pixels[m.bits].astype(np.float64)
    h, s, _ = _hsv_channels(selected)
    return HsvStats(float(h.mean()), float(s.mean()), int(selected.shape[0]))
