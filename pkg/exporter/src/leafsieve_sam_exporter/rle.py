"""Row-major run-length encoding matching the leafsieve scene contract.

Deliberately re-implemented here rather than borrowed from a model library:
segmentation toolkits encode column-major (Fortran order), while the scene
wire format is row-major with a leading (possibly zero) background count.
"""

from __future__ import annotations

import numpy as np

__all__ = ["encode_row_major"]


def encode_row_major(mask: np.ndarray) -> list[int]:
    """Encode a 2-D boolean array into alternating background/foreground run
    lengths over the row-major scan; the first count is background pixels."""
    arr = np.asarray(mask, dtype=bool)
    if arr.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
    flat = arr.ravel(order="C")
    boundaries = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    edges = np.concatenate(([0], boundaries, [flat.size]))
    counts = np.diff(edges).tolist()
    if flat[0]:
        counts.insert(0, 0)
    return [int(c) for c in counts]
