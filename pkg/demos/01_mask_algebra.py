"""Binary mask basics: construction, RLE round trips, and set algebra.

Run with: python3 demos/01_mask_algebra.py
"""

import numpy as np

from leafsieve import (
    Bitmask,
    containment_fraction,
    coverage_map,
    decode_rle,
    encode_rle,
    iou,
    mean_coverage,
    union_all,
)

# A mask is just a boolean grid. Build two overlapping rectangles.
grid_a = np.zeros((12, 20), dtype=bool)
grid_a[2:9, 2:10] = True
grid_b = np.zeros((12, 20), dtype=bool)
grid_b[4:11, 6:16] = True

a = Bitmask(grid_a)
b = Bitmask(grid_b)
print(f"a: {a}")
print(f"b: {b}")

# Overlap measures: IoU is symmetric, containment is directional.
print(f"iou(a, b)                  = {iou(a, b):.3f}")
print(f"containment_fraction(a, b) = {containment_fraction(a, b):.3f}")
print(f"containment_fraction(b, a) = {containment_fraction(b, a):.3f}")

# The union is the "total mask" of everything covered.
total = union_all([a, b])
print(f"union area {total.area} <= {a.area} + {b.area}")

# A coverage map counts how many masks touch each pixel. Masks that average
# well above 1 share most of their pixels with other masks.
cov = coverage_map([a, b, total])
print(f"mean coverage of a:     {mean_coverage(a, cov):.2f}")
print(f"mean coverage of total: {mean_coverage(total, cov):.2f}")

# Row-major RLE is the interchange form; the round trip is exact.
rle = encode_rle(a)
print(f"a encodes to {len(rle.counts)} runs, first five: {rle.counts[:5]}")
assert decode_rle(rle) == a
print("RLE round trip: exact")
