"""Minimum enclosing circles and the compactness ratio behind the shape
filter: leaf-like blobs score high, slivers score near zero.

Run with: python3 demos/02_enclosing_circle.py
"""

import numpy as np

from leafsieve import Bitmask, boundary_points, min_enclosing_circle, shape_ratio


def ellipse(width, height, cx, cy, rx, ry):
    ys, xs = np.mgrid[0:height, 0:width]
    return Bitmask(((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0)


# A filled disk nearly fills its enclosing circle.
disk = ellipse(120, 120, 60, 60, 35, 35)
circle = min_enclosing_circle(boundary_points(disk))
print(f"disk: area {disk.area}, enclosing circle r = {circle.radius:.2f}")
print(f"  shape ratio = {shape_ratio(disk):.3f}   (compact, clearly kept)")

# A squashed ellipse: ratio roughly the axis ratio.
squashed = ellipse(160, 80, 80, 40, 60, 15)
print(f"squashed ellipse ratio = {shape_ratio(squashed):.3f}")

# Half a disk, the occluded-leaf analog: still comfortably above 0.1.
ys, xs = np.mgrid[0:120, 0:120]
half = Bitmask(((xs - 60.0) ** 2 + (ys - 60.0) ** 2 <= 35.0**2) & (ys >= 60))
print(f"half disk ratio        = {shape_ratio(half):.3f}")

# A one-pixel-wide line is all circle and no area: removed by the 0.1 test.
line = np.zeros((10, 120), dtype=bool)
line[5, 10:110] = True
print(f"100x1 sliver ratio     = {shape_ratio(Bitmask(line)):.4f}  (removed)")

# The circle only depends on the boundary pixels, which keeps it fast:
pts = boundary_points(disk)
print(f"disk has {disk.area} pixels but only {len(pts)} boundary points")
