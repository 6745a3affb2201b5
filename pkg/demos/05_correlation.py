"""Correlating image-derived pixel counts with physical harvest measurements.

Synthetic stand-in for a harvested-plant table: pixel counts that track leaf
area closely (manual annotation) and more loosely (automatic segmentation).

Run with: python3 demos/05_correlation.py
"""

import numpy as np

from leafsieve import MeasurementRecord, correlation_matrix, pearson

rng = np.random.default_rng(7)

records = []
for i in range(32):
    leaf_area = float(rng.uniform(60, 420))              # cm^2
    dry_mass = 0.012 * leaf_area + float(rng.normal(0, 0.25))
    records.append(
        MeasurementRecord(
            plant_id=f"plant{i:02d}",
            leaf_area=leaf_area,
            leaf_count=int(rng.integers(4, 22)),
            fresh_mass=0.06 * leaf_area + float(rng.normal(0, 1.0)),
            dry_mass=max(dry_mass, 0.05),
            pixels_manual=int(leaf_area * 1050 + rng.normal(0, 6000)),
            pixels_auto=int(leaf_area * 930 + rng.normal(0, 40000)),
        )
    )

fields = ["leaf_area", "dry_mass", "pixels_manual", "pixels_auto"]
result = correlation_matrix(records, fields)

width = max(len(f) for f in fields)
print(" " * width, "  ".join(f"{f:>13}" for f in fields))
for name, row in zip(fields, result.matrix):
    print(f"{name:>{width}}", "  ".join(f"{v:>13.3f}" for v in row))
print(f"\n{result.n_used} plants used, {result.n_skipped} skipped")

# Pearson itself is plain sample correlation, invariant to affine rescaling:
x = [r.leaf_area for r in records]
y = [r.pixels_manual for r in records]
print(f"r(area, manual px)          = {pearson(x, y):.3f}")
print(f"r(2*area + 3, manual px)    = {pearson([2 * v + 3 for v in x], y):.3f}")
