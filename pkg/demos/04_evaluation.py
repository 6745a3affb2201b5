"""Scoring predictions against ground truth: greedy matching, the IoU
threshold grid, and best-match Dice.

Run with: python3 demos/04_evaluation.py
"""

import numpy as np

from leafsieve import Bitmask, dsc, evaluate, iou, mask_size_summary


def rect(width, height, x0, y0, x1, y1):
    grid = np.zeros((height, width), dtype=bool)
    grid[y0:y1, x0:x1] = True
    return Bitmask(grid)


# Four ground-truth "leaves" on a strip.
gts = [rect(140, 20, 4 + 24 * i, 4, 21 + 24 * i, 17) for i in range(4)]

# Predictions: three good (slightly shifted), one missed, one spurious.
preds = [
    Bitmask(np.roll(gts[0].bits, 2, axis=1)),
    Bitmask(np.roll(gts[1].bits, -1, axis=1)),
    Bitmask(np.roll(gts[2].bits, 1, axis=1)),
    rect(140, 20, 120, 4, 136, 17),  # overlaps nothing
]

result = evaluate(preds, gts)
print("t     tp fp fn  precision recall")
for t, c, p, r in zip(result.thresholds, result.counts, result.precisions, result.recalls):
    print(f"{t:.2f}  {c.tp:>2} {c.fp:>2} {c.fn:>2}  {p:>9.1f} {r:>6.1f}")
print(f"AP {result.ap:.1f}  AR {result.ar:.1f}  "
      f"AP_75 {result.ap_75:.1f}  AR_75 {result.ar_75:.1f}  "
      f"mean DSC {result.mean_dsc:.3f}")

# Dice and IoU measure the same overlap on different scales.
a, b = gts[0], preds[0]
v = iou(a, b)
print(f"\niou = {v:.3f}, dsc = {dsc(a, b):.3f}, 2*iou/(1+iou) = {2 * v / (1 + v):.3f}")

# A nested pair engineered to IoU 0.70 flips from TP to FP at t = 0.75,
# cutting AP/AR to exactly 50 over the stock grid.
gt = rect(60, 30, 0, 0, 50, 20)
pred = rect(60, 30, 0, 0, 35, 20)
sweep = evaluate([pred], [gt])
print(f"nested IoU-0.70 pair: AP = {sweep.ap}, AR = {sweep.ar}")

# Size statistics of a mask collection (useful for false-positive analysis).
summary = mask_size_summary(gts + preds)
print(f"\nmask sizes: mean {summary.mean:.0f}, median {summary.median:.0f}, "
      f"min {summary.min}, max {summary.max}")
