"""The four-stage filtering pipeline on a synthetic potato-bench scene.

A candidate set mimicking an exhaustive segmenter's output: five green leaves
plus typical junk (grey tray, brown soil, a whole-plant mask, a two-leaf
container, a thin sliver). Each junk mask is removed by exactly one stage.

Run with: python3 demos/03_filter_pipeline.py
"""

import numpy as np

from leafsieve import Bitmask, CandidateMask, FilterConfig, RgbImage, run_pipeline

W = H = 512


def ellipse(cx, cy, rx, ry):
    ys, xs = np.mgrid[0:H, 0:W]
    return Bitmask(((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0)


def rect(x0, y0, x1, y1):
    grid = np.zeros((H, W), dtype=bool)
    grid[y0:y1, x0:x1] = True
    return Bitmask(grid)


leaves = [
    ellipse(150, 130, 38, 26),
    ellipse(220, 135, 38, 26),   # overlaps its neighbour a little
    ellipse(150, 330, 40, 27),
    ellipse(250, 330, 40, 27),   # disjoint pair for the container
    ellipse(390, 230, 39, 29),
]
plant = Bitmask(np.logical_or.reduce([m.bits for m in leaves]))
container = Bitmask(leaves[2].bits | leaves[3].bits)
sliver_grid = np.zeros((H, W), dtype=bool)
sliver_grid[230, 355:425] = True

candidates = [
    CandidateMask(id=f"leaf_{i}", mask=m, source="demo") for i, m in enumerate(leaves)
]
candidates += [
    CandidateMask(id="tray", mask=rect(30, 430, 480, 500), source="demo"),
    CandidateMask(id="soil", mask=rect(30, 20, 120, 90), source="demo"),
    CandidateMask(id="plant", mask=plant, source="demo"),
    CandidateMask(id="container", mask=container, source="demo"),
    CandidateMask(id="sliver", mask=Bitmask(sliver_grid), source="demo"),
]

# Paint the scene so the color stage has something to look at.
pixels = np.full((H, W, 3), (205, 205, 205), dtype=np.uint8)   # paper
pixels[rect(30, 20, 120, 90).bits] = (110, 75, 40)             # soil
pixels[rect(30, 430, 480, 500).bits] = (150, 150, 150)         # tray
pixels[plant.bits] = (45, 160, 55)                             # leaves
scene = RgbImage(pixels)

survivors, report = run_pipeline(scene, candidates, FilterConfig())

print(f"input candidates: {len(candidates)}")
for stage in report.stages_run:
    removed = report.removed[stage]
    names = ", ".join(r.id for r in removed) or "-"
    print(f"  after {stage:<13} {report.survivor_counts[stage]:>2} left   removed: {names}")
print(f"survivors: {sorted(c.id for c in survivors)}")

print("\nwhy each removal happened:")
for stage in report.stages_run:
    for removal in report.removed[stage]:
        stats = ", ".join(f"{k}={v:.3f}" for k, v in removal.stats.items())
        print(f"  {removal.id:<10} [{stage}] {stats}")

# Re-run with only the color stage to see an ablation step.
kept_green, _ = run_pipeline(scene, candidates, stages=("green",))
print(f"\ncolor stage alone keeps {len(kept_green)} of {len(candidates)}")
