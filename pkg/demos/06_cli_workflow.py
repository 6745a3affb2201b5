"""End-to-end batch workflow through the command line: rasterize ground
truth, filter candidate scenes, evaluate, and correlate.

Everything runs inside a temporary directory; the script prints the commands
it runs so they can be replayed by hand.

Run with: python3 demos/06_cli_workflow.py
"""

import json
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from leafsieve import (
    Bitmask,
    CandidateMask,
    SceneImageRef,
    scene_document_from_candidates,
    write_scene_document,
)
from leafsieve.cli import main

W = H = 256


def ellipse(cx, cy, rx, ry):
    ys, xs = np.mgrid[0:H, 0:W]
    return Bitmask(((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0)


def run(argv):
    print("$ leafsieve " + " ".join(argv))
    code = main(argv)
    assert code == 0, f"exit code {code}"
    print()


root = Path(tempfile.mkdtemp(prefix="leafsieve_demo_"))
images, masks, gt = root / "images", root / "masks", root / "gt"
for d in (images, masks, gt):
    d.mkdir()

# --- one synthetic scene: 3 leaves + a grey tray + a whole-plant mask -----
leaves = [ellipse(70, 80, 30, 20), ellipse(150, 80, 30, 20), ellipse(110, 170, 32, 22)]
plant = Bitmask(np.logical_or.reduce([m.bits for m in leaves]))
tray_grid = np.zeros((H, W), dtype=bool)
tray_grid[220:250, 20:236] = True

pixels = np.full((H, W, 3), (205, 205, 205), dtype=np.uint8)
pixels[tray_grid] = (150, 150, 150)
pixels[plant.bits] = (45, 160, 55)
Image.fromarray(pixels).save(images / "plant01.png")

cands = [CandidateMask(id=f"leaf_{i}", mask=m) for i, m in enumerate(leaves)]
cands.append(CandidateMask(id="tray", mask=Bitmask(tray_grid)))
cands.append(CandidateMask(id="plant", mask=plant))
write_scene_document(
    scene_document_from_candidates(
        SceneImageRef(path="plant01.png", width=W, height=H), cands
    ),
    masks / "plant01.json",
)

# --- labelme-style ground truth for the same image ------------------------
def ellipse_polygon(cx, cy, rx, ry, n=40):
    ts = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return [[float(cx + 0.5 + rx * np.cos(t)), float(cy + 0.5 + ry * np.sin(t))] for t in ts]


(gt / "plant01.json").write_text(
    json.dumps(
        {
            "imageWidth": W,
            "imageHeight": H,
            "shapes": [
                {
                    "label": "leaf",
                    "shape_type": "polygon",
                    "points": ellipse_polygon(70, 80, 30, 20),
                },
                {
                    "label": "leaf",
                    "shape_type": "polygon",
                    "points": ellipse_polygon(150, 80, 30, 20),
                },
                {
                    "label": "leaf",
                    "shape_type": "polygon",
                    "points": ellipse_polygon(110, 170, 32, 22),
                },
            ],
        }
    )
)

# --- the four subcommands --------------------------------------------------
run(["rasterize", "--labelme-dir", str(gt), "--out-dir", str(root / "gt_scenes")])
run(
    [
        "filter",
        "--image-dir", str(images),
        "--masks-dir", str(masks),
        "--out-dir", str(root / "filtered"),
    ]
)
run(
    [
        "eval",
        "--pred-dir", str(root / "filtered"),
        "--gt-dir", str(gt),
        "--out", str(root / "metrics.json"),
    ]
)

measurements = root / "measurements.csv"
measurements.write_text(
    "plant_id,leaf_area_cm2,leaf_count,fresh_mass_g,dry_mass_g\n"
    "plant01,142.0,3,8.5,1.2\n"
    "plant02,99.0,2,6.1,0.8\n"
)
# a second, smaller plant so the join has 2 rows with distinct pixel counts
write_scene_document(
    scene_document_from_candidates(
        SceneImageRef(path="plant02.png", width=W, height=H),
        [CandidateMask(id="leaf_0", mask=ellipse(110, 110, 26, 18))],
    ),
    root / "filtered" / "plant02.json",
)
run(
    [
        "correlate",
        "--measurements", str(measurements),
        "--pixels-from", f"auto={root / 'filtered'}",
        "--out", str(root / "corr.json"),
    ]
)

report = json.loads((root / "filtered" / "filter_report.json").read_text())
print("filter removals by stage:")
for stage, removals in report["reports"]["plant01"]["removed"].items():
    print(f"  {stage}: {[r['id'] for r in removals]}")
print(f"\nartifacts left in {root}")
