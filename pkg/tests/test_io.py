import json

import numpy as np
import pytest
from PIL import Image

from leafsieve import (
    Bitmask,
    CandidateMask,
    DuplicateMaskIdError,
    RleValidationError,
    SceneDimensionError,
    SceneDocument,
    SceneFormatError,
    SceneImageRef,
    SceneMaskEntry,
    decode_scene_masks,
    encode_rle,
    load_image,
    load_labelme,
    load_measurements,
    load_scene,
    read_scene_document,
    scene_document_from_candidates,
    write_scene_document,
)
from leafsieve.mask import RleMask

from conftest import point_in_polygon, rect_mask


def minimal_scene_dict(width=4, height=3, image_path="img.png"):
    return {
        "version": "leafsieve/1",
        "image": {"path": image_path, "width": width, "height": height},
        "masks": [
            {
                "id": "m0",
                "rle": {"counts": [0, width * height], "width": width, "height": height},
                "source": "test",
            }
        ],
    }


def write_png(path, pixels):
    Image.fromarray(pixels).save(path)


class TestSceneDocument:
    def test_minimal_full_frame_mask(self, tmp_path):
        payload = minimal_scene_dict()
        scene_path = tmp_path / "scene.json"
        scene_path.write_text(json.dumps(payload))
        write_png(tmp_path / "img.png", np.zeros((3, 4, 3), dtype=np.uint8))
        img, cands = load_scene(scene_path)
        assert len(cands) == 1
        assert cands[0].mask.area == 12
        assert (img.width, img.height) == (4, 3)

    def test_bad_rle_sum_names_the_mask(self, tmp_path):
        payload = minimal_scene_dict()
        payload["masks"][0]["rle"]["counts"] = [5, 5]
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(RleValidationError, match="m0"):
            read_scene_document(path)

    def test_duplicate_ids_rejected(self, tmp_path):
        payload = minimal_scene_dict()
        payload["masks"].append(dict(payload["masks"][0]))
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(DuplicateMaskIdError, match="m0"):
            read_scene_document(path)

    def test_mask_dimension_mismatch_rejected(self, tmp_path):
        payload = minimal_scene_dict()
        payload["masks"][0]["rle"] = {"counts": [0, 6], "width": 2, "height": 3}
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(SceneDimensionError, match="m0"):
            read_scene_document(path)

    def test_parse_error(self, tmp_path):
        path = tmp_path / "scene.json"
        path.write_text("{not json")
        with pytest.raises(SceneFormatError):
            read_scene_document(path)

    def test_unknown_version_rejected(self, tmp_path):
        payload = minimal_scene_dict()
        payload["version"] = "leafsieve/99"
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(SceneFormatError):
            read_scene_document(path)

    def test_round_trip_is_byte_stable(self, tmp_path):
        masks = [
            SceneMaskEntry(
                id=f"m{i}",
                rle=encode_rle(rect_mask(16, 12, i, i, i + 5, i + 4)),
                score=0.5 + i / 10,
                source="sam-auto",
            )
            for i in range(3)
        ]
        doc = SceneDocument(
            image=SceneImageRef(path="a.png", width=16, height=12, sha256="ab" * 32),
            masks=masks,
        )
        first = tmp_path / "first.json"
        second = tmp_path / "second.json"
        write_scene_document(doc, first)
        write_scene_document(read_scene_document(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_value_level_round_trip(self, tmp_path):
        cands = [
            CandidateMask(id="a", mask=rect_mask(10, 8, 0, 0, 4, 4), score=0.75),
            CandidateMask(id="b", mask=rect_mask(10, 8, 5, 3, 9, 7), source="x"),
        ]
        doc = scene_document_from_candidates(
            SceneImageRef(path="p.png", width=10, height=8), cands
        )
        path = tmp_path / "scene.json"
        write_scene_document(doc, path)
        loaded = decode_scene_masks(read_scene_document(path))
        assert [c.id for c in loaded] == ["a", "b"]
        assert loaded[0].mask == cands[0].mask
        assert loaded[1].mask == cands[1].mask
        assert loaded[0].score == 0.75
        assert loaded[1].source == "x"

    def test_empty_mask_rejected_at_ingest(self, tmp_path):
        payload = minimal_scene_dict()
        payload["masks"][0]["rle"]["counts"] = [12]
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(payload))
        doc = read_scene_document(path)
        with pytest.raises(SceneFormatError, match="m0"):
            decode_scene_masks(doc)

    def test_image_dimension_mismatch(self, tmp_path):
        payload = minimal_scene_dict()
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(payload))
        write_png(tmp_path / "img.png", np.zeros((5, 4, 3), dtype=np.uint8))
        with pytest.raises(SceneDimensionError):
            load_scene(path)


class TestLabelme:
    def _doc(self, shapes, width=20, height=15):
        return {"imageWidth": width, "imageHeight": height, "shapes": shapes}

    def test_rectangle_polygon(self, tmp_path):
        doc = self._doc(
            [
                {
                    "label": "leaf",
                    "shape_type": "polygon",
                    "points": [[2, 2], [10, 2], [10, 8], [2, 8]],
                }
            ]
        )
        path = tmp_path / "ann.json"
        path.write_text(json.dumps(doc))
        masks = load_labelme(path)
        assert len(masks) == 1
        label, mask = masks[0]
        assert label == "leaf"
        assert mask.area == 48  # 8x6 pixel interior

    def test_empty_shapes(self, tmp_path):
        path = tmp_path / "ann.json"
        path.write_text(json.dumps(self._doc([])))
        assert load_labelme(path) == []

    def test_twelve_polygons_match_point_oracle(self, tmp_path):
        rng = np.random.default_rng(61)
        shapes = []
        polys = []
        for _ in range(12):
            cx, cy = rng.uniform(8, 40, size=2)
            angles = np.sort(rng.uniform(0, 2 * np.pi, size=7))
            radii = rng.uniform(2, 7, size=7)
            pts = [
                [float(cx + r * np.cos(a)), float(cy + r * np.sin(a))]
                for a, r in zip(angles, radii)
            ]
            polys.append(pts)
            shapes.append({"label": "leaf", "shape_type": "polygon", "points": pts})
        path = tmp_path / "ann.json"
        path.write_text(json.dumps(self._doc(shapes, width=48, height=48)))
        masks = load_labelme(path)
        assert len(masks) == 12
        total = sum(m.area for _, m in masks)
        oracle_total = 0
        for pts in polys:
            for y in range(48):
                for x in range(48):
                    oracle_total += point_in_polygon(x + 0.5, y + 0.5, pts)
        assert total == oracle_total

    def test_non_polygon_shapes_skipped_with_warning(self, tmp_path):
        doc = self._doc(
            [
                {"label": "a", "shape_type": "rectangle", "points": [[0, 0], [5, 5]]},
                {
                    "label": "b",
                    "shape_type": "polygon",
                    "points": [[1, 1], [6, 1], [6, 6]],
                },
            ]
        )
        path = tmp_path / "ann.json"
        path.write_text(json.dumps(doc))
        with pytest.warns(UserWarning, match="1 non-polygon"):
            masks = load_labelme(path)
        assert len(masks) == 1

    def test_canvas_mismatch_rejected(self, tmp_path):
        path = tmp_path / "ann.json"
        path.write_text(json.dumps(self._doc([])))
        with pytest.raises(SceneDimensionError):
            load_labelme(path, canvas=(99, 15))

    def test_fractional_and_outside_coordinates(self, tmp_path):
        doc = self._doc(
            [
                {
                    "label": "big",
                    "shape_type": "polygon",
                    "points": [[-3.5, -2.5], [30.5, -2.5], [30.5, 20.5], [-3.5, 20.5]],
                }
            ]
        )
        path = tmp_path / "ann.json"
        path.write_text(json.dumps(doc))
        masks = load_labelme(path)
        assert masks[0][1].area == 20 * 15  # clipped to the full canvas


class TestLoadImage:
    def test_known_pixels(self, tmp_path):
        pixels = np.array(
            [[[255, 0, 0], [0, 255, 0]], [[0, 0, 255], [10, 20, 30]]], dtype=np.uint8
        )
        path = tmp_path / "img.png"
        write_png(path, pixels)
        img = load_image(path)
        assert np.array_equal(img.pixels, pixels)

    def test_grayscale_expanded(self, tmp_path):
        grey = np.full((3, 3), 77, dtype=np.uint8)
        path = tmp_path / "grey.png"
        Image.fromarray(grey, mode="L").save(path)
        img = load_image(path)
        assert np.array_equal(img.pixels, np.full((3, 3, 3), 77, dtype=np.uint8))

    def test_alpha_dropped(self, tmp_path):
        rgba = np.zeros((2, 2, 4), dtype=np.uint8)
        rgba[..., 0] = 200
        rgba[..., 3] = 128
        path = tmp_path / "rgba.png"
        Image.fromarray(rgba, mode="RGBA").save(path)
        img = load_image(path)
        assert img.pixels.shape == (2, 2, 3)
        assert img.pixels[0, 0, 0] == 200

    def test_sixteen_bit_reduced(self, tmp_path):
        deep = np.array([[0, 256], [65535, 32768]], dtype=np.uint16)
        path = tmp_path / "deep.png"
        Image.fromarray(deep).save(path)
        img = load_image(path)
        assert img.pixels[0, 0, 0] == 0
        assert img.pixels[0, 1, 0] == 1
        assert img.pixels[1, 0, 0] == 255
        assert img.pixels[1, 1, 0] == 128

    def test_jpeg_accepted(self, tmp_path):
        pixels = np.full((4, 4, 3), 99, dtype=np.uint8)
        path = tmp_path / "img.jpg"
        Image.fromarray(pixels).save(path, quality=95)
        img = load_image(path)
        assert (img.width, img.height) == (4, 4)

    def test_unsupported_format_rejected(self, tmp_path):
        path = tmp_path / "img.bmp"
        Image.fromarray(np.zeros((2, 2, 3), dtype=np.uint8)).save(path)
        with pytest.raises(ValueError, match="unsupported"):
            load_image(path)


class TestMeasurements:
    HEADER = "plant_id,leaf_area_cm2,leaf_count,fresh_mass_g,dry_mass_g\n"

    def test_valid_rows(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text(self.HEADER + "p01,120.5,8,14.2,1.9\np02,80.0,5,9.1,1.1\n")
        records = load_measurements(path)
        assert len(records) == 2
        assert records[0].plant_id == "p01"
        assert records[0].leaf_area == 120.5
        assert records[1].leaf_count == 5

    def test_thirty_two_plants(self, tmp_path):
        rows = "".join(
            f"p{i:02d},{100 + i},{5 + i % 7},{10 + i / 2},{1 + i / 10}\n"
            for i in range(32)
        )
        path = tmp_path / "m.csv"
        path.write_text(self.HEADER + rows)
        assert len(load_measurements(path)) == 32

    def test_negative_mass_rejected_with_line(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text(self.HEADER + "p01,120.5,8,14.2,1.9\np02,80.0,5,-9.1,1.1\n")
        with pytest.raises(ValueError, match="line 3"):
            load_measurements(path)

    def test_missing_column_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("plant_id,leaf_area_cm2\np01,120.5\n")
        with pytest.raises(ValueError, match="dry_mass_g"):
            load_measurements(path)

    def test_non_numeric_rejected_with_line(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text(self.HEADER + "p01,abc,8,14.2,1.9\n")
        with pytest.raises(ValueError, match="line 2"):
            load_measurements(path)
