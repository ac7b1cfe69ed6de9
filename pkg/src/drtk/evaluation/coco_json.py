"""Minimal COCO-style interchange for detection sets.

Only the subset needed to exchange references/predictions: images with
string file names, annotations with [x, y, w, h] boxes, category_id and
score, and a category name table.
"""

from __future__ import annotations

import json
from pathlib import Path

from .metrics import DetectionSet


def detections_to_coco(dets: DetectionSet, categories: dict[int, str]) -> dict:
    image_ids = sorted(dets.by_image)
    images = [{"id": i, "file_name": name} for i, name in enumerate(image_ids)]
    index = {name: i for i, name in enumerate(image_ids)}
    annotations = []
    for name in image_ids:
        for det in dets.by_image[name]:
            x1, y1, x2, y2 = det.box
            annotations.append(
                {
                    "id": len(annotations),
                    "image_id": index[name],
                    "bbox": [x1, y1, x2 - x1, y2 - y1],
                    "category_id": det.label,
                    "score": det.score,
                }
            )
    return {
        "images": images,
        "annotations": annotations,
        "categories": [{"id": k, "name": v} for k, v in sorted(categories.items())],
    }


def coco_to_detections(doc: dict) -> tuple[DetectionSet, dict[int, str]]:
    names = {img["id"]: img["file_name"] for img in doc["images"]}
    dets = DetectionSet({name: [] for name in names.values()})
    for ann in doc["annotations"]:
        x, y, w, h = ann["bbox"]
        dets.add(
            names[ann["image_id"]],
            (x, y, x + w, y + h),
            int(ann["category_id"]),
            float(ann.get("score", 1.0)),
        )
    categories = {int(c["id"]): c["name"] for c in doc.get("categories", [])}
    return dets, categories


def write_coco(dets: DetectionSet, categories: dict[int, str], path: Path):
    Path(path).write_text(json.dumps(detections_to_coco(dets, categories), indent=2))


def read_coco(path: Path) -> tuple[DetectionSet, dict[int, str]]:
    return coco_to_detections(json.loads(Path(path).read_text()))
