"""Detection and segmentation metrics: IoU, AP@0.5 with all-points
interpolation, and mean IoU over classes present in the reference.

Pure numpy/python over immutable inputs; the test suite pins the exact
semantics against brute-force oracles on small instances.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyReference, InvalidBox, ShapeMismatch

Box = tuple[float, float, float, float]  # x1, y1, x2, y2 in pixels


@dataclass
class Detection:
    box: Box
    label: int
    score: float

    def __post_init__(self):
        x1, y1, x2, y2 = self.box
        if not (x2 > x1 and y2 > y1):
            raise InvalidBox(f"degenerate box {self.box}")
        if not 0.0 <= self.score <= 1.0:
            raise InvalidBox(f"score {self.score} outside [0, 1]")


@dataclass
class DetectionSet:
    """Per-image lists of detections, keyed by image id."""

    by_image: dict[str, list[Detection]] = field(default_factory=dict)

    def add(self, image_id: str, box: Box, label: int, score: float):
        self.by_image.setdefault(image_id, []).append(Detection(box, label, score))

    def labels(self) -> set[int]:
        return {d.label for dets in self.by_image.values() for d in dets}

    def total(self) -> int:
        return sum(len(dets) for dets in self.by_image.values())


def iou(box_a: Box, box_b: Box) -> float:
    """Intersection over union of two (x1, y1, x2, y2) boxes, in [0, 1]."""
    ax1, ay1, ax2, ay2 = box_a
    bx1, by1, bx2, by2 = box_b
    if not (ax2 > ax1 and ay2 > ay1):
        raise InvalidBox(f"degenerate box {box_a}")
    if not (bx2 > bx1 and by2 > by1):
        raise InvalidBox(f"degenerate box {box_b}")
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter
    return inter / union


def _interpolated_ap(recalls: list[float], precisions: list[float]) -> float:
    # all-points interpolation: integrate the running-max precision envelope
    mrec = [0.0] + recalls + [1.0]
    mpre = [0.0] + precisions + [0.0]
    for i in range(len(mpre) - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    ap = 0.0
    for i in range(1, len(mrec)):
        if mrec[i] != mrec[i - 1]:
            ap += (mrec[i] - mrec[i - 1]) * mpre[i]
    return ap


@dataclass
class ApResult:
    per_class: dict[int, float]
    map50: float
    skipped_classes: list[int]  # predicted classes with no reference anywhere


def average_precision(
    preds: DetectionSet,
    refs: DetectionSet,
    iou_thresh: float = 0.5,
    score_threshold: float = 0.05,
) -> ApResult:
    """Score-ranked greedy matching, each reference used at most once.

    Predictions below score_threshold are dropped first. Ranking ties break
    by input order (stable sort). AP is averaged over classes present in the
    references; predicted classes with no reference are skipped and flagged.
    """
    ref_classes = sorted(refs.labels())
    if not ref_classes:
        raise EmptyReference("reference detection set has no annotations")

    kept: list[tuple[str, Detection]] = []
    for image_id, dets in preds.by_image.items():
        for det in dets:
            if det.score >= score_threshold:
                kept.append((image_id, det))
    skipped = sorted({det.label for _, det in kept} - set(ref_classes))

    per_class: dict[int, float] = {}
    for cls in ref_classes:
        cls_preds = [(img, det) for img, det in kept if det.label == cls]
        cls_preds.sort(key=lambda item: -item[1].score)  # stable: input order on ties
        cls_refs = {
            img: [d for d in dets if d.label == cls]
            for img, dets in refs.by_image.items()
        }
        n_refs = sum(len(v) for v in cls_refs.values())
        matched = {img: [False] * len(v) for img, v in cls_refs.items()}

        tps, fps = [], []
        for img, det in cls_preds:
            candidates = cls_refs.get(img, [])
            best_iou, best_j = 0.0, -1
            for j, ref in enumerate(candidates):
                if matched[img][j]:
                    continue
                value = iou(det.box, ref.box)
                if value > best_iou:
                    best_iou, best_j = value, j
            if best_j >= 0 and best_iou >= iou_thresh:
                matched[img][best_j] = True
                tps.append(1)
                fps.append(0)
            else:
                tps.append(0)
                fps.append(1)

        cum_tp = np.cumsum(tps)
        cum_fp = np.cumsum(fps)
        recalls = [tp / n_refs for tp in cum_tp]
        precisions = [tp / (tp + fp) for tp, fp in zip(cum_tp, cum_fp)]
        per_class[cls] = _interpolated_ap(recalls, precisions)

    map50 = sum(per_class.values()) / len(per_class)
    return ApResult(per_class=per_class, map50=map50, skipped_classes=skipped)


def mean_iou(pred, ref, classes=None) -> float:
    """Mean per-class pixel IoU over classes present in the reference.

    pred/ref are integer rasters of the same shape (or aligned dicts of
    rasters keyed by image id, pooled into one pixel population). classes
    restricts the candidate label set; classes absent from the reference
    (even if predicted) do not enter the mean.
    """
    if isinstance(pred, dict) != isinstance(ref, dict):
        raise ShapeMismatch("pred and ref must both be rasters or both be dicts")
    if isinstance(pred, dict):
        if sorted(pred) != sorted(ref):
            raise ShapeMismatch("pred and ref cover different image ids")
        pred_flat, ref_flat = [], []
        for image_id in sorted(pred):
            p = np.asarray(pred[image_id])
            r = np.asarray(ref[image_id])
            if p.shape != r.shape:
                raise ShapeMismatch(
                    f"raster shapes differ for {image_id}: {p.shape} vs {r.shape}"
                )
            pred_flat.append(p.reshape(-1))
            ref_flat.append(r.reshape(-1))
        p = np.concatenate(pred_flat)
        r = np.concatenate(ref_flat)
    else:
        p = np.asarray(pred)
        r = np.asarray(ref)
        if p.shape != r.shape:
            raise ShapeMismatch(f"raster shapes differ: {p.shape} vs {r.shape}")
        p = p.reshape(-1)
        r = r.reshape(-1)

    if classes is None:
        candidates = sorted(set(np.unique(r)) | set(np.unique(p)))
    else:
        candidates = sorted(set(int(c) for c in classes))

    ious = []
    for cls in candidates:
        in_ref = r == cls
        if not in_ref.any():
            continue
        in_pred = p == cls
        inter = int(np.count_nonzero(in_pred & in_ref))
        union = int(np.count_nonzero(in_pred | in_ref))
        ious.append(inter / union)
    if not ious:
        raise EmptyReference("no candidate class present in the reference raster")
    return sum(ious) / len(ious)
