"""Relative-metric protocol: the target's own benign predictions are the
reference, so no ground-truth labels are needed and a clean-vs-clean run
scores exactly 100.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import ShapeMismatch, TargetFailure
from ..images import ImageBatch
from .metrics import DetectionSet, average_precision, mean_iou

REPORT_NOTE = "detection matching at IoU=0.5; relative metrics vs benign predictions"

METRIC_NAMES = {
    "classify": "relative_accuracy",
    "detect": "relative_map50",
    "segment": "relative_miou",
}


@dataclass
class EvalRow:
    source_model: str
    attack: str
    target: str
    metric_name: str
    clean_value: float
    adv_value: float
    excluded: int = 0


@dataclass
class CurveRow:
    sweep: str  # "steps" | "layers"
    attack: str
    target: str
    x: str
    metric_name: str
    value: float
    std_delta: float | None = None


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)
    curves: list[CurveRow] = field(default_factory=list)
    note: str = REPORT_NOTE
    meta: dict = field(default_factory=dict)

    def to_csv(self, path: Path):
        with open(path, "w", newline="") as fh:
            fh.write(f"# {self.note}\n")
            writer = csv.writer(fh)
            writer.writerow(
                ["source_model", "attack", "target", "metric_name",
                 "clean_value", "adv_value", "excluded"]
            )
            for row in self.rows:
                writer.writerow(
                    [row.source_model, row.attack, row.target, row.metric_name,
                     f"{row.clean_value:.4f}", f"{row.adv_value:.4f}", row.excluded]
                )

    def curves_to_csv(self, path: Path):
        with open(path, "w", newline="") as fh:
            fh.write(f"# {self.note}\n")
            writer = csv.writer(fh)
            writer.writerow(
                ["sweep", "attack", "target", "x", "metric_name", "value", "std_delta"]
            )
            for row in self.curves:
                writer.writerow(
                    [row.sweep, row.attack, row.target, row.x, row.metric_name,
                     f"{row.value:.4f}",
                     "" if row.std_delta is None else f"{row.std_delta:.6f}"]
                )

    def to_json(self, path: Path):
        doc = {
            "note": self.note,
            "meta": self.meta,
            "rows": [asdict(r) for r in self.rows],
            "curves": [asdict(c) for c in self.curves],
        }
        Path(path).write_text(json.dumps(doc, indent=2))


def _aligned(clean: ImageBatch, adv: ImageBatch):
    if list(clean.ids) != list(adv.ids):
        raise ShapeMismatch("clean and adversarial batches carry different image ids")


def _invoke_pair(target, clean: ImageBatch, adv: ImageBatch):
    """Per-image invocation with exclusion of failed images."""
    clean_out, adv_out, excluded = {}, {}, []
    for i, image_id in enumerate(clean.ids):
        try:
            ref = target.invoke_one(clean.image(i), image_id)
            pred = target.invoke_one(adv.image(i), image_id)
        except TargetFailure:
            excluded.append(image_id)
            continue
        clean_out[image_id] = ref
        adv_out[image_id] = pred
    return clean_out, adv_out, excluded


def relative_eval(
    target,
    clean: ImageBatch,
    adv: ImageBatch,
    source_model: str = "",
    attack: str = "",
    score_threshold: float = 0.05,
) -> EvalRow:
    """Relative metric of the target on adv against its own clean predictions.

    classify: fraction of images keeping the benign label, x100.
    detect:   mAP@0.5 of adversarial detections vs benign detections, x100.
    segment:  mean IoU of adversarial rasters vs benign rasters, x100.
    Failed images are excluded and counted in the row.
    """
    _aligned(clean, adv)
    refs, preds, excluded = _invoke_pair(target, clean, adv)

    if target.task == "classify":
        total = len(refs)
        agree = sum(1 for k in refs if preds[k] == refs[k])
        value = 100.0 * agree / total if total else 0.0
    elif target.task == "detect":
        ref_set = DetectionSet({k: list(v) for k, v in refs.items()})
        pred_set = DetectionSet({k: list(v) for k, v in preds.items()})
        # thresholds applied symmetrically so a self-reference run scores 100
        ref_set = DetectionSet(
            {
                k: [d for d in v if d.score >= score_threshold]
                for k, v in ref_set.by_image.items()
            }
        )
        if ref_set.total() == 0:
            value = 100.0 if pred_set.total() == 0 else 0.0
        else:
            value = 100.0 * average_precision(
                pred_set, ref_set, iou_thresh=0.5, score_threshold=score_threshold
            ).map50
    elif target.task == "segment":
        value = 100.0 * mean_iou(preds, refs)
    else:
        raise ValueError(f"unknown task {target.task!r}")

    return EvalRow(
        source_model=source_model,
        attack=attack,
        target=target.name,
        metric_name=METRIC_NAMES[target.task],
        clean_value=100.0,
        adv_value=value,
        excluded=len(excluded),
    )
