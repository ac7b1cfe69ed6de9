"""Relative-metric evaluation: metrics, protocol, sweeps, interchange."""

from .coco_json import coco_to_detections, detections_to_coco, read_coco, write_coco
from .metrics import (
    ApResult,
    Detection,
    DetectionSet,
    average_precision,
    iou,
    mean_iou,
)
from .relative import (
    METRIC_NAMES,
    REPORT_NOTE,
    CurveRow,
    EvalReport,
    EvalRow,
    relative_eval,
)
from .sweeps import DEFAULT_STEP_VALUES, sweep_layers, sweep_steps

__all__ = [
    "ApResult",
    "CurveRow",
    "DEFAULT_STEP_VALUES",
    "Detection",
    "DetectionSet",
    "EvalReport",
    "EvalRow",
    "METRIC_NAMES",
    "REPORT_NOTE",
    "average_precision",
    "coco_to_detections",
    "detections_to_coco",
    "iou",
    "mean_iou",
    "read_coco",
    "relative_eval",
    "sweep_layers",
    "sweep_steps",
    "write_coco",
]
