"""Local desk-scale targets behind the black-box interface.

A model_spec JSON names the task and a desk CNN checkpoint:

    {"task": "classify", "checkpoint": "models/small4conv/2", "threshold": 60}

classify returns the CNN label. detect finds the bright foreground region
(per-channel max above threshold), boxes it, and labels the box with the CNN
prediction and its softmax confidence. segment assigns foreground pixels the
CNN class id + 1 (0 is background). All three are deterministic.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch

from ..errors import LoadFailure, TargetFailure
from ..models.desk import DeskSurrogate, load_checkpoint
from .base import TASKS, TargetAdapter


def _foreground(image: torch.Tensor, threshold: float) -> np.ndarray:
    return (image.detach().numpy().max(axis=0) > threshold)


class DeskClassifyTarget(TargetAdapter):
    task = "classify"

    def __init__(self, surrogate: DeskSurrogate):
        self.model = surrogate
        self.name = f"classify/{surrogate.name}"
        self.label_map = dict(enumerate(surrogate.class_names))

    def invoke_one(self, image, image_id):
        try:
            return int(self.model.predict(image.unsqueeze(0))[0])
        except Exception as exc:  # noqa: BLE001 - black-box contract
            raise TargetFailure(image_id, str(exc)) from exc


class DeskDetectTarget(TargetAdapter):
    task = "detect"

    def __init__(self, surrogate: DeskSurrogate, threshold: float = 60.0):
        self.model = surrogate
        self.threshold = threshold
        self.name = f"detect/{surrogate.name}"
        self.label_map = dict(enumerate(surrogate.class_names))

    def invoke_one(self, image, image_id):
        from ..evaluation.metrics import Detection

        try:
            mask = _foreground(image, self.threshold)
            if not mask.any():
                return []
            rows = np.where(mask.any(axis=1))[0]
            cols = np.where(mask.any(axis=0))[0]
            box = (float(cols[0]), float(rows[0]), float(cols[-1] + 1), float(rows[-1] + 1))
            probs = self.model.predict_proba(image.unsqueeze(0))[0]
            label = int(probs.argmax())
            return [Detection(box, label, float(probs[label]))]
        except Exception as exc:  # noqa: BLE001
            raise TargetFailure(image_id, str(exc)) from exc


class DeskSegmentTarget(TargetAdapter):
    task = "segment"

    def __init__(self, surrogate: DeskSurrogate, threshold: float = 60.0):
        self.model = surrogate
        self.threshold = threshold
        self.name = f"segment/{surrogate.name}"
        self.label_map = {0: "background"}
        self.label_map.update({i + 1: n for i, n in enumerate(surrogate.class_names)})

    def invoke_one(self, image, image_id):
        try:
            mask = _foreground(image, self.threshold)
            label = int(self.model.predict(image.unsqueeze(0))[0])
            raster = np.zeros(mask.shape, dtype=np.int64)
            raster[mask] = label + 1
            return raster
        except Exception as exc:  # noqa: BLE001
            raise TargetFailure(image_id, str(exc)) from exc


def local_adapter(model_spec) -> TargetAdapter:
    """Build a local target from a model_spec JSON file; LoadFailure names paths."""
    spec_path = Path(model_spec)
    if not spec_path.is_file():
        raise LoadFailure(f"model spec not found: {spec_path}")
    try:
        spec = json.loads(spec_path.read_text())
    except (OSError, ValueError) as exc:
        raise LoadFailure(f"unreadable model spec {spec_path}: {exc}") from exc
    task = spec.get("task")
    if task not in TASKS:
        raise LoadFailure(f"{spec_path}: task must be one of {TASKS}, got {task!r}")
    checkpoint = spec.get("checkpoint")
    if not checkpoint:
        raise LoadFailure(f"{spec_path}: missing 'checkpoint'")
    checkpoint_path = Path(checkpoint)
    if not checkpoint_path.is_absolute():
        checkpoint_path = spec_path.parent / checkpoint_path
    surrogate = load_checkpoint(checkpoint_path)
    threshold = float(spec.get("threshold", 60.0))
    if task == "classify":
        return DeskClassifyTarget(surrogate)
    if task == "detect":
        return DeskDetectTarget(surrogate, threshold)
    return DeskSegmentTarget(surrogate, threshold)
