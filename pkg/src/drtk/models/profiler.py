"""Per-layer dispersion profiling: which tap does the attack hurt most.

Runs the dispersion attack once per tappable layer and records the layer's
own sample std before and after. The layer with the largest drop is the
recommended attack target; downstream eval scores can be attached via an
optional evaluator callback.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from ..images import ImageBatch
from .base import SurrogateModel, tap_features


@dataclass
class LayerProfileRow:
    layer_key: str
    std_before: float  # mean over probe images
    std_after: float
    delta: float  # before - after, >= 0 for the targeted layer
    per_image_before: np.ndarray
    per_image_after: np.ndarray
    downstream_metric: float | None = None


@dataclass
class LayerProfile:
    rows: list[LayerProfileRow]

    @property
    def recommended_layer(self) -> str:
        return max(self.rows, key=lambda r: r.delta).layer_key

    def to_csv(self, path: Path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["layer", "std_before", "std_after", "delta"])
            for row in self.rows:
                writer.writerow(
                    [row.layer_key, f"{row.std_before:.6f}", f"{row.std_after:.6f}",
                     f"{row.delta:.6f}"]
                )


def layer_std_per_image(model: SurrogateModel, batch: ImageBatch, layer_key: str) -> np.ndarray:
    from ..attacks.objective import dispersion  # deferred: attacks import this package

    values = []
    with torch.no_grad():
        for i in range(len(batch)):
            fm = tap_features(model, batch.image(i).unsqueeze(0), layer_key)
            values.append(float(dispersion(fm)))
    return np.asarray(values, dtype=np.float64)


def profile_layers(
    model: SurrogateModel,
    probe: ImageBatch,
    cfg: AttackConfig,
    evaluator=None,
    layer_keys=None,
) -> LayerProfile:
    """Attack every layer of the model (or the given subset) on the probe batch.

    evaluator, when given, is called as evaluator(clean, adversarial) per
    layer and its float result stored as the row's downstream metric.
    """
    from ..attacks.steppers import dr_attack  # deferred: attacks import this package

    if len(probe) == 0:
        raise ValueError("probe batch is empty")
    if layer_keys is None:
        layer_keys = model.layer_keys
    rows = []
    for layer_key in layer_keys:
        before = layer_std_per_image(model, probe, layer_key)
        result = dr_attack(probe, model, cfg.replace(target_layer=layer_key))
        after = result.converged_std
        metric = float(evaluator(probe, result.adversarial)) if evaluator else None
        rows.append(
            LayerProfileRow(
                layer_key=layer_key,
                std_before=float(before.mean()),
                std_after=float(after.mean()),
                delta=float((before - after).mean()),
                per_image_before=before,
                per_image_after=after,
                downstream_metric=metric,
            )
        )
    return LayerProfile(rows)
