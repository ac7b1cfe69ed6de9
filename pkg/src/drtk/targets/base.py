"""Black-box target interface: predictions only, no gradients, no internals.

Attack code never imports this package; attacks see only SurrogateModel.
Adapters are read-only after construction and deterministic in inference.
"""

from __future__ import annotations

import torch

from ..errors import TargetFailure
from ..images import ImageBatch

TASKS = ("classify", "detect", "segment")


class TargetAdapter:
    """Uniform opaque target.

    invoke() maps an ImageBatch to predictions keyed by image id:
    classify -> dict[id, int], detect -> DetectionSet, segment ->
    dict[id, np.ndarray class raster].
    """

    task: str = ""
    name: str = "target"
    label_map: dict[int, str] = {}

    def invoke_one(self, image: torch.Tensor, image_id: str):
        """Predictions for a single (c, h, w) image; raises TargetFailure."""
        raise NotImplementedError

    def invoke(self, batch: ImageBatch):
        from ..evaluation.metrics import DetectionSet

        if self.task == "detect":
            out = DetectionSet()
            for i, image_id in enumerate(batch.ids):
                out.by_image[image_id] = self.invoke_one(batch.image(i), image_id)
            return out
        results = {}
        for i, image_id in enumerate(batch.ids):
            results[image_id] = self.invoke_one(batch.image(i), image_id)
        return results


class FailingTarget(TargetAdapter):
    """Wrapper that fails on chosen image ids; exercises exclusion handling."""

    def __init__(self, inner: TargetAdapter, failing_ids):
        self.inner = inner
        self.failing_ids = set(failing_ids)
        self.task = inner.task
        self.name = f"{inner.name}+failures"
        self.label_map = inner.label_map

    def invoke_one(self, image, image_id):
        if image_id in self.failing_ids:
            raise TargetFailure(image_id, "simulated failure")
        return self.inner.invoke_one(image, image_id)
