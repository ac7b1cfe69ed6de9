"""White-box surrogate interface: forward pass with named feature taps.

Attack steppers consume only this interface; black-box targets live in
drtk.targets and are never imported here or by the attack code.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F

from ..errors import DegenerateFeature, InvalidLabel, InvalidLayer


@dataclass
class FeatureMap:
    """Activation tensor tapped at a named layer; flattened view has n >= 2 elements."""

    layer_key: str
    values: torch.Tensor

    @property
    def n(self) -> int:
        return self.values.numel()


class SurrogateModel:
    """Base for white-box source models.

    Subclasses set `name`, `layer_keys` (ordered tap names) and `n_classes`,
    and implement `forward_with_features`. Inference must be deterministic;
    gradients of any scalar of a tapped map w.r.t. the input are computable.
    """

    name: str = "surrogate"
    layer_keys: tuple[str, ...] = ()
    n_classes: int = 0

    def forward_with_features(self, x: torch.Tensor, layer_key: str | None):
        """Run one forward pass; return (logits, tapped tensor or None)."""
        raise NotImplementedError

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        logits, _ = self.forward_with_features(x, None)
        return logits

    def features(self, x: torch.Tensor, layer_key: str) -> torch.Tensor:
        self.check_layer(layer_key)
        _, tapped = self.forward_with_features(x, layer_key)
        return tapped

    def loss(self, x: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
        """Mean cross-entropy of the batch against integer labels."""
        y = torch.as_tensor(y, dtype=torch.long)
        if y.numel() and (int(y.min()) < 0 or int(y.max()) >= self.n_classes):
            raise InvalidLabel(
                f"labels must be in [0, {self.n_classes}), got range "
                f"[{int(y.min())}, {int(y.max())}]"
            )
        logits, _ = self.forward_with_features(x, None)
        return F.cross_entropy(logits, y)

    def check_layer(self, layer_key: str):
        if layer_key not in self.layer_keys:
            raise InvalidLayer(
                f"{layer_key!r} is not a layer of {self.name}; "
                f"available: {list(self.layer_keys)}"
            )


def tap_features(model: SurrogateModel, batch, layer_key: str) -> FeatureMap:
    """Tap the activation at layer_key for a forward pass on the batch.

    Accepts an ImageBatch or a raw rank-4 tensor; the returned values keep
    their autograd link to the input.
    """
    model.check_layer(layer_key)
    data = batch.data if hasattr(batch, "ids") else batch
    values = model.features(data, layer_key)
    if values.numel() < 2:
        raise DegenerateFeature(
            f"layer {layer_key!r} yields {values.numel()} elements; need >= 2"
        )
    return FeatureMap(layer_key=layer_key, values=values)


class IdentitySurrogate(SurrogateModel):
    """Toy surrogate whose single feature map is the input itself.

    Useful for hand-checkable attack steps: the dispersion of the "feature"
    is just the dispersion of the image pixels.
    """

    name = "identity"
    layer_keys = ("input",)

    def __init__(self, n_classes: int = 2):
        self.n_classes = n_classes

    def forward_with_features(self, x: torch.Tensor, layer_key: str | None):
        logits = x.reshape(x.shape[0], -1)[:, : self.n_classes]
        tapped = x if layer_key == "input" else None
        return logits, tapped
