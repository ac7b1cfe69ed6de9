"""Dispersion of a feature map: sample standard deviation over all elements.

The scatter of an intermediate activation tensor is measured jointly over
every channel and spatial position, with the n-1 (sample) denominator.
A constant map has zero dispersion; its gradient is defined as zero there
(the attack has converged, any subgradient is valid and zero is stable).
"""

from __future__ import annotations

import numpy as np
import torch

from ..errors import DegenerateFeature


def dispersion(feature_map) -> torch.Tensor:
    """Sample std over the flattened feature map, differentiable w.r.t. it.

    Accepts a FeatureMap or a raw tensor. Returns a 0-dim tensor; autograd
    flows through to whatever produced the values.
    """
    values = feature_map.values if hasattr(feature_map, "layer_key") else feature_map
    flat = values.reshape(-1)
    if flat.numel() < 2:
        raise DegenerateFeature(
            f"dispersion needs at least 2 elements, got {flat.numel()}"
        )
    return flat.std(correction=1)


def dispersion_gradient(values) -> np.ndarray:
    """Closed-form gradient of the sample std w.r.t. each element.

    d std / d a_i = (a_i - mean) / ((n - 1) * std); zero everywhere on a
    constant map. Kept independent of autograd so the two routes can be
    cross-checked.
    """
    arr = np.asarray(
        values.detach().cpu().numpy() if isinstance(values, torch.Tensor) else values,
        dtype=np.float64,
    )
    flat = arr.reshape(-1)
    n = flat.size
    if n < 2:
        raise DegenerateFeature(f"dispersion needs at least 2 elements, got {n}")
    centered = flat - flat.mean()
    std = np.sqrt(np.sum(centered * centered) / (n - 1))
    if std == 0.0:
        return np.zeros_like(arr)
    return (centered / ((n - 1) * std)).reshape(arr.shape)
