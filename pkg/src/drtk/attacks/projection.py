"""Projection into the L-infinity ball intersected with the pixel range."""

from __future__ import annotations

import torch

from ..errors import ShapeMismatch
from ..images import ImageBatch


def project_tensor(adv: torch.Tensor, orig: torch.Tensor, epsilon: float) -> torch.Tensor:
    """Elementwise clip of adv into [orig - eps, orig + eps] ∩ [0, 255]."""
    if adv.shape != orig.shape:
        raise ShapeMismatch(f"adv shape {tuple(adv.shape)} != orig shape {tuple(orig.shape)}")
    clipped = torch.clamp(adv, orig - epsilon, orig + epsilon)
    return torch.clamp(clipped, 0.0, 255.0)


def project(x_adv: ImageBatch, x_orig: ImageBatch, epsilon: float) -> ImageBatch:
    return ImageBatch(project_tensor(x_adv.data, x_orig.data, epsilon), list(x_adv.ids))
