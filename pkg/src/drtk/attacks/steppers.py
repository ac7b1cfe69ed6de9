"""Iterative attack steppers under a shared L-infinity pixel budget.

Five attacks over one common loop pattern, each processing images one at a
time so that results are independent of batch composition and trivially
partitionable across workers (per-image RNG stream = rng_seed + image index):

* dispersion_reduction — label-free; descends the sample std of a tapped
  feature map, keeping the best (lowest-dispersion) iterate seen.
* pgd — signed ascent on the classification loss.
* mi_fgsm — momentum accumulation of the L1-normalized loss gradient.
* dim — mi_fgsm with a stochastic resize-and-pad input transform.
* ti_dim — dim with the input gradient smoothed by a Gaussian kernel.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

from ..errors import ConfigError, InvalidLabel
from ..images import ImageBatch
from ..models.base import SurrogateModel, tap_features
from .config import AttackConfig
from .objective import dispersion
from .projection import project_tensor


@dataclass
class TraceRecord:
    """One iterate: objective value and distance from the original image."""

    id: str
    iteration: int
    objective: float
    linf: float


@dataclass
class AttackResult:
    adversarial: ImageBatch
    trace: list[TraceRecord]
    converged_std: np.ndarray | None = None
    best_iteration: np.ndarray | None = None

    def trace_for(self, image_id: str) -> list[TraceRecord]:
        return [r for r in self.trace if r.id == image_id]

    def write_trace(self, path: Path):
        """Line-delimited records, one JSON object per iteration."""
        with open(path, "w") as fh:
            for rec in self.trace:
                fh.write(
                    json.dumps(
                        {
                            "id": rec.id,
                            "iter": rec.iteration,
                            "objective": rec.objective,
                            "linf": rec.linf,
                        }
                    )
                    + "\n"
                )


def gaussian_kernel(size: int, dtype=torch.float32) -> torch.Tensor:
    """Normalized 2-D Gaussian with sigma = size / 6; sums to exactly 1."""
    if size < 1 or size % 2 == 0:
        raise ConfigError("ti_kernel_size", f"must be a positive odd integer, got {size}")
    sigma = size / 6.0
    coords = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    one_d = np.exp(-(coords**2) / (2.0 * sigma**2))
    kernel = np.outer(one_d, one_d)
    kernel /= kernel.sum()
    total = kernel.sum()
    if total != 1.0:
        kernel[size // 2, size // 2] += 1.0 - total
    return torch.from_numpy(kernel).to(dtype)


def diverse_input(x: torch.Tensor, cfg: AttackConfig, gen: torch.Generator) -> torch.Tensor:
    """With probability transform_prob: random downscale then zero-pad back.

    Scale is uniform in [resize_lo, resize_hi]; placement uniform. Identity
    when the transform does not fire or the drawn size equals the original,
    so the gradient path matches the untransformed attack bitwise there.
    """
    fire = torch.rand((), generator=gen).item() < cfg.transform_prob
    if not fire:
        return x
    scale = cfg.resize_lo + (cfg.resize_hi - cfg.resize_lo) * torch.rand((), generator=gen).item()
    _, h, w = x.shape
    new_h = max(1, round(scale * h))
    new_w = max(1, round(scale * w))
    top = int(torch.randint(0, h - new_h + 1, (), generator=gen))
    left = int(torch.randint(0, w - new_w + 1, (), generator=gen))
    if (new_h, new_w) == (h, w):
        return x
    resized = F.interpolate(
        x.unsqueeze(0), size=(new_h, new_w), mode="bilinear", align_corners=False
    ).squeeze(0)
    return F.pad(resized, (left, w - new_w - left, top, h - new_h - top))


def _record(records, image_id, iteration, objective, linf):
    records.append(TraceRecord(image_id, iteration, float(objective), float(linf)))


def _linf(x: torch.Tensor, orig: torch.Tensor) -> float:
    return float((x - orig).abs().max()) if x.numel() else 0.0


def _check_budget(records, epsilon: float):
    # defensive: half-ulp slack only matters for non-integer originals
    slack = epsilon + 1e-4
    for rec in records:
        if rec.linf > slack:
            raise RuntimeError(
                f"budget violated: image {rec.id} iter {rec.iteration} "
                f"linf {rec.linf} > epsilon {epsilon}"
            )


def dr_attack(x: ImageBatch, model: SurrogateModel, cfg: AttackConfig) -> AttackResult:
    """Minimize feature-map dispersion at cfg.target_layer; no label needed.

    Returns the lowest-dispersion iterate seen per image, so the reported
    converged_std is the minimum objective over the trace and never exceeds
    the iteration-0 value.
    """
    if cfg.target_layer is None:
        raise ConfigError("target_layer", "required for the dispersion attack")
    model.check_layer(cfg.target_layer)

    records: list[TraceRecord] = []
    best_images, best_objs, best_iters = [], [], []
    for idx in range(len(x)):
        orig = x.image(idx).detach()
        adv = orig.clone()
        adam_m = torch.zeros_like(adv)
        adam_v = torch.zeros_like(adv)
        best_obj, best_img, best_iter = math.inf, adv, 0

        for t in range(cfg.steps + 1):
            adv_var = adv.detach().clone().requires_grad_(True)
            fm = tap_features(model, adv_var.unsqueeze(0), cfg.target_layer)
            obj = dispersion(fm)
            value = float(obj.detach())
            _record(records, x.ids[idx], t, value, _linf(adv, orig))
            if value < best_obj:
                best_obj, best_img, best_iter = value, adv.detach().clone(), t
            if t == cfg.steps:
                break
            (grad,) = torch.autograd.grad(obj, adv_var)
            if cfg.optimizer_mode == "sign_step":
                step = cfg.alpha * grad.sign()
            elif cfg.optimizer_mode == "raw_gradient":
                step = cfg.alpha * grad
            else:  # adaptive_moment
                adam_m = cfg.beta1 * adam_m + (1 - cfg.beta1) * grad
                adam_v = cfg.beta2 * adam_v + (1 - cfg.beta2) * grad * grad
                m_hat = adam_m / (1 - cfg.beta1 ** (t + 1))
                v_hat = adam_v / (1 - cfg.beta2 ** (t + 1))
                step = cfg.learning_rate * m_hat / (v_hat.sqrt() + 1e-8)
            adv = project_tensor(adv - step, orig, cfg.epsilon)

        best_images.append(best_img)
        best_objs.append(best_obj)
        best_iters.append(best_iter)

    _check_budget(records, cfg.epsilon)
    return AttackResult(
        adversarial=ImageBatch(torch.stack(best_images), list(x.ids)),
        trace=records,
        converged_std=np.asarray(best_objs, dtype=np.float64),
        best_iteration=np.asarray(best_iters, dtype=np.int64),
    )


def _as_labels(y, n: int) -> torch.Tensor:
    if y is None:
        raise InvalidLabel("this attack needs labels; only the dispersion attack is label-free")
    y = torch.as_tensor(np.asarray(y), dtype=torch.long).reshape(-1)
    if y.numel() != n:
        raise InvalidLabel(f"{y.numel()} labels for {n} images")
    return y


def pgd_attack(x: ImageBatch, y, model: SurrogateModel, cfg: AttackConfig) -> AttackResult:
    """Signed gradient ascent on the classification loss, projected each step."""
    y = _as_labels(y, len(x))
    records: list[TraceRecord] = []
    out = []
    for idx in range(len(x)):
        orig = x.image(idx).detach()
        label = y[idx : idx + 1]
        adv = orig.clone()
        for t in range(cfg.steps + 1):
            adv_var = adv.detach().clone().requires_grad_(True)
            loss = model.loss(adv_var.unsqueeze(0), label)
            _record(records, x.ids[idx], t, float(loss.detach()), _linf(adv, orig))
            if t == cfg.steps:
                break
            (grad,) = torch.autograd.grad(loss, adv_var)
            adv = project_tensor(adv + cfg.alpha * grad.sign(), orig, cfg.epsilon)
        out.append(adv.detach())
    _check_budget(records, cfg.epsilon)
    return AttackResult(ImageBatch(torch.stack(out), list(x.ids)), records)


def _momentum_family(
    x: ImageBatch,
    y,
    model: SurrogateModel,
    cfg: AttackConfig,
    transform: bool,
    kernel: torch.Tensor | None,
    inspect=None,
) -> AttackResult:
    """Shared loop for mi_fgsm / dim / ti_dim.

    Accumulates g <- mu * g + grad / ||grad||_1 and steps by alpha * sign(g).
    `transform` switches the stochastic input transform on; `kernel` smooths
    the raw input gradient (per channel, same padding) before normalization.
    A zero gradient skips normalization and contributes nothing to momentum.
    """
    y = _as_labels(y, len(x))
    records: list[TraceRecord] = []
    out = []
    for idx in range(len(x)):
        orig = x.image(idx).detach()
        label = y[idx : idx + 1]
        gen = torch.Generator().manual_seed(cfg.rng_seed + idx)
        adv = orig.clone()
        g_acc = torch.zeros_like(adv)
        for t in range(cfg.steps + 1):
            adv_var = adv.detach().clone().requires_grad_(True)
            model_in = diverse_input(adv_var, cfg, gen) if transform else adv_var
            loss = model.loss(model_in.unsqueeze(0), label)
            _record(records, x.ids[idx], t, float(loss.detach()), _linf(adv, orig))
            if t == cfg.steps:
                break
            (grad,) = torch.autograd.grad(loss, adv_var)
            if kernel is not None:
                k = kernel.to(grad.dtype)
                c = grad.shape[0]
                weight = k.expand(c, 1, -1, -1)
                grad = F.conv2d(
                    grad.unsqueeze(0), weight, padding=k.shape[-1] // 2, groups=c
                ).squeeze(0)
            l1 = grad.abs().sum()
            normalized = grad if float(l1) == 0.0 else grad / l1
            g_acc = cfg.momentum * g_acc + normalized
            if inspect is not None:
                inspect(
                    {
                        "image": x.ids[idx],
                        "iteration": t,
                        "grad_l1": float(l1),
                        "normalized_l1": float(normalized.abs().sum()),
                    }
                )
            adv = project_tensor(adv + cfg.alpha * g_acc.sign(), orig, cfg.epsilon)
        out.append(adv.detach())
    _check_budget(records, cfg.epsilon)
    return AttackResult(ImageBatch(torch.stack(out), list(x.ids)), records)


def mi_fgsm_attack(x, y, model, cfg: AttackConfig, inspect=None) -> AttackResult:
    """Momentum iterative FGSM: L1-normalized gradient accumulation."""
    return _momentum_family(x, y, model, cfg, transform=False, kernel=None, inspect=inspect)


def dim_attack(x, y, model, cfg: AttackConfig, inspect=None) -> AttackResult:
    """MI-FGSM with the stochastic resize-and-pad input transform."""
    return _momentum_family(x, y, model, cfg, transform=True, kernel=None, inspect=inspect)


def ti_dim_attack(x, y, model, cfg: AttackConfig, inspect=None) -> AttackResult:
    """DIM with the input gradient smoothed by a normalized Gaussian kernel."""
    kernel = gaussian_kernel(cfg.ti_kernel_size)
    return _momentum_family(x, y, model, cfg, transform=True, kernel=kernel, inspect=inspect)


ATTACKS = {
    "dr": dr_attack,
    "pgd": pgd_attack,
    "mifgsm": mi_fgsm_attack,
    "dim": dim_attack,
    "tidim": ti_dim_attack,
}

LABEL_FREE = {"dr"}


def run_attack(name: str, x: ImageBatch, model: SurrogateModel, cfg: AttackConfig, y=None):
    """Dispatch by attack name; labels are required for all but 'dr'."""
    if name not in ATTACKS:
        raise ConfigError("attack.name", f"must be one of {sorted(ATTACKS)}, got {name!r}")
    if name in LABEL_FREE:
        return dr_attack(x, model, cfg)
    return ATTACKS[name](x, y, model, cfg)
