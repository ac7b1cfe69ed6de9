"""Image batches in pixel domain [0, 255] and lossless PNG persistence.

All perturbation budgets in this toolkit are defined in 8-bit pixel units,
so batches stay in [0, 255] end to end and are only quantized (round half
to even) when written to disk.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .errors import DatasetEmpty, ShapeMismatch


@dataclass
class ImageBatch:
    """Rank-4 (batch, channels, height, width) float tensor with per-image ids."""

    data: torch.Tensor
    ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not isinstance(self.data, torch.Tensor):
            self.data = torch.as_tensor(self.data, dtype=torch.float32)
        if self.data.dim() != 4:
            raise ShapeMismatch(f"image batch must be rank 4, got rank {self.data.dim()}")
        if not self.ids:
            self.ids = [f"{i:04d}" for i in range(self.data.shape[0])]
        if len(self.ids) != self.data.shape[0]:
            raise ShapeMismatch(
                f"{len(self.ids)} ids for {self.data.shape[0]} images"
            )
        lo, hi = float(self.data.min()), float(self.data.max())
        if lo < 0.0 or hi > 255.0:
            raise ValueError(f"pixel values outside [0, 255]: min={lo}, max={hi}")

    def __len__(self):
        return self.data.shape[0]

    def image(self, index: int) -> torch.Tensor:
        return self.data[index]

    def clone(self) -> "ImageBatch":
        return ImageBatch(self.data.clone(), list(self.ids))


def quantize(data: torch.Tensor) -> np.ndarray:
    """Round pixel values half-to-even to exact 8-bit levels."""
    arr = np.rint(data.detach().cpu().numpy())
    return np.clip(arr, 0, 255).astype(np.uint8)


def to_uint8_hwc(image: torch.Tensor) -> np.ndarray:
    """(c, h, w) pixel tensor -> (h, w, c) uint8 array."""
    return quantize(image).transpose(1, 2, 0)


def content_hash(image: torch.Tensor) -> str:
    """sha256 over dimensions and raw 8-bit pixel bytes (row-major, channel-last).

    Keyed on content, not filename, so recorded fixtures survive renames.
    """
    arr = to_uint8_hwc(image)
    h, w, c = arr.shape
    digest = hashlib.sha256()
    digest.update(f"{h}x{w}x{c}|".encode())
    digest.update(arr.tobytes())
    return digest.hexdigest()


def save_batch(batch: ImageBatch, out_dir: Path) -> list[Path]:
    """Write each image as 8-bit lossless PNG under out_dir/<id>.png."""
    out_dir = Path(out_dir)
    paths = []
    for i, image_id in enumerate(batch.ids):
        path = out_dir / f"{image_id}.png"
        path.parent.mkdir(parents=True, exist_ok=True)
        arr = to_uint8_hwc(batch.image(i))
        Image.fromarray(arr if arr.shape[2] == 3 else arr[:, :, 0]).save(path)
        paths.append(path)
    return paths


def _load_image(path: Path) -> torch.Tensor:
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.float32)
    return torch.from_numpy(arr.transpose(2, 0, 1))


def load_batch(src_dir: Path, limit: int | None = None) -> ImageBatch:
    """Load every PNG under src_dir (recursively, sorted) into one batch.

    Ids are extension-less POSIX paths relative to src_dir, so a directory
    layout like class_name/0001.png round-trips through save_batch.
    """
    src_dir = Path(src_dir)
    paths = sorted(src_dir.rglob("*.png"))
    if limit is not None:
        paths = paths[:limit]
    if not paths:
        raise DatasetEmpty(f"no .png images under {src_dir}")
    tensors = [_load_image(p) for p in paths]
    shapes = {tuple(t.shape) for t in tensors}
    if len(shapes) != 1:
        raise ShapeMismatch(f"mixed image shapes under {src_dir}: {sorted(shapes)}")
    ids = [p.relative_to(src_dir).with_suffix("").as_posix() for p in paths]
    return ImageBatch(torch.stack(tensors), ids)


def load_labeled_batch(src_dir: Path, class_names: list[str], limit: int | None = None):
    """Load a class-subdirectory image folder into (batch, labels).

    Labels index into class_names; images directly under src_dir (no class
    directory) are rejected.
    """
    batch = load_batch(src_dir, limit=limit)
    index = {name: i for i, name in enumerate(class_names)}
    labels = []
    for image_id in batch.ids:
        parts = image_id.split("/")
        if len(parts) < 2 or parts[0] not in index:
            raise DatasetEmpty(
                f"image {image_id!r} is not under a known class directory "
                f"(expected one of {class_names})"
            )
        labels.append(index[parts[0]])
    return batch, np.asarray(labels, dtype=np.int64)
