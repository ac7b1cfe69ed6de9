"""Desk-scale trainable CNN surrogate with four tappable conv layers.

Stands in for large pretrained source networks: small enough to train in
seconds on CPU, deep enough to have distinct low / middle / top feature
layers for profiling. Checkpoints live at {root}/{arch}/{seed}/weights with
a meta.json carrying layer keys and the feature shape table.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn

from ..errors import DatasetEmpty, LoadFailure
from ..images import ImageBatch, load_batch
from .base import SurrogateModel

ARCHS = ("small4conv",)


class SmallConvNet(nn.Module):
    """conv(16) conv(32) pool conv(48) pool conv(64) -> linear head.

    Takes pixels in [0, 255]; the fixed 1/255 scaling is part of forward so
    attack budgets stay in pixel units.
    """

    conv_keys = ("conv1", "conv2", "conv3", "conv4")

    def __init__(self, n_classes: int, image_size: int = 32):
        super().__init__()
        self.image_size = image_size
        self.conv1 = nn.Sequential(nn.Conv2d(3, 16, 3, padding=1), nn.ReLU())
        self.conv2 = nn.Sequential(nn.Conv2d(16, 32, 3, padding=1), nn.ReLU())
        self.pool1 = nn.MaxPool2d(2)
        self.conv3 = nn.Sequential(nn.Conv2d(32, 48, 3, padding=1), nn.ReLU())
        self.pool2 = nn.MaxPool2d(2)
        self.conv4 = nn.Sequential(nn.Conv2d(48, 64, 3, padding=1), nn.ReLU())
        side = image_size // 4
        self.head = nn.Linear(64 * side * side, n_classes)
        self._stages = (
            ("conv1", self.conv1),
            ("conv2", self.conv2),
            ("pool1", self.pool1),
            ("conv3", self.conv3),
            ("pool2", self.pool2),
            ("conv4", self.conv4),
        )

    def forward(self, x, tap: str | None = None):
        h = x / 255.0
        tapped = None
        for name, stage in self._stages:
            h = stage(h)
            if name == tap:
                tapped = h
        logits = self.head(h.flatten(1))
        return logits, tapped


class DeskSurrogate(SurrogateModel):
    """SmallConvNet behind the white-box tap interface, inference mode."""

    def __init__(self, net: SmallConvNet, class_names: list[str], seed: int,
                 arch: str = "small4conv", val_accuracy: float | None = None):
        self.net = net.eval()
        self.class_names = list(class_names)
        self.n_classes = len(class_names)
        self.seed = seed
        self.arch = arch
        self.name = f"{arch}-s{seed}"
        self.layer_keys = SmallConvNet.conv_keys
        self.val_accuracy = val_accuracy
        self.feature_shapes = self._shape_table()

    def _shape_table(self) -> dict[str, list[int]]:
        probe = torch.zeros(1, 3, self.net.image_size, self.net.image_size)
        table = {}
        with torch.no_grad():
            for key in self.layer_keys:
                _, fm = self.net(probe, tap=key)
                table[key] = list(fm.shape[1:])
        return table

    def forward_with_features(self, x: torch.Tensor, layer_key: str | None):
        return self.net(x, tap=layer_key)

    def predict(self, batch) -> np.ndarray:
        """Class indices for an ImageBatch or rank-4 tensor, no gradients."""
        data = batch.data if hasattr(batch, "ids") else batch
        with torch.no_grad():
            logits, _ = self.net(data)
        return logits.argmax(dim=1).numpy()

    def predict_proba(self, batch) -> np.ndarray:
        data = batch.data if hasattr(batch, "ids") else batch
        with torch.no_grad():
            logits, _ = self.net(data)
        return torch.softmax(logits, dim=1).numpy()


def _class_names(split_dir: Path) -> list[str]:
    names = sorted(p.name for p in split_dir.iterdir() if p.is_dir())
    if not names:
        raise DatasetEmpty(f"no class directories under {split_dir}")
    return names


def _load_split(split_dir: Path, class_names: list[str]):
    batch = load_batch(split_dir)
    index = {n: i for i, n in enumerate(class_names)}
    labels = np.asarray([index[i.split("/")[0]] for i in batch.ids], dtype=np.int64)
    return batch.data, labels


def train_desk_cnn(
    dataset_dir,
    arch: str = "small4conv",
    seed: int = 0,
    epochs: int = 20,
    batch_size: int = 32,
    lr: float = 1e-3,
) -> DeskSurrogate:
    """Train the desk CNN on a train/val image-folder dataset, seeded.

    Different seeds give independently initialized and shuffled models, so
    seed 1 vs seed 2 act as source vs transfer target.
    """
    if arch not in ARCHS:
        raise LoadFailure(f"unknown architecture {arch!r}; available: {ARCHS}")
    dataset_dir = Path(dataset_dir)
    train_dir, val_dir = dataset_dir / "train", dataset_dir / "val"
    if not train_dir.is_dir():
        raise DatasetEmpty(f"missing train split at {train_dir}")
    if not val_dir.is_dir():
        raise DatasetEmpty(f"missing val split at {val_dir}")
    class_names = _class_names(train_dir)
    x_train, y_train = _load_split(train_dir, class_names)
    x_val, y_val = _load_split(val_dir, class_names)

    torch.manual_seed(seed)
    net = SmallConvNet(len(class_names), image_size=x_train.shape[-1])
    net.train()
    optimizer = torch.optim.Adam(net.parameters(), lr=lr)
    loss_fn = nn.CrossEntropyLoss()
    shuffle_rng = np.random.default_rng(seed)

    n = x_train.shape[0]
    y_train_t = torch.from_numpy(y_train)
    for _ in range(epochs):
        order = shuffle_rng.permutation(n)
        for start in range(0, n, batch_size):
            sel = order[start : start + batch_size]
            optimizer.zero_grad()
            logits, _ = net(x_train[sel])
            loss = loss_fn(logits, y_train_t[sel])
            loss.backward()
            optimizer.step()

    net.eval()
    with torch.no_grad():
        val_logits, _ = net(x_val)
    val_acc = float((val_logits.argmax(dim=1).numpy() == y_val).mean())
    return DeskSurrogate(net, class_names, seed=seed, arch=arch, val_accuracy=val_acc)


def checkpoint_dir(models_root, arch: str, seed: int) -> Path:
    return Path(models_root) / arch / str(seed)


def save_checkpoint(surrogate: DeskSurrogate, models_root) -> Path:
    out = checkpoint_dir(models_root, surrogate.arch, surrogate.seed)
    out.mkdir(parents=True, exist_ok=True)
    torch.save(surrogate.net.state_dict(), out / "weights")
    meta = {
        "arch": surrogate.arch,
        "seed": surrogate.seed,
        "n_classes": surrogate.n_classes,
        "class_names": surrogate.class_names,
        "image_size": surrogate.net.image_size,
        "layer_keys": list(surrogate.layer_keys),
        "feature_shapes": surrogate.feature_shapes,
        "val_accuracy": surrogate.val_accuracy,
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2))
    return out


def load_checkpoint(path) -> DeskSurrogate:
    """Load a {arch}/{seed} checkpoint directory; LoadFailure names the path."""
    path = Path(path)
    meta_path = path / "meta.json"
    weights_path = path / "weights"
    if not meta_path.is_file() or not weights_path.is_file():
        raise LoadFailure(f"no checkpoint at {path} (need weights + meta.json)")
    try:
        meta = json.loads(meta_path.read_text())
        net = SmallConvNet(meta["n_classes"], image_size=meta["image_size"])
        net.load_state_dict(torch.load(weights_path, weights_only=True))
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        raise LoadFailure(f"corrupt checkpoint at {path}: {exc}") from exc
    return DeskSurrogate(
        net, meta["class_names"], seed=meta["seed"], arch=meta["arch"],
        val_accuracy=meta.get("val_accuracy"),
    )


def val_batch(dataset_dir, limit: int | None = None):
    """(ImageBatch, labels) from the val split; handy for probes and evals."""
    dataset_dir = Path(dataset_dir)
    class_names = _class_names(dataset_dir / "val")
    batch = load_batch(dataset_dir / "val", limit=limit)
    index = {n: i for i, n in enumerate(class_names)}
    labels = np.asarray([index[i.split("/")[0]] for i in batch.ids], dtype=np.int64)
    return batch, labels
