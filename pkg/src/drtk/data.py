"""Seeded synthetic shapes corpus for desk-scale experiments.

Eight classes = {circle, square} x {red, green} x {solid, striped} on a dark
noisy background. Color separates coarse groups while the stripe texture is
a mid-level feature, so attacks that destroy feature-map structure actually
flip labels at this scale.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

SHAPES = ("circle", "square")
COLORS = ("red", "green")
TEXTURES = ("solid", "striped")

CLASS_NAMES = tuple(
    f"{color}-{shape}-{texture}"
    for color in COLORS
    for shape in SHAPES
    for texture in TEXTURES
)

_CHANNEL = {"red": 0, "green": 1}


def render_shape(class_name: str, rng: np.random.Generator, size: int = 32) -> np.ndarray:
    """One (size, size, 3) uint8 image of the class, jittered by rng.

    Contrast is kept moderate (background up to ~45, shape ~85-125) so a
    16-level pixel budget is a meaningful fraction of the feature contrast.
    """
    color, shape, texture = class_name.split("-")
    img = rng.uniform(10.0, 45.0, size=(size, size, 3))

    cy = size / 2 + rng.uniform(-3, 3)
    cx = size / 2 + rng.uniform(-3, 3)
    yy, xx = np.mgrid[0:size, 0:size]
    if shape == "circle":
        radius = rng.uniform(0.25, 0.34) * size
        mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= radius**2
    else:
        half = rng.uniform(0.22, 0.3) * size
        mask = (np.abs(yy - cy) <= half) & (np.abs(xx - cx) <= half)

    level = rng.uniform(85.0, 125.0)
    fill = level + rng.uniform(-8.0, 8.0, size=(size, size))
    if texture == "striped":
        phase = int(rng.integers(0, 4))
        stripe_off = ((yy + phase) // 2) % 2 == 1
        fill = np.where(stripe_off, fill * 0.25, fill)

    img[..., _CHANNEL[color]] = np.where(mask, fill, img[..., _CHANNEL[color]])
    return np.clip(img, 0, 255).astype(np.uint8)


def make_shapes_dataset(
    root,
    n_train: int = 40,
    n_val: int = 10,
    size: int = 32,
    seed: int = 0,
) -> list[str]:
    """Write root/{train,val}/<class>/NNNN.png; returns the class names."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    for split, count in (("train", n_train), ("val", n_val)):
        for class_name in CLASS_NAMES:
            out = root / split / class_name
            out.mkdir(parents=True, exist_ok=True)
            for i in range(count):
                arr = render_shape(class_name, rng, size=size)
                Image.fromarray(arr).save(out / f"{i:04d}.png")
    return list(CLASS_NAMES)
