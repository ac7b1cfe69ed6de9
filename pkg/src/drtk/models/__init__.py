"""Surrogate models: feature-tapped CNN, toy affine harness, layer profiler."""

from .affine import (
    AffineToyModel,
    LogitChangeReport,
    predict_logit_change,
    sample_cov,
    sample_std,
    std_descent_step,
    verify_logit_change,
)
from .base import FeatureMap, IdentitySurrogate, SurrogateModel, tap_features
from .desk import (
    ARCHS,
    DeskSurrogate,
    SmallConvNet,
    checkpoint_dir,
    load_checkpoint,
    save_checkpoint,
    train_desk_cnn,
    val_batch,
)
from .profiler import LayerProfile, LayerProfileRow, layer_std_per_image, profile_layers

__all__ = [
    "ARCHS",
    "AffineToyModel",
    "DeskSurrogate",
    "FeatureMap",
    "IdentitySurrogate",
    "LayerProfile",
    "LayerProfileRow",
    "LogitChangeReport",
    "SmallConvNet",
    "SurrogateModel",
    "checkpoint_dir",
    "layer_std_per_image",
    "load_checkpoint",
    "predict_logit_change",
    "profile_layers",
    "sample_cov",
    "sample_std",
    "save_checkpoint",
    "std_descent_step",
    "tap_features",
    "train_desk_cnn",
    "val_batch",
    "verify_logit_change",
]
