"""Attack hyperparameters with validation."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, asdict

from ..errors import ConfigError

OPTIMIZER_MODES = ("sign_step", "raw_gradient", "adaptive_moment")


@dataclass
class AttackConfig:
    """All attack hyperparameters, in pixel units where applicable.

    Defaults follow the standard strong-transfer setup: budget 16/255,
    step 4, 100 iterations, momentum decay 1.0, transform probability 0.5.
    """

    epsilon: float = 16.0
    alpha: float = 4.0
    steps: int = 100
    momentum: float = 1.0
    transform_prob: float = 0.5
    ti_kernel_size: int = 15
    optimizer_mode: str = "sign_step"
    beta1: float = 0.98
    beta2: float = 0.99
    learning_rate: float = 5e-2
    target_layer: str | None = None
    rng_seed: int = 0
    resize_lo: float = 0.9
    resize_hi: float = 1.0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.epsilon < 0:
            raise ConfigError("epsilon", f"must be >= 0, got {self.epsilon}")
        if self.alpha <= 0:
            raise ConfigError("alpha", f"must be > 0, got {self.alpha}")
        # a single sign step may not overshoot the ball diameter; vacuous at
        # epsilon == 0 where projection pins every iterate to the original
        if self.epsilon > 0 and self.alpha > 2 * self.epsilon:
            raise ConfigError(
                "alpha", f"must be <= 2*epsilon ({2 * self.epsilon}), got {self.alpha}"
            )
        if self.steps < 1:
            raise ConfigError("steps", f"must be >= 1, got {self.steps}")
        if not 0.0 <= self.transform_prob <= 1.0:
            raise ConfigError(
                "transform_prob", f"must be in [0, 1], got {self.transform_prob}"
            )
        if self.momentum < 0:
            raise ConfigError("momentum", f"must be >= 0, got {self.momentum}")
        if self.ti_kernel_size < 1 or self.ti_kernel_size % 2 == 0:
            raise ConfigError(
                "ti_kernel_size", f"must be a positive odd integer, got {self.ti_kernel_size}"
            )
        if self.optimizer_mode not in OPTIMIZER_MODES:
            raise ConfigError(
                "optimizer_mode",
                f"must be one of {OPTIMIZER_MODES}, got {self.optimizer_mode!r}",
            )
        for name in ("beta1", "beta2"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise ConfigError(name, f"must be in [0, 1), got {value}")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate", f"must be > 0, got {self.learning_rate}")
        if not 0.0 < self.resize_lo <= self.resize_hi <= 1.0:
            raise ConfigError(
                "resize_lo",
                f"need 0 < resize_lo <= resize_hi <= 1, got ({self.resize_lo}, {self.resize_hi})",
            )

    def replace(self, **kwargs) -> "AttackConfig":
        values = asdict(self)
        values.update(kwargs)
        return AttackConfig(**values)

    @classmethod
    def from_dict(cls, raw: dict) -> "AttackConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown attack config field")
        return cls(**raw)

    def to_dict(self) -> dict:
        return asdict(self)
