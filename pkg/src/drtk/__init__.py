"""drtk: cross-task transferable adversarial examples via feature-map
dispersion reduction, plus baseline attacks and a relative-metric harness."""

__version__ = "0.1.0"

from .images import ImageBatch  # noqa: E402
from .attacks import AttackConfig, AttackResult  # noqa: E402

__all__ = ["AttackConfig", "AttackResult", "ImageBatch", "__version__"]
