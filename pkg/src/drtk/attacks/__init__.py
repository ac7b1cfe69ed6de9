"""Attack objectives, budget projection, and the five iterative steppers."""

from .config import AttackConfig, OPTIMIZER_MODES
from .objective import dispersion, dispersion_gradient
from .projection import project, project_tensor
from .steppers import (
    ATTACKS,
    LABEL_FREE,
    AttackResult,
    TraceRecord,
    dim_attack,
    dr_attack,
    diverse_input,
    gaussian_kernel,
    mi_fgsm_attack,
    pgd_attack,
    run_attack,
    ti_dim_attack,
)

__all__ = [
    "ATTACKS",
    "LABEL_FREE",
    "AttackConfig",
    "AttackResult",
    "OPTIMIZER_MODES",
    "TraceRecord",
    "dim_attack",
    "dispersion",
    "dispersion_gradient",
    "diverse_input",
    "dr_attack",
    "gaussian_kernel",
    "mi_fgsm_attack",
    "pgd_attack",
    "project",
    "project_tensor",
    "run_attack",
    "ti_dim_attack",
]
