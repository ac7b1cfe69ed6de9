"""Step-count and layer sweeps producing curve data for the eval report."""

from __future__ import annotations

import numpy as np

from ..attacks.config import AttackConfig
from ..attacks.steppers import run_attack
from ..images import ImageBatch
from ..models.base import SurrogateModel
from ..models.profiler import profile_layers
from .relative import CurveRow, EvalReport, relative_eval

DEFAULT_STEP_VALUES = (20, 100, 500)


def sweep_steps(
    attacks: list[str],
    x: ImageBatch,
    model: SurrogateModel,
    cfg: AttackConfig,
    target,
    labels=None,
    n_values=DEFAULT_STEP_VALUES,
) -> EvalReport:
    """One relative eval per (attack, step count), all at the shared budget.

    The report's meta records, per attack, whether the metric is
    non-increasing in the step count (reported, not asserted).
    """
    report = EvalReport()
    n_values = sorted(int(n) for n in n_values)
    monotone = {}
    for attack in attacks:
        values = []
        for n in n_values:
            result = run_attack(attack, x, model, cfg.replace(steps=n), y=labels)
            row = relative_eval(
                target, x, result.adversarial,
                source_model=model.name, attack=f"{attack}(N={n})",
            )
            report.rows.append(row)
            report.curves.append(
                CurveRow("steps", attack, target.name, str(n), row.metric_name,
                         row.adv_value)
            )
            values.append(row.adv_value)
        monotone[attack] = bool(np.all(np.diff(values) <= 0))
    report.meta["step_values"] = n_values
    report.meta["monotone_non_increasing"] = monotone
    return report


def sweep_layers(
    model: SurrogateModel,
    layer_keys,
    probe: ImageBatch,
    cfg: AttackConfig,
    target,
) -> EvalReport:
    """Dispersion attack per target layer, joined with the layer profile.

    Each curve row carries (layer, std_delta, relative metric) so the
    middle-vs-edge pattern can be read off directly.
    """
    def evaluator(clean, adv):
        return relative_eval(target, clean, adv, source_model=model.name,
                             attack="dr").adv_value

    profile = profile_layers(model, probe, cfg, evaluator=evaluator,
                             layer_keys=layer_keys)
    report = EvalReport()
    for row in profile.rows:
        report.curves.append(
            CurveRow(
                "layers", "dr", target.name, row.layer_key,
                "relative_metric", row.downstream_metric, std_delta=row.delta,
            )
        )
    report.meta["recommended_layer"] = profile.recommended_layer
    return report
