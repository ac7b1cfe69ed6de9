"""Toy affine harness: why shrinking feature spread kills the top logit.

A classifier is split into a feature extractor a = f(x) and an affine head
y = W a (constant term omitted). A first-order step that reduces the sample
std of a changes the correct-class logit by exactly

    delta_y_c = -2 * alpha * sqrt(n-1) * Cov(w_c, a) / Std(a)

with sample (n-1) covariance over paired entries of w_c and a. For the
affine head the prediction is exact, so it doubles as its own oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import ZeroVariance


def sample_std(a: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    centered = a - a.mean()
    return float(np.sqrt(np.sum(centered * centered) / (a.size - 1)))


def sample_cov(u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    return float(np.sum((u - u.mean()) * (v - v.mean())) / (u.size - 1))


@dataclass
class AffineToyModel:
    """weight: (k, n) logit rows; x: input sample; extractor: None = identity."""

    weight: np.ndarray
    x: np.ndarray
    extractor: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.x = np.asarray(self.x, dtype=np.float64).reshape(-1)

    @property
    def feature(self) -> np.ndarray:
        a = self.x if self.extractor is None else np.asarray(self.extractor(self.x))
        return a.reshape(-1).astype(np.float64)

    def logits_of(self, a: np.ndarray) -> np.ndarray:
        return self.weight @ np.asarray(a, dtype=np.float64).reshape(-1)


def std_descent_step(a: np.ndarray, alpha: float) -> np.ndarray:
    """First-order spread-reducing step: a - 2*alpha*(a - mean)/(sqrt(n-1)*std)."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    std = sample_std(a)
    if std == 0.0:
        raise ZeroVariance("feature vector is constant; descent direction undefined")
    n = a.size
    return a - 2.0 * alpha * (a - a.mean()) / (np.sqrt(n - 1) * std)


def predict_logit_change(toy: AffineToyModel, c: int, alpha: float) -> float:
    """Predicted change of logit c under the first-order spread-reducing step."""
    a = toy.feature
    std = sample_std(a)
    if std == 0.0:
        raise ZeroVariance("feature vector is constant; prediction undefined")
    w_c = toy.weight[c]
    n = a.size
    return float(-2.0 * alpha * np.sqrt(n - 1) * sample_cov(w_c, a) / std)


@dataclass
class LogitChangeReport:
    predicted: float
    actual: float
    abs_error: float


def verify_logit_change(toy: AffineToyModel, c: int, alpha: float) -> LogitChangeReport:
    """Apply the step to the feature, push it through the affine head, compare.

    Exact for the affine head up to float rounding, so |error| stays at the
    1e-9 level for any instance with nonzero spread.
    """
    a = toy.feature
    a_stepped = std_descent_step(a, alpha)
    actual = float(toy.logits_of(a_stepped)[c] - toy.logits_of(a)[c])
    predicted = predict_logit_change(toy, c, alpha)
    return LogitChangeReport(predicted, actual, abs(predicted - actual))
