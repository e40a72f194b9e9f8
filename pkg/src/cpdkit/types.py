"""Core value types shared by every other module.

All records are immutable after construction and validated eagerly, so a
constructed instance can be shared across threads and trusted downstream.
Labels are z-normalized floats, features are fixed-length float vectors,
and every real is a 64-bit float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np


class ContractError(ValueError):
    """An input violates a documented precondition or type invariant."""


class DegenerateDataError(ValueError):
    """Structurally valid input that is numerically degenerate.

    Examples: constant raw scores, all-zero residuals, a single-class
    labeling. Kept distinct from ContractError so callers (and the CLI
    exit codes) can tell bad wiring from bad data.
    """


def require_finite(value, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ContractError(f"{name} must be finite, got {value!r}")
    return value


def _readonly_float_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ContractError(f"{name} must be a one-dimensional sequence")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LabeledExample:
    """One observation: an opaque id, a feature vector, and its label."""

    id: str
    features: tuple[float, ...]
    label: float

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ContractError("example id must be a nonempty string")
        feats = tuple(float(v) for v in self.features)
        if len(feats) < 1:
            raise ContractError(
                f"example {self.id!r}: feature vector must have dimension >= 1"
            )
        for j, v in enumerate(feats):
            if not math.isfinite(v):
                raise ContractError(
                    f"example {self.id!r}: feature {j} is not finite ({v!r})"
                )
        object.__setattr__(self, "features", feats)
        object.__setattr__(
            self, "label", require_finite(self.label, f"example {self.id!r}: label")
        )


@dataclass(frozen=True)
class PointPrediction:
    """Point prediction y_hat with a strictly positive difficulty sigma_hat."""

    id: str
    y_hat: float
    sigma_hat: float

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ContractError("prediction id must be a nonempty string")
        object.__setattr__(
            self, "y_hat", require_finite(self.y_hat, f"prediction {self.id!r}: y_hat")
        )
        sigma = require_finite(self.sigma_hat, f"prediction {self.id!r}: sigma_hat")
        if sigma <= 0.0:
            raise ContractError(
                f"prediction {self.id!r}: sigma_hat must be > 0, got {sigma!r}"
            )
        object.__setattr__(self, "sigma_hat", sigma)


@dataclass(frozen=True, eq=False)
class ConformalModel:
    """Sorted normalized calibration residuals plus bookkeeping.

    residuals[i] = (y_i - y_hat_i) / sigma_hat_i over the calibration set,
    stored ascending with ties kept. Calibration scores for a new test
    prediction are recovered as y_hat + sigma_hat * residuals, so nothing
    else is needed at query time.
    """

    residuals: np.ndarray
    n_calib: int
    feature_dim: int
    provenance: Mapping = field(default_factory=dict)

    def __post_init__(self):
        res = _readonly_float_array(self.residuals, "residuals")
        if res.size < 1:
            raise ContractError("residuals must be nonempty")
        if not np.all(np.isfinite(res)):
            raise ContractError("residuals must all be finite")
        if res.size > 1 and np.any(np.diff(res) < 0.0):
            raise ContractError("residuals must be sorted nondecreasing")
        object.__setattr__(self, "residuals", res)
        if int(self.n_calib) != res.size:
            raise ContractError(
                f"n_calib={self.n_calib} does not match {res.size} residuals"
            )
        object.__setattr__(self, "n_calib", int(self.n_calib))
        if int(self.feature_dim) < 1:
            raise ContractError(f"feature_dim must be >= 1, got {self.feature_dim}")
        object.__setattr__(self, "feature_dim", int(self.feature_dim))
        # defensive copy; treat as read-only afterwards
        object.__setattr__(self, "provenance", dict(self.provenance))


@dataclass(frozen=True, eq=False)
class PredictiveDistribution:
    """A stepwise predictive CDF: sorted jump locations plus one tau draw.

    The array holds only the finite jump points; conceptually the sequence
    is closed by sentinels at -inf and +inf. tau is the uniform tie-breaker
    drawn once per test example, so the CDF is a coherent monotone function.
    """

    thresholds: np.ndarray
    tau: float

    def __post_init__(self):
        thr = _readonly_float_array(self.thresholds, "thresholds")
        if thr.size < 1:
            raise ContractError("thresholds must be nonempty")
        if not np.all(np.isfinite(thr)):
            raise ContractError("thresholds must all be finite")
        if thr.size > 1 and np.any(np.diff(thr) < 0.0):
            raise ContractError("thresholds must be sorted nondecreasing")
        object.__setattr__(self, "thresholds", thr)
        tau = require_finite(self.tau, "tau")
        if not 0.0 <= tau <= 1.0:
            raise ContractError(f"tau must be in [0, 1], got {tau!r}")
        object.__setattr__(self, "tau", tau)

    @property
    def n_calib(self) -> int:
        return int(self.thresholds.size)


@dataclass(frozen=True)
class PredictionInterval:
    """Closed interval [lower, upper]; endpoints may be -inf / +inf.

    confidence is the nominal coverage 1 - epsilon. A confidence of 0.0
    occurs at the top of the significance grid and is allowed.
    """

    lower: float
    upper: float
    confidence: float

    def __post_init__(self):
        lower = float(self.lower)
        upper = float(self.upper)
        if math.isnan(lower) or math.isnan(upper):
            raise ContractError("interval endpoints must not be NaN")
        if lower > upper:
            raise ContractError(f"interval lower {lower!r} exceeds upper {upper!r}")
        conf = require_finite(self.confidence, "confidence")
        if not 0.0 <= conf < 1.0:
            raise ContractError(f"confidence must be in [0, 1), got {conf!r}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "confidence", conf)

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def covers(self, y: float) -> bool:
        """Closed-interval membership; infinite endpoints always cover."""
        return self.lower <= y <= self.upper


@dataclass(frozen=True)
class EvalReport:
    """Calibration, sharpness, and failure-detection summary for one method.

    sharpness_at maps a confidence level to the mean width of the bounded
    intervals at that level; sharpness_excluded counts the unbounded
    intervals left out of each mean.
    """

    method_name: str
    ece: float
    sharpness_at: Mapping[float, float]
    auroc: float
    n_test: int
    sharpness_excluded: Mapping[float, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.method_name:
            raise ContractError("method_name must be nonempty")
        ece = require_finite(self.ece, "ece")
        if not 0.0 <= ece <= 1.0:
            raise ContractError(f"ece must be in [0, 1], got {ece!r}")
        object.__setattr__(self, "ece", ece)
        auroc = require_finite(self.auroc, "auroc")
        if not 0.0 <= auroc <= 1.0:
            raise ContractError(f"auroc must be in [0, 1], got {auroc!r}")
        object.__setattr__(self, "auroc", auroc)
        if int(self.n_test) < 1:
            raise ContractError(f"n_test must be positive, got {self.n_test}")
        object.__setattr__(self, "n_test", int(self.n_test))
        sharp = {}
        for conf, width in dict(self.sharpness_at).items():
            conf = require_finite(conf, "sharpness confidence level")
            width = require_finite(width, f"sharpness width at {conf}")
            if width < 0.0:
                raise ContractError(f"sharpness width at {conf} must be >= 0")
            sharp[conf] = width
        object.__setattr__(self, "sharpness_at", sharp)
        excluded = {float(k): int(v) for k, v in dict(self.sharpness_excluded).items()}
        if any(v < 0 for v in excluded.values()):
            raise ContractError("excluded-interval counts must be >= 0")
        object.__setattr__(self, "sharpness_excluded", excluded)
