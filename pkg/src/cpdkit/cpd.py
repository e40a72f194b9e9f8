"""Stepwise predictive CDFs: evaluation, quantiles, and central intervals.

A distribution holds sorted finite thresholds C_(1) <= ... <= C_(n) plus a
tie-breaker tau in [0, 1]; conceptually C_(0) = -inf and C_(n+1) = +inf.
The CDF at a point y strictly between thresholds i and i+1 is

    (i + tau) / (n + 1)

and at a point equal to one or more thresholds, with first and last tied
(1-indexed) positions f and l,

    (f - 1 + (l - f + 2) * tau) / (n + 1).

`counting_cdf` computes the same quantity from raw unsorted scores by
counting; the two routes are checked against each other in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .types import (
    ContractError,
    PredictionInterval,
    PredictiveDistribution,
    require_finite,
)

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class TauPolicy:
    """How tau is produced for each test example.

    fixed(value) always returns the constant (0.5 is the usual choice for
    reproducible reports); seeded(seed) returns a uniform draw keyed by
    (seed, example_index), identical across runs and platforms.
    """

    mode: str
    value: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.mode == "fixed":
            if self.value is None:
                raise ContractError("fixed tau policy needs a value")
            val = require_finite(self.value, "tau value")
            if not 0.0 <= val <= 1.0:
                raise ContractError(f"fixed tau must be in [0, 1], got {val!r}")
            object.__setattr__(self, "value", val)
        elif self.mode == "seeded_random":
            if self.seed is None:
                raise ContractError("seeded_random tau policy needs a seed")
            object.__setattr__(self, "seed", int(self.seed))
        else:
            raise ContractError(f"unknown tau mode {self.mode!r}")

    @classmethod
    def fixed(cls, value: float) -> "TauPolicy":
        return cls(mode="fixed", value=value)

    @classmethod
    def seeded(cls, seed: int) -> "TauPolicy":
        return cls(mode="seeded_random", seed=seed)


def draw_tau(policy: TauPolicy, example_index: int) -> float:
    """One tau per test example; deterministic for both policy modes."""
    if example_index < 0:
        raise ContractError(f"example_index must be >= 0, got {example_index}")
    if policy.mode == "fixed":
        return policy.value
    rng = np.random.default_rng((policy.seed & _SEED_MASK, int(example_index)))
    return float(rng.random())


def cdf_value(dist: PredictiveDistribution, y: float) -> float:
    """Evaluate the stepwise CDF at y using this distribution's tau draw."""
    y = require_finite(y, "y")
    t = dist.thresholds
    n = t.size
    tau = dist.tau
    lo = int(np.searchsorted(t, y, side="left"))
    hi = int(np.searchsorted(t, y, side="right"))
    if lo == hi:
        # strictly between neighboring thresholds (ends act as -inf / +inf)
        return (lo + tau) / (n + 1)
    first, last = lo + 1, hi  # 1-indexed extent of the tie run at y
    return (first - 1 + (last - first + 2) * tau) / (n + 1)


def counting_cdf(scores, value: float, tau: float) -> float:
    """Rank-counting form of the stepwise CDF, from raw unsorted scores.

    Returns (#{scores < value} + tau * #{scores == value} + tau) / (n + 1).
    """
    value = require_finite(value, "value")
    tau = require_finite(tau, "tau")
    if not 0.0 <= tau <= 1.0:
        raise ContractError(f"tau must be in [0, 1], got {tau!r}")
    arr = np.asarray(scores, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ContractError("scores must all be finite")
    below = int(np.count_nonzero(arr < value))
    at = int(np.count_nonzero(arr == value))
    return (below + tau * at + tau) / (arr.size + 1)


def quantile(dist: PredictiveDistribution, p: float) -> float:
    """Generalized inverse of the step CDF: threshold at index ceil(p*(n+1)).

    Index 0 maps to -inf and indexes beyond n map to +inf, so tail
    quantiles are honestly unbounded when the calibration set is too small.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ContractError(f"p must be in (0, 1), got {p!r}")
    t = dist.thresholds
    n = t.size
    idx = math.ceil(p * (n + 1))
    if idx > n:
        return math.inf
    return float(t[idx - 1])


def interval(dist: PredictiveDistribution, epsilon: float) -> PredictionInterval:
    """Central interval at significance epsilon: quantiles eps/2 and 1-eps/2.

    The lower endpoint uses index floor((eps/2)*(n+1)) with index 0 meaning
    -inf; the upper endpoint is quantile(1 - eps/2). epsilon may be 1.0 so
    a full significance grid evaluates without a special case.
    """
    epsilon = float(epsilon)
    if not 0.0 < epsilon <= 1.0:
        raise ContractError(f"epsilon must be in (0, 1], got {epsilon!r}")
    t = dist.thresholds
    n = t.size
    lo_idx = math.floor((epsilon / 2) * (n + 1))
    lower = -math.inf if lo_idx == 0 else float(t[lo_idx - 1])
    upper = quantile(dist, 1 - epsilon / 2)
    return PredictionInterval(lower=lower, upper=upper, confidence=1 - epsilon)


def p_below(dist: PredictiveDistribution, threshold: float) -> float:
    """Predicted probability that the true value falls at or below threshold."""
    return cdf_value(dist, threshold)
