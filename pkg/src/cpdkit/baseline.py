"""Fixed-variance Gaussian baseline: shared sigma, probit intervals, CDF.

The baseline maps every point prediction to N(y_hat, sigma_fixed^2), where
sigma_fixed^2 is the mean squared residual on a held-out validation split.
Its intervals are symmetric, y_hat +/- sigma_fixed * probit((1+c)/2), and
have the same width for every example by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .types import ContractError, DegenerateDataError, PredictionInterval, require_finite

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Acklam's rational approximation to the normal quantile (~1e-9 relative
# error), then one Newton step against the erf-based CDF below.
_ACKLAM_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_ACKLAM_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_ACKLAM_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_ACKLAM_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)
_ACKLAM_LOW = 0.02425


@dataclass(frozen=True)
class GaussianBaseline:
    """Shared standard deviation for the fixed-variance Gaussian baseline."""

    sigma_fixed: float

    def __post_init__(self):
        sigma = require_finite(self.sigma_fixed, "sigma_fixed")
        if sigma <= 0.0:
            raise ContractError(f"sigma_fixed must be > 0, got {sigma!r}")
        object.__setattr__(self, "sigma_fixed", sigma)


def fit_sigma_fixed(val_labels, val_preds) -> GaussianBaseline:
    """Root mean squared residual over an aligned validation split."""
    labels = np.asarray(val_labels, dtype=np.float64)
    preds = np.asarray(val_preds, dtype=np.float64)
    if labels.size == 0:
        raise ContractError("validation set is empty")
    if labels.shape != preds.shape:
        raise ContractError(
            f"validation misalignment: {labels.size} labels vs {preds.size} predictions"
        )
    if not (np.all(np.isfinite(labels)) and np.all(np.isfinite(preds))):
        raise ContractError("validation labels and predictions must be finite")
    mean_sq = float(np.mean((labels - preds) ** 2))
    if mean_sq == 0.0:
        raise DegenerateDataError(
            "all validation residuals are zero; sigma_fixed would be 0"
        )
    return GaussianBaseline(sigma_fixed=math.sqrt(mean_sq))


def _norm_cdf_std(x: float) -> float:
    # erfc formulation stays accurate deep into both tails
    return 0.5 * math.erfc(-x / _SQRT2)


def _norm_pdf_std(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def probit(p: float) -> float:
    """Standard normal quantile function, sqrt(2) * erfinv(2p - 1)."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ContractError(f"probit requires p in (0, 1), got {p!r}")
    a, b, c, d = _ACKLAM_A, _ACKLAM_B, _ACKLAM_C, _ACKLAM_D
    if p < _ACKLAM_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    elif p <= 1.0 - _ACKLAM_LOW:
        q = p - 0.5
        r = q * q
        x = (
            (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5])
            * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
        )
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    # one Newton refinement against the erf-based CDF
    pdf = _norm_pdf_std(x)
    if pdf > 0.0:
        x -= (_norm_cdf_std(x) - p) / pdf
    return x


def gaussian_interval(
    mu: float, baseline: GaussianBaseline, confidence: float
) -> PredictionInterval:
    """Symmetric interval mu +/- sigma_fixed * probit((1 + confidence) / 2).

    confidence 0.0 is allowed (zero-width interval) so a full significance
    grid evaluates without a special case.
    """
    mu = require_finite(mu, "mu")
    confidence = float(confidence)
    if not 0.0 <= confidence < 1.0:
        raise ContractError(f"confidence must be in [0, 1), got {confidence!r}")
    half_width = baseline.sigma_fixed * probit((1.0 + confidence) / 2.0)
    return PredictionInterval(
        lower=mu - half_width, upper=mu + half_width, confidence=confidence
    )


def gaussian_cdf(mu: float, baseline: GaussianBaseline, y: float) -> float:
    """Normal CDF of y under N(mu, sigma_fixed^2)."""
    mu = require_finite(mu, "mu")
    y = require_finite(y, "y")
    return _norm_cdf_std((y - mu) / baseline.sigma_fixed)
