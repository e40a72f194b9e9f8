"""Normalized-residual conformity scores and fitting the conformal model.

The conformity score of a labeled prediction is (y - y_hat) / sigma_hat.
Fitting sorts the calibration scores once; per-test calibration scores are
then the affine image y_hat + sigma_hat * residuals, which preserves order,
so no per-test sorting is ever needed.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .types import ConformalModel, ContractError, PointPrediction, require_finite


def conformity_score(pred: PointPrediction, label: float) -> float:
    """Normalized residual (label - y_hat) / sigma_hat."""
    label = require_finite(label, f"label for {pred.id!r}")
    return (label - pred.y_hat) / pred.sigma_hat


def fit_conformal(
    calib_preds: Sequence[PointPrediction],
    calib_labels: Sequence[float],
    label_ids: Sequence[str] | None = None,
    feature_dim: int = 1,
    provenance: Mapping | None = None,
) -> ConformalModel:
    """Sort the calibration residuals into a ConformalModel.

    calib_labels must align positionally with calib_preds; pass label_ids
    when the labels' own ids are known so misalignment is rejected instead
    of silently producing garbage residuals.
    """
    preds = list(calib_preds)
    labels = [float(v) for v in calib_labels]
    if not preds:
        raise ContractError("calibration set is empty")
    if len(labels) != len(preds):
        raise ContractError(
            f"calibration misalignment: {len(preds)} predictions vs "
            f"{len(labels)} labels"
        )
    if label_ids is not None:
        ids = list(label_ids)
        if len(ids) != len(preds):
            raise ContractError(
                f"calibration misalignment: {len(preds)} predictions vs "
                f"{len(ids)} label ids"
            )
        for pos, (pred, lid) in enumerate(zip(preds, ids)):
            if pred.id != lid:
                raise ContractError(
                    f"calibration misalignment at position {pos}: prediction "
                    f"id {pred.id!r} vs label id {lid!r}"
                )
    residuals = np.sort(
        np.array(
            [conformity_score(p, y) for p, y in zip(preds, labels)], dtype=np.float64
        )
    )
    return ConformalModel(
        residuals=residuals,
        n_calib=len(preds),
        feature_dim=feature_dim,
        provenance=provenance or {},
    )


def calibration_scores(model: ConformalModel, test_pred: PointPrediction) -> np.ndarray:
    """Per-test thresholds y_hat + sigma_hat * residuals, still ascending."""
    return test_pred.y_hat + test_pred.sigma_hat * model.residuals
