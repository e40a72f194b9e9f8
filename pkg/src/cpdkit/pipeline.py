"""End-to-end composition: fit the models, predict, and evaluate.

This is where the KNN point predictor, the conformal layer, and the
Gaussian baseline are wired together the same way the CLI drives them, so
library users and the command line produce identical numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import knn as knn_mod
from .baseline import GaussianBaseline, fit_sigma_fixed, gaussian_cdf, gaussian_interval
from .conformity import calibration_scores, fit_conformal
from .cpd import TauPolicy, cdf_value, draw_tau, interval
from .knn import FittedKnn, KnnConfig
from .metrics import (
    SignificanceGrid,
    auroc,
    bottom_decile_flags,
    ece_from_table,
    reliability_table,
    sharpness,
)
from .types import (
    ConformalModel,
    ContractError,
    EvalReport,
    LabeledExample,
    PointPrediction,
    PredictiveDistribution,
)

METHODS = ("cpd", "gaussian")


@dataclass(frozen=True)
class FittedArtifacts:
    """Everything cmd_fit produces: KNN, conformal residuals, baseline sigma."""

    knn: FittedKnn
    conformal: ConformalModel
    baseline: GaussianBaseline


def point_predictions(
    model: FittedKnn, examples: Sequence[LabeledExample]
) -> list[PointPrediction]:
    """KNN point prediction and difficulty for each example, by id."""
    examples = list(examples)
    if not examples:
        raise ContractError("no examples to predict")
    y_hat, sigma_hat = knn_mod.point_predict(model, examples)
    return [
        PointPrediction(ex.id, float(y), float(s))
        for ex, y, s in zip(examples, y_hat, sigma_hat)
    ]


def fit_artifacts(
    train: Sequence[LabeledExample],
    calib: Sequence[LabeledExample],
    config: KnnConfig,
    provenance: Mapping | None = None,
) -> FittedArtifacts:
    """Fit KNN on train, conformal residuals and baseline sigma on calib.

    The calibration split doubles as the baseline's validation split so
    both methods consume identical data.
    """
    calib = list(calib)
    if not calib:
        raise ContractError("calibration set is empty")
    model = knn_mod.fit(train, config)
    preds = point_predictions(model, calib)
    labels = [ex.label for ex in calib]
    conformal = fit_conformal(
        preds,
        labels,
        label_ids=[ex.id for ex in calib],
        feature_dim=model.feature_dim,
        provenance=provenance or {},
    )
    baseline = fit_sigma_fixed(labels, [p.y_hat for p in preds])
    return FittedArtifacts(knn=model, conformal=conformal, baseline=baseline)


def predictive_distributions(
    conformal: ConformalModel,
    preds: Sequence[PointPrediction],
    tau_policy: TauPolicy,
) -> list[PredictiveDistribution]:
    """One stepwise CDF per prediction; tau keyed by position in the batch."""
    return [
        PredictiveDistribution(
            thresholds=calibration_scores(conformal, pred),
            tau=draw_tau(tau_policy, idx),
        )
        for idx, pred in enumerate(preds)
    ]


def cpd_interval_provider(dists: Sequence[PredictiveDistribution]):
    """eps -> per-example central conformal intervals."""
    dists = list(dists)

    def provider(eps: float):
        return [interval(d, eps) for d in dists]

    return provider


def gaussian_interval_provider(
    preds: Sequence[PointPrediction], baseline: GaussianBaseline
):
    """eps -> per-example fixed-width Gaussian intervals at confidence 1-eps."""
    preds = list(preds)

    def provider(eps: float):
        return [gaussian_interval(p.y_hat, baseline, 1.0 - eps) for p in preds]

    return provider


def failure_scores(
    method: str,
    threshold: float,
    dists: Sequence[PredictiveDistribution] | None = None,
    preds: Sequence[PointPrediction] | None = None,
    baseline: GaussianBaseline | None = None,
) -> list[float]:
    """Predicted probability of landing at or below threshold, per example."""
    if method == "cpd":
        return [cdf_value(d, threshold) for d in dists]
    if method == "gaussian":
        return [gaussian_cdf(p.y_hat, baseline, threshold) for p in preds]
    raise ContractError(f"unknown method {method!r}; expected one of {METHODS}")


def evaluate_predictions(
    preds: Sequence[PointPrediction],
    labels: Sequence[float],
    method: str,
    grid: SignificanceGrid,
    tau_policy: TauPolicy,
    conformal: ConformalModel | None = None,
    baseline: GaussianBaseline | None = None,
    sharpness_confidences: Sequence[float] = (0.9,),
) -> EvalReport:
    """Score one method on aligned predictions and true labels."""
    preds = list(preds)
    labels = [float(v) for v in labels]
    if len(preds) != len(labels):
        raise ContractError(
            f"evaluation misalignment: {len(preds)} predictions vs {len(labels)} labels"
        )
    if method == "cpd":
        if conformal is None:
            raise ContractError("cpd evaluation needs a conformal model")
        dists = predictive_distributions(conformal, preds, tau_policy)
        provider = cpd_interval_provider(dists)
    elif method == "gaussian":
        if baseline is None:
            raise ContractError("gaussian evaluation needs a fitted baseline")
        dists = None
        provider = gaussian_interval_provider(preds, baseline)
    else:
        raise ContractError(f"unknown method {method!r}; expected one of {METHODS}")

    table = reliability_table(provider, labels, grid)
    ece_val = ece_from_table(table)

    sharp: dict[float, float] = {}
    excluded: dict[float, int] = {}
    for conf in sharpness_confidences:
        mean_width, n_excluded = sharpness(provider(1.0 - float(conf)))
        sharp[float(conf)] = mean_width
        excluded[float(conf)] = n_excluded

    flags, threshold = bottom_decile_flags(labels)
    scores = failure_scores(
        method, threshold, dists=dists, preds=preds, baseline=baseline
    )
    auc = auroc(scores, flags)

    return EvalReport(
        method_name=method,
        ece=ece_val,
        sharpness_at=sharp,
        auroc=auc,
        n_test=len(labels),
        sharpness_excluded=excluded,
    )


def evaluate_split(
    artifacts: FittedArtifacts,
    test: Sequence[LabeledExample],
    method: str,
    grid: SignificanceGrid,
    tau_policy: TauPolicy,
    sharpness_confidences: Sequence[float] = (0.9,),
) -> EvalReport:
    """Predict the test split with the fitted KNN, then score one method."""
    test = list(test)
    preds = point_predictions(artifacts.knn, test)
    return evaluate_predictions(
        preds,
        [ex.label for ex in test],
        method,
        grid,
        tau_policy,
        conformal=artifacts.conformal,
        baseline=artifacts.baseline,
        sharpness_confidences=sharpness_confidences,
    )
