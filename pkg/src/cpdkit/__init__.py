"""cpdkit: split conformal predictive distributions for scalar regressors.

Turns any point predictor with a per-example difficulty estimate into a
full predictive CDF with finite-sample validity, alongside a fixed-variance
Gaussian baseline and an evaluation harness for calibration error,
sharpness, and critical-failure detection.
"""

from .types import (
    ConformalModel,
    ContractError,
    DegenerateDataError,
    EvalReport,
    LabeledExample,
    PointPrediction,
    PredictionInterval,
    PredictiveDistribution,
)
from .knn import FittedKnn, KnnConfig, difficulty, difficulty_batch, fit, predict, predict_batch
from .conformity import calibration_scores, conformity_score, fit_conformal
from .cpd import TauPolicy, cdf_value, counting_cdf, draw_tau, interval, p_below, quantile
from .baseline import (
    GaussianBaseline,
    fit_sigma_fixed,
    gaussian_cdf,
    gaussian_interval,
    probit,
)
from .metrics import (
    SignificanceGrid,
    auroc,
    bottom_decile_flags,
    ece,
    ece_from_table,
    grid_from_step,
    reliability_table,
    sharpness,
)
from .data import (
    HeteroscedasticNoise,
    HomoscedasticNoise,
    SplitSpec,
    SynthSpec,
    load_examples,
    load_model,
    load_predictions,
    load_report,
    passthrough_split,
    save_examples,
    save_model,
    save_predictions,
    save_report,
    shuffle_split,
    synth_generate,
    znormalize,
)
from .pipeline import (
    FittedArtifacts,
    cpd_interval_provider,
    evaluate_predictions,
    evaluate_split,
    failure_scores,
    fit_artifacts,
    gaussian_interval_provider,
    point_predictions,
    predictive_distributions,
)

__version__ = "0.1.0"

__all__ = [
    "ConformalModel",
    "ContractError",
    "DegenerateDataError",
    "EvalReport",
    "LabeledExample",
    "PointPrediction",
    "PredictionInterval",
    "PredictiveDistribution",
    "FittedKnn",
    "KnnConfig",
    "fit",
    "predict",
    "predict_batch",
    "difficulty",
    "difficulty_batch",
    "conformity_score",
    "fit_conformal",
    "calibration_scores",
    "TauPolicy",
    "cdf_value",
    "counting_cdf",
    "quantile",
    "interval",
    "p_below",
    "draw_tau",
    "GaussianBaseline",
    "fit_sigma_fixed",
    "probit",
    "gaussian_interval",
    "gaussian_cdf",
    "SignificanceGrid",
    "grid_from_step",
    "ece",
    "ece_from_table",
    "reliability_table",
    "sharpness",
    "bottom_decile_flags",
    "auroc",
    "SplitSpec",
    "SynthSpec",
    "HomoscedasticNoise",
    "HeteroscedasticNoise",
    "load_examples",
    "save_examples",
    "load_predictions",
    "save_predictions",
    "znormalize",
    "shuffle_split",
    "passthrough_split",
    "synth_generate",
    "save_model",
    "load_model",
    "save_report",
    "load_report",
    "FittedArtifacts",
    "fit_artifacts",
    "point_predictions",
    "predictive_distributions",
    "cpd_interval_provider",
    "gaussian_interval_provider",
    "failure_scores",
    "evaluate_predictions",
    "evaluate_split",
]
