"""JSON request/response surface for in-memory array clients.

One request is a JSON object {"op": ..., ...fields}; the response is
{"ok": true, "result": ...} or {"ok": false, "error": {"type", "message"}}.
Non-finite reals cross the wire as the strings "inf" / "-inf" so strict
JSON parsers on the other side never choke. A "batch" op carries a list of
sub-requests so callers can amortize process startup.

This is the boundary the language bindings talk to; arrays are copied at
the boundary by construction and every error keeps the core message.
"""

from __future__ import annotations

import json
import math
from typing import Sequence

import numpy as np

from .baseline import GaussianBaseline, fit_sigma_fixed, gaussian_cdf, gaussian_interval, probit
from .conformity import calibration_scores, fit_conformal
from .cpd import TauPolicy, cdf_value, interval
from .metrics import (
    SignificanceGrid,
    auroc,
    bottom_decile_flags,
    ece_from_table,
    reliability_table,
    sharpness,
)
from .pipeline import evaluate_predictions
from .types import (
    ConformalModel,
    ContractError,
    DegenerateDataError,
    PointPrediction,
    PredictionInterval,
    PredictiveDistribution,
)

WIRE_VERSION = 1


def _decode_real(value, name: str) -> float:
    if isinstance(value, str):
        if value in ("inf", "Infinity"):
            return math.inf
        if value in ("-inf", "-Infinity"):
            return -math.inf
        raise ContractError(f"{name}: bad real token {value!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ContractError(f"{name}: expected a number, got {type(value).__name__}")
    return float(value)


def _encode_real(value: float):
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        raise ContractError("refusing to encode NaN")
    return value


def _field(request: dict, name: str):
    if name not in request:
        raise ContractError(f"request is missing field {name!r}")
    return request[name]


def _real_array(request: dict, name: str) -> list[float]:
    raw = _field(request, name)
    if not isinstance(raw, list):
        raise ContractError(f"{name}: expected an array")
    return [_decode_real(v, f"{name}[{i}]") for i, v in enumerate(raw)]


def _same_length(**arrays) -> None:
    lengths = {name: len(arr) for name, arr in arrays.items()}
    if len(set(lengths.values())) > 1:
        detail = ", ".join(f"{name}={n}" for name, n in lengths.items())
        raise ContractError(f"array length mismatch: {detail}")


def _predictions(y_hat: Sequence[float], sigma_hat: Sequence[float]) -> list[PointPrediction]:
    return [
        PointPrediction(str(i), y, s) for i, (y, s) in enumerate(zip(y_hat, sigma_hat))
    ]


def _decode_model(request: dict) -> ConformalModel:
    raw = _field(request, "model")
    if not isinstance(raw, dict):
        raise ContractError("model: expected an object")
    residuals = [
        _decode_real(v, f"model.residuals[{i}]")
        for i, v in enumerate(raw.get("residuals", []))
    ]
    return ConformalModel(
        residuals=np.asarray(residuals, dtype=np.float64),
        n_calib=raw.get("n_calib", len(residuals)),
        feature_dim=raw.get("feature_dim", 1),
    )


def _encode_model(model: ConformalModel) -> dict:
    return {
        "format_version": WIRE_VERSION,
        "residuals": [_encode_real(v) for v in model.residuals.tolist()],
        "n_calib": model.n_calib,
        "feature_dim": model.feature_dim,
    }


def _encode_interval(iv: PredictionInterval) -> dict:
    return {
        "lower": _encode_real(iv.lower),
        "upper": _encode_real(iv.upper),
        "confidence": iv.confidence,
    }


def _decode_intervals(raw, confidence: float, name: str) -> list[PredictionInterval]:
    if not isinstance(raw, list):
        raise ContractError(f"{name}: expected an array of [lower, upper] pairs")
    out = []
    for i, pair in enumerate(raw):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ContractError(f"{name}[{i}]: expected a [lower, upper] pair")
        out.append(
            PredictionInterval(
                lower=_decode_real(pair[0], f"{name}[{i}].lower"),
                upper=_decode_real(pair[1], f"{name}[{i}].upper"),
                confidence=confidence,
            )
        )
    return out


def _decode_tau_policy(raw) -> TauPolicy:
    if not isinstance(raw, dict):
        raise ContractError("tau: expected an object with a 'mode' field")
    mode = raw.get("mode")
    if mode == "fixed":
        return TauPolicy.fixed(_decode_real(raw.get("value"), "tau.value"))
    if mode == "seeded_random":
        return TauPolicy.seeded(int(raw.get("seed")))
    raise ContractError(f"tau: unknown mode {mode!r}")


def _test_distribution(request: dict) -> PredictiveDistribution:
    model = _decode_model(request)
    pred = PointPrediction(
        "query",
        _decode_real(_field(request, "y_hat"), "y_hat"),
        _decode_real(_field(request, "sigma_hat"), "sigma_hat"),
    )
    tau = _decode_real(request.get("tau", 0.5), "tau")
    return PredictiveDistribution(
        thresholds=calibration_scores(model, pred), tau=tau
    )


# ---------------------------------------------------------------------------
# operations


def _op_fit(request: dict) -> dict:
    y = _real_array(request, "y")
    y_hat = _real_array(request, "y_hat")
    sigma_hat = _real_array(request, "sigma_hat")
    _same_length(y=y, y_hat=y_hat, sigma_hat=sigma_hat)
    model = fit_conformal(_predictions(y_hat, sigma_hat), y)
    return {"model": _encode_model(model)}


def _op_calibration_scores(request: dict) -> dict:
    model = _decode_model(request)
    pred = PointPrediction(
        "query",
        _decode_real(_field(request, "y_hat"), "y_hat"),
        _decode_real(_field(request, "sigma_hat"), "sigma_hat"),
    )
    return {"scores": [_encode_real(v) for v in calibration_scores(model, pred).tolist()]}


def _op_cdf(request: dict) -> dict:
    dist = _test_distribution(request)
    return {"value": cdf_value(dist, _decode_real(_field(request, "y"), "y"))}


def _op_cdf_batch(request: dict) -> dict:
    model = _decode_model(request)
    queries = _field(request, "queries")
    if not isinstance(queries, list):
        raise ContractError("queries: expected an array")
    values = []
    for i, q in enumerate(queries):
        if not isinstance(q, dict):
            raise ContractError(f"queries[{i}]: expected an object")
        pred = PointPrediction(
            "query",
            _decode_real(q.get("y_hat", 0.0), f"queries[{i}].y_hat"),
            _decode_real(q.get("sigma_hat", 1.0), f"queries[{i}].sigma_hat"),
        )
        dist = PredictiveDistribution(
            thresholds=calibration_scores(model, pred),
            tau=_decode_real(q.get("tau", 0.5), f"queries[{i}].tau"),
        )
        values.append(cdf_value(dist, _decode_real(_field(q, "y"), f"queries[{i}].y")))
    return {"values": values}


def _op_interval(request: dict) -> dict:
    dist = _test_distribution(request)
    eps = _decode_real(_field(request, "epsilon"), "epsilon")
    return {"interval": _encode_interval(interval(dist, eps))}


def _op_gaussian_fit(request: dict) -> dict:
    labels = _real_array(request, "labels")
    preds = _real_array(request, "preds")
    _same_length(labels=labels, preds=preds)
    return {"sigma_fixed": fit_sigma_fixed(labels, preds).sigma_fixed}


def _op_gaussian_interval(request: dict) -> dict:
    baseline = GaussianBaseline(_decode_real(_field(request, "sigma_fixed"), "sigma_fixed"))
    iv = gaussian_interval(
        _decode_real(_field(request, "mu"), "mu"),
        baseline,
        _decode_real(_field(request, "confidence"), "confidence"),
    )
    return {"interval": _encode_interval(iv)}


def _op_gaussian_cdf(request: dict) -> dict:
    baseline = GaussianBaseline(_decode_real(_field(request, "sigma_fixed"), "sigma_fixed"))
    return {
        "value": gaussian_cdf(
            _decode_real(_field(request, "mu"), "mu"),
            baseline,
            _decode_real(_field(request, "y"), "y"),
        )
    }


def _op_probit(request: dict) -> dict:
    return {"value": probit(_decode_real(_field(request, "p"), "p"))}


def _op_ece(request: dict) -> dict:
    labels = _real_array(request, "labels")
    levels = _real_array(request, "levels")
    raw_intervals = _field(request, "intervals")
    if not isinstance(raw_intervals, list) or len(raw_intervals) != len(levels):
        raise ContractError(
            f"intervals: expected one interval list per level "
            f"({len(levels)} levels)"
        )
    grid = SignificanceGrid(tuple(levels))
    by_level = {
        eps: _decode_intervals(raw, max(0.0, 1.0 - eps), f"intervals[{i}]")
        for i, (eps, raw) in enumerate(zip(levels, raw_intervals))
    }
    table = reliability_table(lambda eps: by_level[eps], labels, grid)
    return {
        "ece": ece_from_table(table),
        "table": [[eps, err] for eps, err in table],
    }


def _op_sharpness(request: dict) -> dict:
    confidence = _decode_real(request.get("confidence", 0.5), "confidence")
    intervals = _decode_intervals(_field(request, "intervals"), confidence, "intervals")
    mean_width, excluded = sharpness(intervals)
    return {"mean_width": mean_width, "excluded_unbounded": excluded}


def _op_auroc(request: dict) -> dict:
    scores = _real_array(request, "scores")
    flags = _field(request, "flags")
    if not isinstance(flags, list):
        raise ContractError("flags: expected an array")
    _same_length(scores=scores, flags=flags)
    return {"value": auroc(scores, flags)}


def _op_decile_flags(request: dict) -> dict:
    labels = _real_array(request, "labels")
    flags, threshold = bottom_decile_flags(labels)
    return {"flags": flags, "threshold": threshold}


def _op_evaluate(request: dict) -> dict:
    labels = _real_array(request, "labels")
    y_hat = _real_array(request, "y_hat")
    sigma_hat = _real_array(request, "sigma_hat")
    _same_length(labels=labels, y_hat=y_hat, sigma_hat=sigma_hat)
    method = _field(request, "method")
    conformal = _decode_model(request) if "model" in request else None
    baseline = None
    if "sigma_fixed" in request:
        baseline = GaussianBaseline(_decode_real(request["sigma_fixed"], "sigma_fixed"))
    grid_levels = _real_array(request, "levels") if "levels" in request else None
    if grid_levels is None:
        from .metrics import grid_from_step

        grid = grid_from_step(_decode_real(request.get("grid_step", 0.02), "grid_step"))
    else:
        grid = SignificanceGrid(tuple(grid_levels))
    policy = _decode_tau_policy(request.get("tau", {"mode": "fixed", "value": 0.5}))
    confidences = _real_array(request, "sharpness_confidences") if (
        "sharpness_confidences" in request
    ) else [0.9]
    report = evaluate_predictions(
        _predictions(y_hat, sigma_hat),
        labels,
        method,
        grid,
        policy,
        conformal=conformal,
        baseline=baseline,
        sharpness_confidences=confidences,
    )
    return {
        "report": {
            "method_name": report.method_name,
            "ece": report.ece,
            "sharpness_at": {repr(k): v for k, v in report.sharpness_at.items()},
            "sharpness_excluded": {
                repr(k): v for k, v in report.sharpness_excluded.items()
            },
            "auroc": report.auroc,
            "n_test": report.n_test,
        }
    }


_OPS = {
    "fit": _op_fit,
    "calibration_scores": _op_calibration_scores,
    "cdf": _op_cdf,
    "cdf_batch": _op_cdf_batch,
    "interval": _op_interval,
    "gaussian_fit": _op_gaussian_fit,
    "gaussian_interval": _op_gaussian_interval,
    "gaussian_cdf": _op_gaussian_cdf,
    "probit": _op_probit,
    "ece": _op_ece,
    "sharpness": _op_sharpness,
    "auroc": _op_auroc,
    "decile_flags": _op_decile_flags,
    "evaluate": _op_evaluate,
}


def handle_request(request: dict) -> dict:
    """Dispatch one decoded request; never raises, always returns a response."""
    try:
        if not isinstance(request, dict):
            raise ContractError("request must be a JSON object")
        op = request.get("op")
        if op == "batch":
            subs = request.get("requests")
            if not isinstance(subs, list):
                raise ContractError("batch request needs a 'requests' array")
            return {"ok": True, "result": {"responses": [handle_request(r) for r in subs]}}
        handler = _OPS.get(op)
        if handler is None:
            raise ContractError(f"unknown op {op!r}; expected one of {sorted(_OPS)}")
        return {"ok": True, "result": handler(request)}
    except DegenerateDataError as exc:
        return {"ok": False, "error": {"type": "degenerate", "message": str(exc)}}
    except ContractError as exc:
        return {"ok": False, "error": {"type": "contract", "message": str(exc)}}


def handle_raw(raw: str) -> str:
    """Parse one JSON request string and return the serialized response."""
    try:
        request = json.loads(raw)
    except json.JSONDecodeError as exc:
        response = {
            "ok": False,
            "error": {"type": "contract", "message": f"bad request JSON: {exc}"},
        }
        return json.dumps(response, sort_keys=True)
    return json.dumps(handle_request(request), sort_keys=True, allow_nan=False)
