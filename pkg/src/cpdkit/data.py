"""Dataset ingestion, normalization, splitting, synthetic data, and files.

File schemas (headers mandatory, floats written with round-trip-exact repr):

  labeled data   csv  id,f1,...,fd,label        jsonl {"id","features","label"}
  predictions    csv  id,y_hat,sigma_hat        jsonl {"id","y_hat","sigma_hat"}
  model/report   json with a top-level "format_version" field

z-normalization and the synthetic generator use population (divide-by-n)
standard deviation throughout.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .types import (
    ConformalModel,
    ContractError,
    DegenerateDataError,
    EvalReport,
    LabeledExample,
    PointPrediction,
)
from .knn import FittedKnn, KnnConfig
from .baseline import GaussianBaseline

FORMAT_VERSION = 1
_SEED_MASK = (1 << 64) - 1

FORMATS = ("csv", "jsonl")


@dataclass(frozen=True)
class SplitSpec:
    """Seeded shuffle followed by fractional cuts into train/calib/test."""

    seed: int
    fractions: tuple[float, float, float] = (0.7, 0.15, 0.15)

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed))
        fr = tuple(float(v) for v in self.fractions)
        if len(fr) != 3:
            raise ContractError("fractions must have exactly three entries")
        if any(v <= 0.0 for v in fr):
            raise ContractError(f"all split fractions must be > 0, got {fr}")
        if abs(sum(fr) - 1.0) > 1e-9:
            raise ContractError(f"split fractions must sum to 1, got {sum(fr)!r}")
        object.__setattr__(self, "fractions", fr)


@dataclass(frozen=True)
class HomoscedasticNoise:
    """Constant-sigma additive Gaussian noise; sigma 0 is the noiseless limit."""

    sigma: float

    def __post_init__(self):
        sigma = float(self.sigma)
        if not (math.isfinite(sigma) and sigma >= 0.0):
            raise ContractError(f"noise sigma must be finite and >= 0, got {sigma!r}")
        object.__setattr__(self, "sigma", sigma)


@dataclass(frozen=True)
class HeteroscedasticNoise:
    """Noise sd sigma0 * (1 + slope * |x1|): difficulty grows along x1."""

    sigma0: float
    slope: float

    def __post_init__(self):
        sigma0 = float(self.sigma0)
        if not (math.isfinite(sigma0) and sigma0 > 0.0):
            raise ContractError(f"sigma0 must be finite and > 0, got {sigma0!r}")
        slope = float(self.slope)
        if not (math.isfinite(slope) and slope >= 0.0):
            raise ContractError(f"slope must be finite and >= 0, got {slope!r}")
        object.__setattr__(self, "sigma0", sigma0)
        object.__setattr__(self, "slope", slope)


@dataclass(frozen=True)
class SynthSpec:
    """Synthetic regression data on [-1, 1]^d with optional regime shift.

    The mean surface is sin(pi * x1) + x2 (the x2 term only when d >= 2).
    With shift > 0, the last ceil(shift * n) rows have x1 drawn from
    [0.5, 1] and labels offset by +1: a contiguous distribution shift that
    only an unshuffled split ever sees.
    """

    n: int
    feature_dim: int = 2
    noise: HomoscedasticNoise | HeteroscedasticNoise = field(
        default_factory=lambda: HomoscedasticNoise(0.1)
    )
    shift: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if int(self.n) < 1:
            raise ContractError(f"n must be >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if int(self.feature_dim) < 1:
            raise ContractError(f"feature_dim must be >= 1, got {self.feature_dim}")
        object.__setattr__(self, "feature_dim", int(self.feature_dim))
        shift = float(self.shift)
        if not 0.0 <= shift < 1.0:
            raise ContractError(f"shift fraction must be in [0, 1), got {shift!r}")
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "seed", int(self.seed))


# ---------------------------------------------------------------------------
# labeled examples and prediction batches


def _check_format(format: str) -> str:
    if format not in FORMATS:
        raise ContractError(f"unknown format {format!r}; expected one of {FORMATS}")
    return format


def _invalid(path, line_no, message) -> ContractError:
    return ContractError(f"{path}:{line_no}: {message}")


def load_examples(path, format: str = "csv") -> list[LabeledExample]:
    """Load labeled examples; row order preserved, every row validated."""
    _check_format(format)
    examples: list[LabeledExample] = []
    seen: set[str] = set()
    with open(path, "r", newline="") as fh:
        if format == "csv":
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise ContractError(f"{path}: empty file")
            expected = ["id"] + [f"f{j}" for j in range(1, len(header) - 1)] + ["label"]
            if len(header) < 3 or header != expected:
                raise _invalid(path, 1, f"bad header {header!r}; expected {expected!r}")
            dim = len(header) - 2
            for line_no, row in enumerate(reader, start=2):
                if len(row) != len(header):
                    raise _invalid(
                        path, line_no, f"expected {len(header)} fields, got {len(row)}"
                    )
                try:
                    feats = tuple(float(v) for v in row[1:-1])
                    label = float(row[-1])
                except ValueError as exc:
                    raise _invalid(path, line_no, f"parse error: {exc}") from exc
                _append_example(examples, seen, row[0], feats, label, path, line_no, dim)
        else:
            dim = None
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    feats = tuple(float(v) for v in obj["features"])
                    ident = obj["id"]
                    label = float(obj["label"])
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise _invalid(path, line_no, f"parse error: {exc}") from exc
                if dim is None:
                    dim = len(feats)
                _append_example(examples, seen, ident, feats, label, path, line_no, dim)
    if not examples:
        raise ContractError(f"{path}: no examples found")
    return examples


def _append_example(examples, seen, ident, feats, label, path, line_no, dim):
    if len(feats) != dim:
        raise _invalid(
            path, line_no, f"example {ident!r}: expected {dim} features, got {len(feats)}"
        )
    try:
        example = LabeledExample(id=ident, features=feats, label=label)
    except ContractError as exc:
        raise _invalid(path, line_no, str(exc)) from exc
    if example.id in seen:
        raise _invalid(path, line_no, f"duplicate id {example.id!r}")
    seen.add(example.id)
    examples.append(example)


def save_examples(examples: Sequence[LabeledExample], path, format: str = "csv") -> None:
    _check_format(format)
    examples = list(examples)
    if not examples:
        raise ContractError("refusing to write an empty dataset")
    dim = len(examples[0].features)
    with open(path, "w", newline="") as fh:
        if format == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["id"] + [f"f{j}" for j in range(1, dim + 1)] + ["label"])
            for ex in examples:
                writer.writerow([ex.id] + [repr(v) for v in ex.features] + [repr(ex.label)])
        else:
            for ex in examples:
                fh.write(
                    json.dumps(
                        {"id": ex.id, "features": list(ex.features), "label": ex.label}
                    )
                    + "\n"
                )


def load_predictions(path, format: str = "csv") -> list[PointPrediction]:
    """Load a prediction batch (id, y_hat, sigma_hat per row)."""
    _check_format(format)
    preds: list[PointPrediction] = []
    with open(path, "r", newline="") as fh:
        if format == "csv":
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["id", "y_hat", "sigma_hat"]:
                raise ContractError(
                    f"{path}: bad header {header!r}; expected ['id', 'y_hat', 'sigma_hat']"
                )
            for line_no, row in enumerate(reader, start=2):
                if len(row) != 3:
                    raise _invalid(path, line_no, f"expected 3 fields, got {len(row)}")
                try:
                    y_hat, sigma_hat = float(row[1]), float(row[2])
                except ValueError as exc:
                    raise _invalid(path, line_no, f"parse error: {exc}") from exc
                try:
                    preds.append(PointPrediction(row[0], y_hat, sigma_hat))
                except ContractError as exc:
                    raise _invalid(path, line_no, str(exc)) from exc
        else:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    pred = PointPrediction(
                        obj["id"], float(obj["y_hat"]), float(obj["sigma_hat"])
                    )
                except ContractError as exc:
                    raise _invalid(path, line_no, str(exc)) from exc
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise _invalid(path, line_no, f"parse error: {exc}") from exc
                preds.append(pred)
    if not preds:
        raise ContractError(f"{path}: no predictions found")
    return preds


def save_predictions(preds: Sequence[PointPrediction], path, format: str = "csv") -> None:
    _check_format(format)
    preds = list(preds)
    if not preds:
        raise ContractError("refusing to write an empty prediction batch")
    with open(path, "w", newline="") as fh:
        if format == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["id", "y_hat", "sigma_hat"])
            for p in preds:
                writer.writerow([p.id, repr(p.y_hat), repr(p.sigma_hat)])
        else:
            for p in preds:
                fh.write(
                    json.dumps({"id": p.id, "y_hat": p.y_hat, "sigma_hat": p.sigma_hat})
                    + "\n"
                )


# ---------------------------------------------------------------------------
# normalization and splitting


def znormalize(raw_scores) -> tuple[np.ndarray, float, float]:
    """Map raw scores to zero-mean unit-sd labels; returns (labels, mu, sigma).

    sigma is the population standard deviation; the inverse map is
    raw = labels * sigma + mu.
    """
    scores = np.asarray(raw_scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size < 2:
        raise ContractError("znormalize needs at least 2 scores")
    if not np.all(np.isfinite(scores)):
        raise ContractError("raw scores must all be finite")
    mu = float(np.mean(scores))
    sigma = float(np.std(scores))
    if sigma == 0.0:
        raise DegenerateDataError("raw scores are constant; cannot z-normalize")
    return (scores - mu) / sigma, mu, sigma


def shuffle_split(
    examples: Sequence[LabeledExample], spec: SplitSpec
) -> tuple[list[LabeledExample], list[LabeledExample], list[LabeledExample]]:
    """Seeded permutation, then contiguous cuts at the fraction boundaries."""
    examples = list(examples)
    n = len(examples)
    n_train = math.floor(spec.fractions[0] * n)
    n_calib = math.floor(spec.fractions[1] * n)
    n_test = n - n_train - n_calib
    if min(n_train, n_calib, n_test) < 1:
        raise ContractError(
            f"dataset of {n} examples leaves an empty split at fractions "
            f"{spec.fractions} (sizes {n_train}/{n_calib}/{n_test})"
        )
    perm = np.random.default_rng(spec.seed & _SEED_MASK).permutation(n)
    shuffled = [examples[i] for i in perm]
    return (
        shuffled[:n_train],
        shuffled[n_train : n_train + n_calib],
        shuffled[n_train + n_calib :],
    )


def passthrough_split(
    examples: Sequence[LabeledExample], boundaries: tuple[int, int]
) -> tuple[list[LabeledExample], list[LabeledExample], list[LabeledExample]]:
    """Contiguous slices in file order: [0:m], [m:k], [k:n]."""
    examples = list(examples)
    n = len(examples)
    m, k = int(boundaries[0]), int(boundaries[1])
    if not 0 <= m <= k <= n:
        raise ContractError(f"boundaries ({m}, {k}) out of range for {n} examples")
    if m == 0 or k == m or k == n:
        raise ContractError(
            f"boundaries ({m}, {k}) leave an empty split for {n} examples"
        )
    return examples[:m], examples[m:k], examples[k:]


# ---------------------------------------------------------------------------
# synthetic data


def synth_generate(spec: SynthSpec) -> list[LabeledExample]:
    """Generate the synthetic dataset described by spec, deterministically."""
    rng = np.random.default_rng(spec.seed & _SEED_MASK)
    n, d = spec.n, spec.feature_dim
    x = rng.uniform(-1.0, 1.0, size=(n, d))
    n_shift = math.ceil(spec.shift * n)
    if n_shift:
        x[n - n_shift :, 0] = rng.uniform(0.5, 1.0, size=n_shift)
    mean = np.sin(np.pi * x[:, 0])
    if d >= 2:
        mean = mean + x[:, 1]
    if isinstance(spec.noise, HomoscedasticNoise):
        sd = np.full(n, spec.noise.sigma)
    else:
        sd = spec.noise.sigma0 * (1.0 + spec.noise.slope * np.abs(x[:, 0]))
    labels = mean + sd * rng.standard_normal(n)
    if n_shift:
        labels[n - n_shift :] += 1.0
    width = max(1, len(str(n - 1)))
    return [
        LabeledExample(id=f"s{i:0{width}d}", features=tuple(x[i]), label=float(labels[i]))
        for i in range(n)
    ]


# ---------------------------------------------------------------------------
# model and report files


def _write_json(payload: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_json(path, expected_kind: str) -> dict:
    with open(path, "r") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ContractError(f"{path}: corrupt payload: {exc}") from exc
    if not isinstance(payload, dict):
        raise ContractError(f"{path}: corrupt payload: expected a JSON object")
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ContractError(
            f"{path}: unsupported format_version {version!r}; this build reads "
            f"version {FORMAT_VERSION}"
        )
    kind = payload.get("kind")
    if kind != expected_kind:
        raise ContractError(f"{path}: expected kind {expected_kind!r}, got {kind!r}")
    return payload


def save_model(
    path,
    conformal: ConformalModel,
    knn: FittedKnn | None = None,
    baseline: GaussianBaseline | None = None,
) -> None:
    """Write the fitted artifact bundle as versioned JSON."""
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": "cpd-model",
        "conformal": {
            "residuals": conformal.residuals.tolist(),
            "n_calib": conformal.n_calib,
            "feature_dim": conformal.feature_dim,
            "provenance": dict(conformal.provenance),
        },
    }
    if knn is not None:
        payload["knn"] = {
            "ids": list(knn.ids),
            "features": knn.features.tolist(),
            "labels": knn.labels.tolist(),
            "k_regress": knn.config.k_regress,
            "k_difficulty": knn.config.k_difficulty,
            "distance": knn.config.distance,
            "difficulty_floor": knn.config.difficulty_floor,
        }
    if baseline is not None:
        payload["sigma_fixed"] = baseline.sigma_fixed
    _write_json(payload, path)


def load_model(path) -> tuple[ConformalModel, FittedKnn | None, GaussianBaseline | None]:
    payload = _read_json(path, "cpd-model")
    try:
        conf = payload["conformal"]
        conformal = ConformalModel(
            residuals=np.asarray(conf["residuals"], dtype=np.float64),
            n_calib=conf["n_calib"],
            feature_dim=conf["feature_dim"],
            provenance=conf.get("provenance", {}),
        )
        knn = None
        if "knn" in payload:
            raw = payload["knn"]
            config = KnnConfig(
                k_regress=raw["k_regress"],
                k_difficulty=raw["k_difficulty"],
                distance=raw.get("distance", "euclidean"),
                difficulty_floor=raw["difficulty_floor"],
            )
            feats = np.asarray(raw["features"], dtype=np.float64)
            labels = np.asarray(raw["labels"], dtype=np.float64)
            feats.setflags(write=False)
            labels.setflags(write=False)
            knn = FittedKnn(tuple(raw["ids"]), feats, labels, config)
        baseline = None
        if "sigma_fixed" in payload:
            baseline = GaussianBaseline(sigma_fixed=payload["sigma_fixed"])
    except (KeyError, TypeError) as exc:
        raise ContractError(f"{path}: corrupt payload: missing field {exc}") from exc
    return conformal, knn, baseline


def save_report(path, report: EvalReport, provenance: dict | None = None) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": "eval-report",
        "method_name": report.method_name,
        "ece": report.ece,
        "sharpness_at": {repr(k): v for k, v in report.sharpness_at.items()},
        "sharpness_excluded": {
            repr(k): v for k, v in report.sharpness_excluded.items()
        },
        "auroc": report.auroc,
        "n_test": report.n_test,
        "provenance": provenance or {},
    }
    _write_json(payload, path)


def load_report(path) -> tuple[EvalReport, dict]:
    payload = _read_json(path, "eval-report")
    try:
        report = EvalReport(
            method_name=payload["method_name"],
            ece=payload["ece"],
            sharpness_at={float(k): v for k, v in payload["sharpness_at"].items()},
            auroc=payload["auroc"],
            n_test=payload["n_test"],
            sharpness_excluded={
                float(k): v for k, v in payload.get("sharpness_excluded", {}).items()
            },
        )
    except (KeyError, TypeError) as exc:
        raise ContractError(f"{path}: corrupt payload: missing field {exc}") from exc
    return report, payload.get("provenance", {})
