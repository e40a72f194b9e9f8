"""Exhaustive k-nearest-neighbor regression and distance-based difficulty.

The regressor predicts the mean label of the k_regress nearest training
points; the difficulty estimate is a small positive floor plus the summed
euclidean distances to the k_difficulty nearest training points. Neighbor
order is (distance, id), never input order, so both operations are exactly
invariant under permutations of the training sequence. Search is an
exhaustive scan: the datasets this is meant for are small enough that
determinism is worth more than a spatial index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .types import ContractError, LabeledExample

# cap on len(queries) * n_train * dim per distance block, keeps peak memory flat
_BLOCK_BUDGET = 16_000_000


@dataclass(frozen=True)
class KnnConfig:
    """Neighbor counts for regression and difficulty estimation.

    difficulty_floor keeps every difficulty estimate strictly positive even
    when all nearest distances are zero, so normalized residuals never
    divide by zero.
    """

    k_regress: int = 10
    k_difficulty: int = 25
    distance: str = "euclidean"
    difficulty_floor: float = 1e-6

    def __post_init__(self):
        if int(self.k_regress) < 1:
            raise ContractError(f"k_regress must be >= 1, got {self.k_regress}")
        if int(self.k_difficulty) < 1:
            raise ContractError(f"k_difficulty must be >= 1, got {self.k_difficulty}")
        object.__setattr__(self, "k_regress", int(self.k_regress))
        object.__setattr__(self, "k_difficulty", int(self.k_difficulty))
        if self.distance != "euclidean":
            raise ContractError(f"unsupported distance {self.distance!r}")
        floor = float(self.difficulty_floor)
        if not (math.isfinite(floor) and floor > 0.0):
            raise ContractError(
                f"difficulty_floor must be finite and > 0, got {self.difficulty_floor!r}"
            )
        object.__setattr__(self, "difficulty_floor", floor)


@dataclass(frozen=True, eq=False)
class FittedKnn:
    """Immutable fitted model: training points sorted by ascending id."""

    ids: tuple[str, ...]
    features: np.ndarray  # shape (n, d), row order matches ids
    labels: np.ndarray  # shape (n,)
    config: KnnConfig

    @property
    def n_train(self) -> int:
        return int(self.labels.size)

    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[1])


def fit(train: Iterable[LabeledExample], config: KnnConfig) -> FittedKnn:
    """Fit the exhaustive KNN model on a sequence of labeled examples."""
    examples = list(train)
    if not examples:
        raise ContractError("training set is empty")
    dim = len(examples[0].features)
    for ex in examples:
        if len(ex.features) != dim:
            raise ContractError(
                f"feature dimension mismatch: example {ex.id!r} has "
                f"{len(ex.features)} features, expected {dim}"
            )
    seen = set()
    for ex in examples:
        if ex.id in seen:
            raise ContractError(
                f"duplicate training id {ex.id!r}; ids must be unique for "
                "deterministic neighbor tie-breaking"
            )
        seen.add(ex.id)
    n = len(examples)
    if config.k_regress > n:
        raise ContractError(f"k_regress={config.k_regress} exceeds training size {n}")
    if config.k_difficulty > n:
        raise ContractError(
            f"k_difficulty={config.k_difficulty} exceeds training size {n}"
        )
    # sorting by id makes a stable distance sort equal to (distance, id) order
    examples.sort(key=lambda ex: ex.id)
    feats = np.array([ex.features for ex in examples], dtype=np.float64)
    labels = np.array([ex.label for ex in examples], dtype=np.float64)
    feats.setflags(write=False)
    labels.setflags(write=False)
    return FittedKnn(tuple(ex.id for ex in examples), feats, labels, config)


def _as_query_matrix(model: FittedKnn, x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != model.feature_dim:
        raise ContractError(
            f"query dimension mismatch: expected {model.feature_dim}, "
            f"got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ContractError("query features must be finite")
    return arr


def _neighbor_order_blocks(model: FittedKnn, queries: np.ndarray):
    """Yield (block slice, squared distances, stable argsort) per block."""
    n, d = model.features.shape
    rows = max(1, _BLOCK_BUDGET // max(1, n * d))
    for start in range(0, len(queries), rows):
        block = queries[start : start + rows]
        sq = ((block[:, None, :] - model.features[None, :, :]) ** 2).sum(axis=2)
        order = np.argsort(sq, axis=1, kind="stable")
        yield start, sq, order


def predict_batch(model: FittedKnn, queries) -> np.ndarray:
    """Mean label of the k_regress nearest training points, per query row."""
    q = _as_query_matrix(model, queries)
    k = model.config.k_regress
    out = np.empty(len(q), dtype=np.float64)
    for start, _sq, order in _neighbor_order_blocks(model, q):
        for i in range(order.shape[0]):
            # sequential sum in (distance, id) order; mirrors the brute-force oracle
            picked = model.labels[order[i, :k]].tolist()
            total = 0.0
            for v in picked:
                total += v
            out[start + i] = total / k
    return out


def predict(model: FittedKnn, x) -> float:
    """Predict the label for a single feature vector."""
    return float(predict_batch(model, np.asarray(x, dtype=np.float64)[None, :])[0])


def difficulty_batch(model: FittedKnn, queries) -> np.ndarray:
    """Floor plus the summed distances to the k_difficulty nearest points."""
    q = _as_query_matrix(model, queries)
    k = model.config.k_difficulty
    floor = model.config.difficulty_floor
    out = np.empty(len(q), dtype=np.float64)
    for start, sq, order in _neighbor_order_blocks(model, q):
        for i in range(order.shape[0]):
            nearest = np.sqrt(sq[i, order[i, :k]]).tolist()
            total = floor
            for v in nearest:  # ascending-distance accumulation, matches the oracle
                total += v
            out[start + i] = total
    return out


def difficulty(model: FittedKnn, x) -> float:
    """Difficulty estimate for a single feature vector; always > 0."""
    return float(difficulty_batch(model, np.asarray(x, dtype=np.float64)[None, :])[0])


def point_predict(model: FittedKnn, examples: Sequence[LabeledExample]):
    """Convenience: (predictions, difficulties) arrays for labeled examples."""
    feats = np.array([ex.features for ex in examples], dtype=np.float64)
    if feats.size == 0:
        raise ContractError("no examples to predict")
    return predict_batch(model, feats), difficulty_batch(model, feats)
