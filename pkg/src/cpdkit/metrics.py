"""Evaluation metrics: calibration error, sharpness, and failure AUROC.

err(eps) is the fraction of test labels falling outside the level-eps
prediction interval (closed endpoints; infinite endpoints always cover).
ECE averages |err(eps) - eps| over a significance grid. Sharpness is the
mean width of the bounded intervals at one confidence level, with the
unbounded ones excluded and counted rather than clamped. AUROC uses the
tie-corrected Mann-Whitney statistic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .types import ContractError, DegenerateDataError, PredictionInterval

IntervalProvider = Callable[[float], Sequence[PredictionInterval]]


@dataclass(frozen=True)
class SignificanceGrid:
    """Strictly increasing significance levels in (0, 1]."""

    levels: tuple[float, ...]

    def __post_init__(self):
        levels = tuple(float(v) for v in self.levels)
        if not levels:
            raise ContractError("significance grid must be nonempty")
        for v in levels:
            if not 0.0 < v <= 1.0:
                raise ContractError(f"grid level {v!r} outside (0, 1]")
        if any(a >= b for a, b in zip(levels, levels[1:])):
            raise ContractError("grid levels must be strictly increasing")
        object.__setattr__(self, "levels", levels)


def grid_from_step(step: float = 0.02) -> SignificanceGrid:
    """The grid {step, 2*step, ..., 1.0}; step must divide 1 evenly.

    The default step 0.02 gives the 50-level grid; 0.0 is never included
    because a zero significance level forces degenerate infinite intervals.
    """
    step = float(step)
    if not 0.0 < step <= 1.0:
        raise ContractError(f"grid step must be in (0, 1], got {step!r}")
    n = round(1.0 / step)
    if n < 1 or abs(n * step - 1.0) > 1e-9:
        raise ContractError(f"grid step {step!r} does not divide 1 evenly")
    return SignificanceGrid(tuple(i / n for i in range(1, n + 1)))


def reliability_table(
    interval_provider: IntervalProvider,
    labels: Sequence[float],
    grid: SignificanceGrid,
) -> list[tuple[float, float]]:
    """Per-level miss rates [(eps, err(eps)), ...] before aggregation."""
    labels = [float(v) for v in labels]
    if not labels:
        raise ContractError("labels must be nonempty")
    table = []
    for eps in grid.levels:
        intervals = list(interval_provider(eps))
        if len(intervals) != len(labels):
            raise ContractError(
                f"provider returned {len(intervals)} intervals for "
                f"{len(labels)} labels at eps={eps}"
            )
        misses = sum(1 for y, iv in zip(labels, intervals) if not iv.covers(y))
        table.append((eps, misses / len(labels)))
    return table


def ece_from_table(table: Sequence[tuple[float, float]]) -> float:
    """Mean |err(eps) - eps| over an already-computed reliability table."""
    if not table:
        raise ContractError("reliability table must be nonempty")
    total = 0.0
    for eps, err in table:
        total += abs(err - eps)
    return total / len(table)


def ece(
    interval_provider: IntervalProvider,
    labels: Sequence[float],
    grid: SignificanceGrid,
) -> float:
    """Expected calibration error over the grid."""
    return ece_from_table(reliability_table(interval_provider, labels, grid))


def sharpness(intervals: Sequence[PredictionInterval]) -> tuple[float, int]:
    """(mean width of bounded intervals, count of excluded unbounded ones)."""
    intervals = list(intervals)
    if not intervals:
        raise ContractError("intervals must be nonempty")
    widths = [iv.width for iv in intervals if iv.bounded]
    excluded = len(intervals) - len(widths)
    if not widths:
        raise DegenerateDataError("every interval is unbounded; width undefined")
    total = 0.0
    for w in widths:
        total += w
    return total / len(widths), excluded


def bottom_decile_flags(labels: Sequence[float]) -> tuple[list[int], float]:
    """Flag labels at or below the empirical 10th percentile.

    The threshold uses linear interpolation between order statistics
    (numpy's default percentile method).
    """
    labels = [float(v) for v in labels]
    if len(labels) < 10:
        raise ContractError(f"need at least 10 labels, got {len(labels)}")
    threshold = float(np.percentile(np.asarray(labels, dtype=np.float64), 10.0))
    flags = [1 if v <= threshold else 0 for v in labels]
    if all(flags):
        warnings.warn(
            "degenerate bottom decile: every label is at or below the "
            "10th-percentile threshold",
            stacklevel=2,
        )
    return flags, threshold


def auroc(scores: Sequence[float], flags: Sequence[int]) -> float:
    """Tie-corrected Mann-Whitney AUROC of scores against binary flags.

    Equals (#{positive > negative} + 0.5 * #ties) / (n_pos * n_neg),
    computed via average ranks; all intermediate sums are exact in float64
    for any realistic n, so the result matches pairwise counting bit for bit.
    """
    s = np.asarray(scores, dtype=np.float64)
    f = np.asarray(flags)
    if s.ndim != 1 or f.shape != s.shape:
        raise ContractError(
            f"scores and flags must be equal-length 1-d sequences, got "
            f"{s.shape} and {f.shape}"
        )
    if s.size == 0:
        raise ContractError("scores must be nonempty")
    if not np.all(np.isfinite(s)):
        raise ContractError("scores must all be finite")
    if not np.all((f == 0) | (f == 1)):
        raise ContractError("flags must be 0/1")
    n_pos = int(np.count_nonzero(f == 1))
    n_neg = int(np.count_nonzero(f == 0))
    if n_pos == 0 or n_neg == 0:
        raise DegenerateDataError("AUROC needs both classes present")
    # average (tied) ranks, 1-based; exact half-integers
    _, inverse, counts = np.unique(s, return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    starts = ends - counts + 1
    avg_ranks = (starts + ends) / 2.0
    rank_sum_pos = float(np.sum(avg_ranks[inverse][f == 1]))
    numerator = rank_sum_pos - n_pos * (n_pos + 1) / 2.0
    return numerator / (n_pos * n_neg)
