"""Calibration of the logistic growth rate ``k`` against human separability scores.

The search is a log-spaced grid followed by golden-section refinement on
``log k`` around the best grid point. Scores for every candidate ``k`` come from
cores computed once per dataset (see :func:`clmeval.adjusted.prepare`).
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adjusted import MeasureConfig, prepare
from .errors import CalibrationFailed, CLMError, DegenerateTargets, SchemaError

log = logging.getLogger(__name__)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def bin_weights(scores, b):
    """Inverse bin-frequency weight of every score.

    Bin ``i`` (1-based) covers ``((i - 1) / b, i / b]``; a score of exactly 0
    goes to bin 1.
    """
    if b < 1:
        raise ValueError("need at least one bin")
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise ValueError("no scores")
    if np.any((scores < 0) | (scores > 1)):
        raise ValueError("scores must lie in [0, 1]")
    idx = np.clip(np.ceil(scores * b).astype(int), 1, b)
    counts = np.bincount(idx, minlength=b + 1)
    return (1.0 / counts[idx]).tolist()


def weighted_r2(predicted, target, weights):
    """Weighted coefficient of determination."""
    p = np.asarray(predicted, dtype=float)
    t = np.asarray(target, dtype=float)
    w = np.asarray(weights, dtype=float)
    if not (len(p) == len(t) == len(w)):
        raise ValueError("predicted, target and weights must have equal length")
    if len(t) < 2:
        raise DegenerateTargets("need at least two targets")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    mean = np.sum(w * t) / np.sum(w)
    total = float(np.sum(w * (t - mean) ** 2))
    if total <= 0.0:
        raise DegenerateTargets("weighted target variance is zero")
    return 1.0 - float(np.sum(w * (t - p) ** 2)) / total


@dataclass
class CalibrationEntry:
    X: np.ndarray
    labels: np.ndarray
    human_score: float
    name: str = ""


@dataclass
class CalibrationSet:
    entries: list
    bins: int = 10
    weights: list = field(default=None)

    def __post_init__(self):
        if not self.entries:
            raise ValueError("calibration set is empty")
        scores = [e.human_score for e in self.entries]
        if any(not 0.0 <= s <= 1.0 for s in scores):
            raise ValueError("human scores must lie in [0, 1]")
        if self.weights is None:
            self.weights = bin_weights(scores, self.bins)
        if len(self.weights) != len(self.entries):
            raise ValueError("one weight per entry required")


@dataclass(frozen=True)
class SearchSpace:
    k_min: float = 1e-3
    k_max: float = 1e3
    grid_points: int = 61
    refine_iters: int = 40

    def __post_init__(self):
        if not 0 < self.k_min < self.k_max:
            raise ValueError("need 0 < k_min < k_max")
        if self.grid_points < 2:
            raise ValueError("need at least two grid points")


@dataclass
class CalibrationResult:
    k_star: float
    objective: float
    search_trace: list
    failed: list = field(default_factory=list)

    def to_dict(self, measure, bins):
        return {"measure": measure, "k": self.k_star, "objective": self.objective, "bins": bins}


def calibrate_k(measure_kind, calibration_set, search=None, config=None):
    """Pick the ``k`` whose adjusted scores best fit the human scores (weighted R^2).

    Entries whose measure evaluation fails are dropped (reported in
    ``CalibrationResult.failed``). Ties go to the smaller ``k``.
    """
    search = search or SearchSpace()
    config = config or MeasureConfig()
    prepared, targets, weights, failed = [], [], [], []
    for pos, entry in enumerate(calibration_set.entries):
        try:
            prepared.append(prepare(measure_kind, entry.X, entry.labels, config))
        except CLMError as err:
            log.warning("calibration entry %s skipped: %s", entry.name or pos, err)
            failed.append(entry.name or pos)
            continue
        targets.append(entry.human_score)
        weights.append(calibration_set.weights[pos])
    if not prepared:
        raise CalibrationFailed("every calibration entry failed to evaluate")

    trace = []

    def objective(log_k):
        k = math.exp(log_k)
        value = weighted_r2([p.score(k) for p in prepared], targets, weights)
        trace.append((k, value))
        return value

    grid = np.linspace(math.log(search.k_min), math.log(search.k_max), search.grid_points)
    values = [objective(g) for g in grid]
    best = int(np.argmax(values))  # first maximum -> smallest k on ties
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    a, b = lo + (1 - _GOLDEN) * (hi - lo), lo + _GOLDEN * (hi - lo)
    fa, fb = objective(a), objective(b)
    for _ in range(search.refine_iters):
        if fa >= fb:
            hi, b, fb = b, a, fa
            a = lo + (1 - _GOLDEN) * (hi - lo)
            fa = objective(a)
        else:
            lo, a, fa = a, b, fb
            b = lo + _GOLDEN * (hi - lo)
            fb = objective(b)

    k_star, obj = min(trace, key=lambda kv: (-kv[1], kv[0]))
    return CalibrationResult(k_star=k_star, objective=obj, search_trace=trace, failed=failed)


def read_scores_file(path):
    """Read a ``dataset,score`` CSV; dataset paths are resolved against the file's folder."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"dataset", "score"} <= set(reader.fieldnames):
            raise SchemaError(f"{path}: expected header 'dataset,score'")
        rows = []
        for line, row in enumerate(reader, start=2):
            try:
                score = float(row["score"])
            except (TypeError, ValueError):
                raise SchemaError(f"{path}:{line}: score {row['score']!r} is not a number") from None
            rows.append((path.parent / row["dataset"], score))
    return rows
