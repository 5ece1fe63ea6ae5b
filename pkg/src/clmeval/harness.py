"""Experiment machinery: sensitivity ablations, noisy-label ranking, rank
stability of benchmark subsets and CLM-improving feature-subset search."""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.stats import rankdata

from .core import derive_seed, make_rng, round_half_up, subsample
from .errors import CLMError, DataError, DegenerateRanks, annotate
from .synth import base_datasets, generate_gaussian_pair, noisy_label_variants

CARDINALITY_LEVELS = tuple(50 * t + 500 for t in range(11))
DIMENSION_LEVELS = (2,) + tuple(10 * t for t in range(1, 11))
DEFAULT_FRACTIONS = tuple(round(0.1 * l, 1) for l in range(11))


def smape(F, G):
    """Symmetric mean absolute percentage error, 0 when both inputs are all zero."""
    F = np.asarray(F, dtype=float)
    G = np.asarray(G, dtype=float)
    if F.shape != G.shape or F.size == 0:
        raise ValueError("smape needs two nonempty sequences of equal length")
    denom = float(np.sum(np.abs(F) + np.abs(G)))
    if denom == 0.0:
        return 0.0
    return float(np.sum(np.abs(F - G))) / denom


def spearman(a, b):
    """Spearman rank correlation with average ranks for ties."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("spearman needs two 1-D sequences of equal length")
    if len(a) < 2:
        raise DegenerateRanks("need at least two observations")
    ra, rb = rankdata(a), rankdata(b)
    if np.ptp(ra) == 0 or np.ptp(rb) == 0:
        raise DegenerateRanks("one of the inputs is constant")
    ra -= ra.mean()
    rb -= rb.mean()
    r = float(np.dot(ra, rb) / np.sqrt(np.dot(ra, ra) * np.dot(rb, rb)))
    return min(1.0, max(-1.0, r))


# --------------------------------------------------------------------- ablation

def default_levels(axis, base_n=1000, base_dim=100):
    """Sweep levels scaled to the base size; the defaults give the standard grids."""
    if axis == "cardinality":
        return tuple(round_half_up(base_n * c / 1000) for c in CARDINALITY_LEVELS)
    return tuple(dict.fromkeys(max(2, round_half_up(base_dim * d / 100)) for d in DIMENSION_LEVELS))


@dataclass(frozen=True)
class SweepConfig:
    axis: str
    levels: tuple = None
    base_count: int = 200
    seed: int = 0
    base_n: int = 1000
    base_dim: int = 100

    def __post_init__(self):
        if self.axis not in ("cardinality", "dimensionality"):
            raise ValueError("axis must be 'cardinality' or 'dimensionality'")
        if self.levels is None:
            object.__setattr__(self, "levels", default_levels(self.axis, self.base_n, self.base_dim))
        levels = tuple(self.levels)
        if not levels or any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("levels must be nonempty and strictly increasing")
        object.__setattr__(self, "levels", levels)
        if self.base_count < 2:
            raise ValueError("need at least two base datasets")


def sweep_dataset(config, spec, X, labels, base_index, t):
    """The dataset of base ``base_index`` at level index ``t``."""
    rng = np.random.default_rng(derive_seed(config.seed, base_index, t))
    if config.axis == "cardinality":
        size = config.levels[t]
        dim = int(rng.integers(2, config.base_dim + 1))
    else:
        dim = config.levels[t]
        size = int(rng.integers(config.base_n // 2, config.base_n + 1))
    if size > X.shape[0] or dim > X.shape[1]:
        raise DataError(f"level ({size} points, {dim} dims) exceeds the base dataset")
    return subsample(X[:, :dim], labels, size / X.shape[0], rng)


def _score_base(args):
    variants, config, spec, base_index = args
    X, labels = generate_gaussian_pair(spec)
    out = {name: np.empty(len(config.levels)) for name in variants}
    for t, level in enumerate(config.levels):
        Xt, lt = sweep_dataset(config, spec, X, labels, base_index, t)
        for name, fn in variants.items():
            try:
                out[name][t] = fn(Xt, lt)
            except CLMError as err:
                raise annotate(err, f"variant {name}, level {level}, base {base_index}") from err
    return out


def ablation_errors(scores, weights=None):
    """Pairwise-level SMAPE matrix of one variant's ``(bases, levels)`` score table."""
    scores = np.asarray(scores, dtype=float)
    w = np.ones(scores.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    L = scores.shape[1]
    E = np.zeros((L, L))
    for a in range(L):
        for b in range(a + 1, L):
            M = min(scores[:, a].min(), scores[:, b].min())
            E[a, b] = E[b, a] = smape(w * (scores[:, a] - M), w * (scores[:, b] - M))
    return E


@dataclass
class AblationReport:
    axis: str
    levels: tuple
    scores: dict
    errors: dict
    averages: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "axis": self.axis,
            "levels": list(self.levels),
            "averages": dict(self.averages),
            "errors": {k: v.tolist() for k, v in self.errors.items()},
        }


def ablation_sweep(measure_variants, sweep_config, weights=None, workers=1):
    """SMAPE sensitivity of each measure variant across the levels of one factor.

    ``measure_variants`` maps names to ``fn(X, labels) -> float`` (must be
    picklable when ``workers > 1``). ``weights`` are per-base-dataset weights,
    uniform by default.
    """
    specs = base_datasets(sweep_config.base_count, sweep_config.seed,
                          n=sweep_config.base_n, target_dim=sweep_config.base_dim)
    tasks = [(measure_variants, sweep_config, spec, i) for i, spec in enumerate(specs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_base = list(pool.map(_score_base, tasks))
    else:
        per_base = [_score_base(t) for t in tasks]
    scores = {name: np.stack([b[name] for b in per_base]) for name in measure_variants}
    errors = {name: ablation_errors(s, weights) for name, s in scores.items()}
    L = len(sweep_config.levels)
    iu = np.triu_indices(L, 1)
    averages = {name: float(E[iu].mean()) for name, E in errors.items()}
    return AblationReport(sweep_config.axis, sweep_config.levels, scores, errors, averages)


def worker_count():
    """Worker pool size, capped by the ``CLM_THREADS`` environment variable."""
    cap = os.environ.get("CLM_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


# ------------------------------------------------------------- within-dataset

def noisy_label_ranking(X, labels, measure, fractions=DEFAULT_FRACTIONS, seed=0):
    """Spearman correlation between measure scores and the noise ranking (less noise ranks higher)."""
    fractions = list(fractions)
    if len(fractions) < 2:
        raise DegenerateRanks("need at least two noise fractions")
    variants = noisy_label_variants(labels, fractions, seed)
    scores = [measure(X, v.labels) for v in variants]
    return spearman(scores, [-f for f in fractions])


# ------------------------------------------------------------- rank stability

@dataclass
class ScoreTable:
    datasets: list
    techniques: list
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.datasets), len(self.techniques)):
            raise DataError("score table is not rectangular")
        if not np.all(np.isfinite(self.values)):
            raise DataError("score table has non-finite cells")


def rank_stability(score_table, subset_size, n_sims, seed):
    """Pairwise rank stability ``max(1 - p, p)`` over random benchmark subsets.

    ``p`` is the share of simulations in which the row technique's subset mean
    strictly beats the column technique's; ties count for neither side. The
    matrix is filled from the upper triangle and mirrored, diagonal 1.
    """
    values = score_table.values if isinstance(score_table, ScoreTable) else np.asarray(score_table, float)
    n_data, n_tech = values.shape
    if not 1 <= subset_size <= n_data:
        raise ValueError(f"subset size must lie in [1, {n_data}]")
    if n_sims < 1:
        raise ValueError("need at least one simulation")
    rng = make_rng(seed)
    means = np.empty((n_sims, n_tech))
    for s in range(n_sims):
        pick = rng.choice(n_data, size=subset_size, replace=False)
        means[s] = values[pick].mean(axis=0)
    P = np.ones((n_tech, n_tech))
    for a in range(n_tech):
        for b in range(a + 1, n_tech):
            p = float(np.mean(means[:, a] > means[:, b]))
            P[a, b] = P[b, a] = max(1.0 - p, p)
    return P


# ---------------------------------------------------------- feature selection

class Improvement(NamedTuple):
    mask: np.ndarray
    score: float
    original_score: float
    n_failed: int


def random_masks(dim, count, rng):
    """``count`` i.i.d. Bernoulli(1/2) column masks, none of them empty."""
    masks = rng.random((count, dim)) < 0.5
    empty = ~masks.any(axis=1)
    while np.any(empty):
        masks[empty] = rng.random((int(empty.sum()), dim)) < 0.5
        empty = ~masks.any(axis=1)
    return masks


def improve_clm(X, labels, measure, n_candidates=1000, seed=0):
    """Random subspace search for the column subset that maximizes ``measure``.

    The full column set is always evaluated first, so the returned score is
    never below the original one; failing candidates are skipped and counted.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] < 2:
        raise DataError("feature selection needs at least two dimensions")
    if n_candidates < 1:
        raise ValueError("need at least one candidate")
    rng = make_rng(seed)
    full = np.ones(X.shape[1], dtype=bool)
    original = measure(X, labels)
    best_mask, best = full, original
    failed = 0
    for mask in random_masks(X.shape[1], n_candidates, rng):
        try:
            value = measure(X[:, mask], labels)
        except CLMError:
            failed += 1
            continue
        if value > best:
            best_mask, best = mask, value
    return Improvement(best_mask.copy(), float(best), float(original), failed)
