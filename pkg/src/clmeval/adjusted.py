"""Adjusted validation measures: CH_A, DI_A, {II,XB}_A, DB_A and SC_A.

Each adjusted measure is a class-pairwise aggregation of a per-pair score. For
every pair of classes the two classes are cut out as their own sub-dataset
(centroid, dispersion and worst-case estimate are recomputed there), a
shift-invariant *core* is evaluated, squashed by a logistic of growth rate
``k`` and min-max scaled against a worst-case estimate:

* closed form: the worst logistic value is exactly 1/2, so the pair score is
  ``2 * logistic(k * core) - 1 = tanh(k * core / 2)``;
* Monte-Carlo: the worst value is the mean logistic value over class-size
  preserving label shuffles;
* geometric-median partition (DI only): the worst value is the core of the
  split {point nearest the geometric median} vs. the rest.

SC_A needs no logistic stage: its core already lives in (-1, 1).

The pair score depends on ``k`` only through the logistic, so
:func:`prepare` evaluates the cores once and returns an object that scores any
``k`` cheaply; calibration relies on this.
"""

import math
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np
from scipy.special import expit, logsumexp

from .baseline import _class_mean, _silhouette_terms
from .core import (
    check_dataset,
    class_distance_sums,
    derive_seed,
    geometric_median,
    iter_distance_blocks,
    make_rng,
    partition,
    shuffle_labels,
    sq_dist_to,
)
from .errors import (
    ClassTooSmall,
    CLMError,
    DegenerateCentroids,
    DegenerateDispersion,
    annotate_pair,
)

CLOSED_FORM = "closed_form"
MONTE_CARLO = "monte_carlo"
GEOMETRIC_MEDIAN = "geometric_median"
MIN_MODES = (CLOSED_FORM, MONTE_CARLO, GEOMETRIC_MEDIAN)
AGGREGATES = {"avg": np.mean, "min": np.min, "max": np.max}

KINDS = ("ch_a", "di_a", "iixb_a", "db_a", "sc_a")
_DEFAULT_MIN = {"ch_a": CLOSED_FORM, "di_a": GEOMETRIC_MEDIAN, "iixb_a": CLOSED_FORM,
                "db_a": CLOSED_FORM, "sc_a": None}


@dataclass(frozen=True)
class MeasureConfig:
    """Settings shared by the adjusted measures.

    ``min_mode=None`` picks the measure's default worst-case estimator
    (closed form for CH/II/XB/DB, geometric-median partition for DI).
    """

    k: float = 1.0
    min_mode: str | None = None
    T: int = 100
    seed: int | None = None
    p: float = 1.0
    agg: str = "avg"

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k > 0):
            raise ValueError(f"k must be finite and positive, got {self.k}")
        if self.min_mode is not None and self.min_mode not in MIN_MODES:
            raise ValueError(f"unknown min_mode {self.min_mode!r}; expected one of {MIN_MODES}")
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if self.p <= 0:
            raise ValueError("p must be positive")
        if self.agg not in AGGREGATES:
            raise ValueError(f"unknown agg {self.agg!r}; expected one of {tuple(AGGREGATES)}")

    def resolve_min_mode(self, kind):
        if kind == "sc_a":
            return None
        mode = self.min_mode or _DEFAULT_MIN[kind]
        if mode == CLOSED_FORM and kind == "di_a":
            raise ValueError("the closed-form worst score does not apply to DI_A")
        if mode == GEOMETRIC_MEDIAN and kind != "di_a":
            raise ValueError("the geometric-median worst case only applies to DI_A")
        if mode == MONTE_CARLO and self.seed is None:
            raise ValueError("Monte-Carlo worst-score estimation needs a seed")
        return mode


def logistic(x, k=1.0):
    """``1 / (1 + exp(-k x))``, overflow safe."""
    if k <= 0:
        raise ValueError("k must be positive")
    return float(expit(k * x)) if np.ndim(x) == 0 else expit(k * np.asarray(x, dtype=float))


def _exp(log_value):
    with np.errstate(over="ignore"):
        return float(np.exp(log_value))


# --------------------------------------------------------------------------- cores

@dataclass
class _SqStats:
    """Squared-distance building blocks of a labeled dataset, shift applied."""

    n: int
    sizes: np.ndarray
    cents: np.ndarray
    sigma: float
    global_mean: float       # mean shifted d^2(x, c)
    within_mean: float       # mean shifted d^2(x, c_i) over all points
    class_means: np.ndarray  # per-class mean shifted d^2(x, c_i)
    between: float           # sum |C_i| d^2(c_i, c), unshifted (centroid-centroid)


def _sq_stats(X, part, shift):
    c = X.mean(axis=0)
    t2 = sq_dist_to(X, c) + shift / 2.0
    sigma = float(np.std(t2))
    if sigma <= 0.0:
        raise DegenerateDispersion("standard deviation of squared distances to the centroid is zero")
    cents = np.stack([X[m].mean(axis=0) for m in part.members])
    sizes = part.sizes
    class_sums = np.array([sq_dist_to(X[m], cents[i]).sum() for i, m in enumerate(part.members)])
    class_sums = class_sums + sizes * shift / 2.0
    return _SqStats(
        n=X.shape[0],
        sizes=sizes,
        cents=cents,
        sigma=sigma,
        global_mean=float(t2.mean()),
        within_mean=float(class_sums.sum() / X.shape[0]),
        class_means=class_sums / sizes,
        between=float(np.sum(sizes * sq_dist_to(cents, c))),
    )


def _centroid_sq(cents):
    diff = cents[:, None, :] - cents[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _ch_core(st):
    if st.between <= 0.0:
        return 0.0
    n_classes = len(st.sizes)
    log_v = ((st.global_mean - st.within_mean) / st.sigma
             + math.log(st.between / (st.sigma * st.n * (n_classes - 1))))
    return _exp(log_v)


def _ii_core(st):
    dd = _centroid_sq(st.cents)
    top = float(dd.max())
    if top <= 0.0:
        return 0.0
    log_v = ((st.global_mean - st.within_mean) / st.sigma
             + math.log(top / st.sigma) - math.log(len(st.sizes)))
    return _exp(log_v)


def _xb_core(st):
    dd = _centroid_sq(st.cents)
    np.fill_diagonal(dd, np.inf)
    low = float(dd.min())
    if low <= 0.0:
        return 0.0
    return _exp((st.global_mean - st.within_mean) / st.sigma + math.log(low / st.sigma))


def _db_core(st):
    dd = _centroid_sq(st.cents)
    np.fill_diagonal(dd, np.inf)
    if float(dd.min()) <= 0.0:
        raise DegenerateCentroids("two class centroids coincide")
    a = (st.class_means - st.global_mean) / st.sigma
    log_r = np.logaddexp(a[:, None], a[None, :]) - np.log(dd / st.sigma)
    np.fill_diagonal(log_r, -np.inf)
    worst = log_r.max(axis=1)
    log_mean = float(logsumexp(worst) - math.log(len(worst)))
    return _exp(-log_mean)


def _sigma_d(X):
    sigma = float(np.std(np.sqrt(sq_dist_to(X, X.mean(axis=0)))))
    if sigma <= 0.0:
        raise DegenerateDispersion("standard deviation of distances to the centroid is zero")
    return sigma


def _dunn_from_sums(P, sizes, sigma, shift):
    """DI_2 from the class-by-class distance sum matrix ``P``."""
    sizes = np.asarray(sizes, dtype=float)
    avg = P / np.outer(sizes, sizes)
    np.fill_diagonal(avg, np.inf)
    min_inter = float(avg.min())
    multi = sizes >= 2
    if not np.any(multi):
        raise ClassTooSmall("no class has two points")
    diag = np.diag(P)[multi] / (sizes[multi] * (sizes[multi] - 1.0))
    max_intra = float(diag.max())
    return _exp(((min_inter + shift) - (max_intra + shift)) / sigma)


def _sc_from_sums(S, part, sigma, shift):
    a, b = _silhouette_terms(S, part)
    gap = (b + shift) - (a + shift)
    s = np.sign(gap) * -np.expm1(-np.abs(gap) / sigma)
    return _class_mean(s, part)


def _onehot(codes, n_classes):
    H = np.zeros((len(codes), n_classes))
    H[np.arange(len(codes)), codes] = 1.0
    return H


def ch_core(X, labels, shift=0.0):
    """Shift-invariant Calinski-Harabasz core (CH_3), nonnegative."""
    X, part = check_dataset(X, labels)
    return _ch_core(_sq_stats(X, part, shift))


def ii_core(X, labels, shift=0.0):
    """Shift-invariant I-index core (II_1)."""
    X, part = check_dataset(X, labels)
    return _ii_core(_sq_stats(X, part, shift))


def xb_core(X, labels, shift=0.0):
    """Inverted shift-invariant Xie-Beni core (XB_3); equals ``2 * ii_core`` on two classes."""
    X, part = check_dataset(X, labels)
    return _xb_core(_sq_stats(X, part, shift))


def db_core(X, labels, shift=0.0):
    """Inverted shift-invariant Davies-Bouldin core (DB_3)."""
    X, part = check_dataset(X, labels)
    return _db_core(_sq_stats(X, part, shift))


def dunn_core(X, labels, shift=0.0):
    """Shift-invariant Dunn core (DI_2) built on average distances."""
    X, part = check_dataset(X, labels)
    sigma = _sigma_d(X)
    S = class_distance_sums(X, part)
    P = _onehot(part.codes, len(part.ids)).T @ S
    return _dunn_from_sums(P, part.sizes, sigma, shift)


def sc_core(X, labels, shift=0.0):
    """Silhouette with exponentiated, dispersion-normalized a(x) and b(x) (SC_1)."""
    X, part = check_dataset(X, labels)
    sigma = _sigma_d(X)
    return _sc_from_sums(class_distance_sums(X, part), part, sigma, shift)


CORES = {"ch_a": ch_core, "di_a": dunn_core, "iixb_a": ii_core, "db_a": db_core, "sc_a": sc_core}


def shifted_evaluation(measure_core, X, labels, beta):
    """Evaluate a core (or a baseline measure) with all distances shifted by ``beta``."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    return measure_core(X, labels, shift=beta)


# ---------------------------------------------------------------- worst-case estimates

def estimate_min_monte_carlo(raw_measure, X, labels, T, seed, k=1.0):
    """Mean logistic-transformed score over ``T`` class-size preserving shuffles."""
    if T < 1:
        raise ValueError("T must be at least 1")
    rng = make_rng(seed)
    values = [raw_measure(X, shuffle_labels(labels, rng)) for _ in range(T)]
    return float(np.mean(logistic(np.array(values, dtype=float), k)))


def _dunn_shuffle_cores(Xs, codes, T, seed, sigma):
    """DI_2 under ``T`` label shuffles, sharing one pass over the distance matrix."""
    rng = make_rng(seed)
    n_classes = int(codes.max()) + 1
    shuffles = [rng.permutation(codes) for _ in range(T)]
    H = np.concatenate([_onehot(s, n_classes) for s in shuffles], axis=1)
    SH = np.empty((Xs.shape[0], H.shape[1]))
    for start, stop, block in iter_distance_blocks(Xs):
        SH[start:stop] = block @ H
    sizes = np.bincount(codes, minlength=n_classes)
    out = np.empty(T)
    for t, s in enumerate(shuffles):
        cols = SH[:, t * n_classes:(t + 1) * n_classes]
        P = _onehot(s, n_classes).T @ cols
        out[t] = _dunn_from_sums(P, sizes, sigma, 0.0)
    return out


def dunn_worst_geometric_median(Xs, row_sums, sigma):
    """DI_2 of the split {point nearest the geometric median} vs. the rest.

    ``row_sums[x]`` is the sum of distances from point ``x`` to all points of
    ``Xs``. Returns ``(core, index_of_singleton, converged)``.
    """
    m = Xs.shape[0]
    if m < 3:
        raise ClassTooSmall("the geometric-median split needs at least 3 points")
    gm = geometric_median(Xs)
    idx = int(np.argmin(sq_dist_to(Xs, gm.point)))
    total = float(row_sums.sum())
    r = float(row_sums[idx])
    inter = r / (m - 1)
    intra = (total - 2.0 * r) / ((m - 1) * (m - 2))
    return _exp((inter - intra) / sigma), idx, gm.converged


# --------------------------------------------------------------------- pair scoring

@dataclass
class PairCore:
    """Core value of one class pair plus the data needed for its worst-case term."""

    pair: tuple
    core: float
    mode: str | None
    worst: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    def score(self, k):
        """Return ``(score, clamped)`` at growth rate ``k``."""
        if self.mode is None:
            return self.core, False
        if self.mode == CLOSED_FORM:
            return float(np.tanh(k * self.core / 2.0)), False
        # 1 - L and 1 - L_min in log space: (L - Lmin) / (1 - Lmin) = 1 - (1-L)/(1-Lmin)
        log_tail = -float(np.logaddexp(0.0, k * self.core))
        tails = -np.logaddexp(0.0, k * self.worst)
        log_tail_min = float(logsumexp(tails) - math.log(len(tails)))
        s = -math.expm1(log_tail - log_tail_min)
        if s < 0.0:
            return 0.0, True
        return s, False

    def worst_logistic(self, k):
        if self.mode is None:
            return None
        if self.mode == CLOSED_FORM:
            return 0.5
        return float(np.mean(expit(k * self.worst)))


def _pairs(part):
    return list(combinations(range(len(part.ids)), 2))


def _pair_subset(X, part, i, j):
    idx = np.sort(np.concatenate([part.members[i], part.members[j]]))
    codes = (part.codes[idx] == j).astype(int)
    return idx, codes


def pairwise_aggregate(pair_measure, X, labels, agg="avg"):
    """Aggregate ``pair_measure(X_pair, labels_pair)`` over all class pairs.

    Pairs are visited in sorted class-id order; a failing pair aborts the whole
    evaluation with an error that names it.
    """
    if agg not in AGGREGATES:
        raise ValueError(f"unknown agg {agg!r}")
    X, part = check_dataset(X, labels)
    labels = np.asarray(labels)
    values = []
    for i, j in _pairs(part):
        idx, _ = _pair_subset(X, part, i, j)
        try:
            values.append(pair_measure(X[idx], labels[idx]))
        except CLMError as err:
            raise annotate_pair(err, (part.ids[i], part.ids[j])) from err
    return float(AGGREGATES[agg](values))


class Prepared:
    """Per-pair cores of one adjusted measure on one labeled dataset."""

    def __init__(self, kind, pairs, agg):
        self.kind = kind
        self.pairs = pairs
        self.agg = agg

    def score(self, k):
        return float(AGGREGATES[self.agg]([pc.score(k)[0] for pc in self.pairs]))

    def breakdown(self, k):
        rows = []
        for pc in self.pairs:
            s, clamped = pc.score(k)
            row = {"class_a": pc.pair[0], "class_b": pc.pair[1], "core": pc.core, "score": s,
                   "worst_logistic": pc.worst_logistic(k), "clamped": clamped}
            row.update(pc.info)
            rows.append(row)
        return rows


def _sq_pair(kind, core_fn, mode, Xs, codes, config, pair_seed):
    part = partition(codes)
    core = core_fn(_sq_stats(Xs, part, 0.0))
    worst = None
    if mode == MONTE_CARLO:
        rng = make_rng(pair_seed)
        worst = np.array([core_fn(_sq_stats(Xs, partition(rng.permutation(codes)), 0.0))
                          for _ in range(config.T)])
    return core, worst, {}


def prepare(kind, X, labels, config=None):
    """Compute the per-pair cores of adjusted measure ``kind``."""
    if kind not in KINDS:
        raise ValueError(f"unknown adjusted measure {kind!r}; expected one of {KINDS}")
    config = config or MeasureConfig()
    mode = config.resolve_min_mode(kind)
    X, part = check_dataset(X, labels)
    if kind in ("di_a", "sc_a"):
        small = [cid for cid, s in zip(part.ids, part.sizes) if s < 2]
        if small:
            raise ClassTooSmall(f"class {small[0]!r} has a single point; {kind} needs 2 per class")
        S = class_distance_sums(X, part)
    pairs = []
    for p_index, (i, j) in enumerate(_pairs(part)):
        pair = (part.ids[i], part.ids[j])
        pair_seed = None if config.seed is None else derive_seed(config.seed, p_index)
        try:
            idx, codes = _pair_subset(X, part, i, j)
            Xs = X[idx]
            info = {}
            worst = None
            if kind in ("ch_a", "iixb_a", "db_a"):
                core_fn = {"ch_a": _ch_core, "iixb_a": _ii_core, "db_a": _db_core}[kind]
                core, worst, info = _sq_pair(kind, core_fn, mode, Xs, codes, config, pair_seed)
            else:
                sigma = _sigma_d(Xs)
                Ss = S[np.ix_(idx, [i, j])]
                if kind == "sc_a":
                    core = _sc_from_sums(Ss, partition(codes), sigma, 0.0)
                else:
                    H = _onehot(codes, 2)
                    core = _dunn_from_sums(H.T @ Ss, np.bincount(codes), sigma, 0.0)
                    if mode == GEOMETRIC_MEDIAN:
                        w, where, converged = dunn_worst_geometric_median(Xs, Ss.sum(axis=1), sigma)
                        worst = np.array([w])
                        info = {"median_index": int(idx[where]), "median_converged": converged}
                    else:
                        worst = _dunn_shuffle_cores(Xs, codes, config.T, pair_seed, sigma)
        except CLMError as err:
            raise annotate_pair(err, pair) from err
        pairs.append(PairCore(pair, core, mode, worst, info))
    return Prepared(kind, pairs, config.agg)


def _adjusted(kind, X, labels, config):
    config = config or MeasureConfig()
    return prepare(kind, X, labels, config).score(config.k)


def ch_adjusted(X, labels, config=None):
    """Adjusted Calinski-Harabasz index CH_A, in [0, 1]."""
    return _adjusted("ch_a", X, labels, config)


def dunn_adjusted(X, labels, config=None):
    """Adjusted Dunn index DI_A, in [0, 1]."""
    return _adjusted("di_a", X, labels, config)


def ii_xb_adjusted(X, labels, config=None):
    """Adjusted I index, identical to the adjusted Xie-Beni index; in [0, 1]."""
    return _adjusted("iixb_a", X, labels, config)


ii_adjusted = ii_xb_adjusted
xb_adjusted = ii_xb_adjusted


def db_adjusted(X, labels, config=None):
    """Adjusted Davies-Bouldin index DB_A, in [0, 1]."""
    return _adjusted("db_a", X, labels, config)


def sc_adjusted(X, labels, config=None):
    """Adjusted silhouette SC_A, in (-1, 1) with random-label expectation near 0."""
    return _adjusted("sc_a", X, labels, config)


ADJUSTED = {"ch_a": ch_adjusted, "di_a": dunn_adjusted, "iixb_a": ii_xb_adjusted,
            "db_a": db_adjusted, "sc_a": sc_adjusted}


def with_k(config, k):
    return replace(config or MeasureConfig(), k=k)
