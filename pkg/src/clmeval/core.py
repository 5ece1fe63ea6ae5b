"""Geometry and sampling primitives shared by every measure.

Datasets are plain ``(n, dim)`` float arrays and labelings are length-``n``
sequences of opaque class ids (ints or strings). Class ids are always visited in
``np.unique`` order, which keeps every pairwise reduction deterministic.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ClassTooSmall, DataError, EmptyInput, TooFewClasses

_CHUNK = 2048


def as_points(X, min_rows=1):
    """Validate and return ``X`` as a finite 2-D float array."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DataError(f"expected a 2-D array of points, got shape {X.shape}")
    if X.shape[0] < min_rows:
        if X.shape[0] == 0:
            raise EmptyInput("no points")
        raise DataError(f"need at least {min_rows} points, got {X.shape[0]}")
    if X.shape[1] < 1:
        raise DataError("points have no dimensions")
    if not np.all(np.isfinite(X)):
        raise DataError("points contain NaN or infinite values")
    return X


class Partition(NamedTuple):
    """Class structure of a labeling: sorted ids, integer codes, member indices."""

    ids: np.ndarray
    codes: np.ndarray
    members: list

    @property
    def sizes(self):
        return np.array([len(m) for m in self.members])


def partition(labels, n=None, min_classes=2):
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise DataError("labels must be one-dimensional")
    if n is not None and len(labels) != n:
        raise DataError(f"{len(labels)} labels for {n} points")
    ids, codes = np.unique(labels, return_inverse=True)
    codes = codes.reshape(-1)
    if len(ids) < min_classes:
        raise TooFewClasses(f"need at least {min_classes} classes, got {len(ids)}")
    order = np.argsort(codes, kind="stable")
    bounds = np.cumsum(np.bincount(codes, minlength=len(ids)))[:-1]
    members = np.split(order, bounds)
    return Partition(ids, codes, members)


def check_dataset(X, labels, min_classes=2):
    X = as_points(X, min_rows=2)
    return X, partition(labels, n=X.shape[0], min_classes=min_classes)


def centroid(points):
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if points.shape[0] == 0:
        raise EmptyInput("centroid of an empty set")
    return points.mean(axis=0)


def sq_dist_to(X, c):
    """Squared Euclidean distance of every row of ``X`` to the point ``c``."""
    diff = X - c
    return np.einsum("ij,ij->i", diff, diff)


@dataclass(frozen=True)
class DispersionStats:
    sigma_d: float
    sigma_d2: float


def dispersion(X):
    """Population standard deviations of distances and squared distances to the centroid."""
    X = as_points(X, min_rows=2)
    d2 = sq_dist_to(X, X.mean(axis=0))
    return DispersionStats(float(np.std(np.sqrt(d2))), float(np.std(d2)))


def euclidean(A, B):
    """Dense Euclidean distance matrix between the rows of ``A`` and ``B``.

    Uses the Gram expansion after centering both blocks on a common origin,
    which keeps cancellation error small for data far from the origin.
    """
    origin = A.mean(axis=0)
    A = A - origin
    B = B - origin
    sq = (np.einsum("ij,ij->i", A, A)[:, None] + np.einsum("ij,ij->i", B, B)[None, :]
          - 2.0 * (A @ B.T))
    np.maximum(sq, 0.0, out=sq)
    return np.sqrt(sq, out=sq)


def iter_distance_blocks(X, chunk=_CHUNK):
    """Yield ``(start, stop, D)`` where ``D`` holds distances from rows start:stop to all rows."""
    n = X.shape[0]
    Xc = X - X.mean(axis=0)
    sq = np.einsum("ij,ij->i", Xc, Xc)
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        block = sq[start:stop, None] + sq[None, :] - 2.0 * (Xc[start:stop] @ Xc.T)
        np.maximum(block, 0.0, out=block)
        np.sqrt(block, out=block)
        # exact zeros on the diagonal
        idx = np.arange(start, stop)
        block[idx - start, idx] = 0.0
        yield start, stop, block


def class_distance_sums(X, part):
    """Matrix ``S`` with ``S[x, j] = sum of d(x, y) over y in class j``."""
    n_classes = len(part.ids)
    onehot = np.zeros((X.shape[0], n_classes))
    onehot[np.arange(X.shape[0]), part.codes] = 1.0
    S = np.empty((X.shape[0], n_classes))
    for start, stop, block in iter_distance_blocks(X):
        S[start:stop] = block @ onehot
    return S


class MedianResult(NamedTuple):
    point: np.ndarray
    converged: bool
    iterations: int


def geometric_median(points, tolerance=1e-8, max_iter=1000):
    """Vardi-Zhang modified Weiszfeld iteration for the geometric median.

    ``tolerance`` bounds the movement of the iterate, relative to the mean
    distance of the points to their centroid (so the stopping rule is scale
    free). When the iterate lands on data points, the Vardi-Zhang step mixes the
    Weiszfeld update with the current point instead of dividing by zero. The
    iterate with the lowest objective seen is returned.
    """
    P = as_points(points)
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    y = P.mean(axis=0)
    if P.shape[0] == 1:
        return MedianResult(P[0].copy(), True, 0)
    spread = float(np.mean(np.sqrt(sq_dist_to(P, y))))
    if spread == 0.0:
        return MedianResult(y, True, 0)
    step_tol = tolerance * spread
    coincide = 1e-12 * spread
    best, best_obj = y, math.inf
    for it in range(1, max_iter + 1):
        diff = P - y
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        obj = float(d.sum())
        if obj < best_obj:
            best, best_obj = y, obj
        far = d > coincide
        eta = int(P.shape[0] - np.count_nonzero(far))
        w = 1.0 / d[far]
        T = (w[:, None] * P[far]).sum(axis=0) / w.sum()
        if eta == 0:
            y_new = T
        else:
            r = float(np.linalg.norm((w[:, None] * diff[far]).sum(axis=0)))
            if r <= eta:
                return MedianResult(y, True, it)
            gamma = eta / r
            y_new = (1.0 - gamma) * T + gamma * y
        moved = float(np.linalg.norm(y_new - y))
        y = y_new
        if moved < step_tol:
            obj = float(np.sqrt(sq_dist_to(P, y)).sum())
            if obj <= best_obj:
                best = y
            return MedianResult(best, True, it)
    return MedianResult(best, False, max_iter)


def make_rng(seed):
    """Accept a seed, a ``SeedSequence`` or an existing ``Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def derive_seed(seed, *index):
    """Independent child seed for task ``index`` of a master ``seed``."""
    entropy = [int(seed)] + [int(i) for i in index]
    return np.random.SeedSequence(entropy)


def shuffle_labels(labels, rng):
    """Uniformly random relabeling that keeps every class size."""
    return make_rng(rng).permutation(np.asarray(labels))


def round_half_up(x):
    return int(math.floor(x + 0.5))


def subsample(X, labels, alpha, rng):
    """Per-class uniform subsample without replacement, keeping class proportions.

    Each class keeps ``max(2, round(alpha * size))`` points; surviving rows keep
    their original order.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    X = as_points(X)
    part = partition(labels, n=X.shape[0], min_classes=1)
    rng = make_rng(rng)
    keep = []
    for cid, idx in zip(part.ids, part.members):
        m = max(2, round_half_up(alpha * len(idx)))
        if m > len(idx):
            raise ClassTooSmall(f"class {cid!r} has {len(idx)} point(s); subsampling needs 2")
        keep.append(idx if m == len(idx) else rng.choice(idx, size=m, replace=False))
    keep = np.sort(np.concatenate(keep))
    return X[keep], np.asarray(labels)[keep]


def _pair_sqsum(A, B):
    diff = A[:, None, :] - B[None, :, :]
    return float(np.einsum("ijk,ijk->", diff, diff))


def shifted_type2_sum(points, beta):
    """Sum of squared distances to the centroid, recovered from pairwise sums
    after adding ``beta`` to every squared point-point distance (diagonal included)."""
    P = as_points(points)
    n = P.shape[0]
    return (_pair_sqsum(P, P) + n * n * beta) / (2.0 * n)


def shifted_centroid_sqdist(A, B, beta):
    """Squared centroid-centroid distance from the three pairwise double sums,
    with ``beta`` added to every squared point-point distance."""
    A, B = as_points(A), as_points(B)
    na, nb = A.shape[0], B.shape[0]
    cross = (_pair_sqsum(A, B) + na * nb * beta) / (na * nb)
    own_a = (_pair_sqsum(A, A) + na * na * beta) / (2.0 * na * na)
    own_b = (_pair_sqsum(B, B) + nb * nb * beta) / (2.0 * nb * nb)
    return cross - own_a - own_b


def pairwise_distance_identities_check(X, subset_a, subset_b):
    """Absolute residuals of the two pair-sum identities on the given subsets.

    First: ``2n * sum d^2(x, c) == sum_x sum_y d^2(x, y)`` on ``subset_a``.
    Second: the centroid-centroid squared distance equals the cross double sum
    minus the two halved within double sums.
    """
    X = as_points(X)
    A = X[np.asarray(subset_a, dtype=int)]
    B = X[np.asarray(subset_b, dtype=int)]
    if len(A) == 0 or len(B) == 0:
        raise EmptyInput("identity check needs two nonempty subsets")
    n = A.shape[0]
    lhs = 2.0 * n * float(sq_dist_to(A, A.mean(axis=0)).sum())
    res1 = abs(lhs - _pair_sqsum(A, A))
    ca, cb = A.mean(axis=0), B.mean(axis=0)
    direct = float(np.dot(ca - cb, ca - cb))
    res2 = abs(direct - shifted_centroid_sqdist(A, B, 0.0))
    return res1, res2
