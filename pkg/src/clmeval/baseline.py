"""The six classical internal validation measures.

Every function takes an optional ``shift`` used by the shift-invariance test
apparatus. Measures built on squared distances (CH, XB) follow the exact shift
law of squared Euclidean distances: point-point terms move by ``shift``,
point-centroid terms by ``shift / 2`` and centroid-centroid terms not at all.
Measures built on plain distances (DI, II, DB, SC) have no such law, so every
distance term they use is moved by ``shift``.

Degenerate denominators raise instead of returning an infinite score.
"""

import numpy as np

from .core import check_dataset, class_distance_sums, iter_distance_blocks, sq_dist_to
from .errors import ClassTooSmall, DegenerateCentroids, DegenerateDispersion


def _centroids(X, part):
    return np.stack([X[m].mean(axis=0) for m in part.members])


def _within_sq(X, part, cents):
    return np.array([sq_dist_to(X[m], cents[i]).sum() for i, m in enumerate(part.members)])


def ch(X, labels, shift=0.0):
    """Calinski-Harabasz index (higher is better)."""
    X, part = check_dataset(X, labels)
    n, n_classes = X.shape[0], len(part.ids)
    c = X.mean(axis=0)
    cents = _centroids(X, part)
    between = float(np.sum(part.sizes * sq_dist_to(cents, c)))
    within = float(_within_sq(X, part, cents).sum()) + n * shift / 2.0
    if within <= 0.0:
        raise DegenerateDispersion("within-class sum of squares is zero")
    return (n - n_classes) / (n_classes - 1) * between / within


def _dunn_extrema(X, part):
    n_classes = len(part.ids)
    min_inter = np.inf
    max_intra = 0.0
    for start, stop, block in iter_distance_blocks(X):
        own = part.codes[start:stop]
        for j, m in enumerate(part.members):
            cols = block[:, m]
            same = own == j
            if np.any(same):
                max_intra = max(max_intra, float(cols[same].max()))
            if np.any(~same) and n_classes > 1:
                min_inter = min(min_inter, float(cols[~same].min()))
    return min_inter, max_intra


def di(X, labels, shift=0.0):
    """Dunn index: smallest inter-class point distance over largest intra-class one."""
    X, part = check_dataset(X, labels)
    min_inter, max_intra = _dunn_extrema(X, part)
    if max_intra + shift <= 0.0:
        raise DegenerateDispersion("all intra-class distances are zero")
    return (min_inter + shift) / (max_intra + shift)


def ii(X, labels, p=1.0, shift=0.0):
    """I index (Maulik-Bandyopadhyay) with power ``p``."""
    if p <= 0:
        raise ValueError("p must be positive")
    X, part = check_dataset(X, labels)
    n, n_classes = X.shape[0], len(part.ids)
    c = X.mean(axis=0)
    cents = _centroids(X, part)
    total = float(np.sqrt(sq_dist_to(X, c)).sum()) + n * shift
    within = sum(float(np.sqrt(sq_dist_to(X[m], cents[i])).sum())
                 for i, m in enumerate(part.members)) + n * shift
    if within <= 0.0:
        raise DegenerateDispersion("within-class distance sum is zero")
    diff = cents[:, None, :] - cents[None, :, :]
    max_cc = float(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)).max()) + shift
    return (total / within * max_cc / n_classes) ** p


def _min_centroid_sq(cents):
    diff = cents[:, None, :] - cents[None, :, :]
    dd = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(dd, np.inf)
    return dd


def xb(X, labels, shift=0.0):
    """Xie-Beni index (lower is better)."""
    X, part = check_dataset(X, labels)
    n = X.shape[0]
    cents = _centroids(X, part)
    min_cc = float(_min_centroid_sq(cents).min())
    if min_cc <= 0.0:
        raise DegenerateCentroids("two class centroids coincide")
    within = float(_within_sq(X, part, cents).sum()) + n * shift / 2.0
    return within / (n * min_cc)


def db(X, labels, shift=0.0):
    """Davies-Bouldin index (lower is better)."""
    X, part = check_dataset(X, labels)
    cents = _centroids(X, part)
    spread = np.array([np.sqrt(sq_dist_to(X[m], cents[i])).mean()
                       for i, m in enumerate(part.members)]) + shift
    dd = _min_centroid_sq(cents)
    if float(dd.min()) <= 0.0:
        raise DegenerateCentroids("two class centroids coincide")
    sep = np.sqrt(dd) + shift
    ratio = (spread[:, None] + spread[None, :]) / sep
    np.fill_diagonal(ratio, -np.inf)
    return float(ratio.max(axis=1).mean())


def _silhouette_terms(S, part):
    """Mean intra-class distance ``a`` and nearest other-class mean distance ``b`` per point."""
    sizes = part.sizes.astype(float)
    small = [cid for cid, s in zip(part.ids, sizes) if s < 2]
    if small:
        raise ClassTooSmall(f"class {small[0]!r} has a single point; silhouette needs 2")
    rows = np.arange(S.shape[0])
    a = S[rows, part.codes] / (sizes[part.codes] - 1.0)
    means = S / sizes[None, :]
    means[rows, part.codes] = np.inf
    b = means.min(axis=1)
    return a, b


def _class_mean(values, part):
    return float(np.mean([values[m].mean() for m in part.members]))


def sc(X, labels, shift=0.0):
    """Silhouette coefficient, averaged per class then over classes."""
    X, part = check_dataset(X, labels)
    a, b = _silhouette_terms(class_distance_sums(X, part), part)
    a, b = a + shift, b + shift
    denom = np.maximum(a, b)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(denom > 0, (b - a) / denom, 0.0)
    return _class_mean(s, part)


BASELINES = {"ch": ch, "di": di, "ii": ii, "xb": xb, "db": db, "sc": sc}
