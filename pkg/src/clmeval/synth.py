"""Two-Gaussian labeled datasets with noisy extra dimensions, and noisy-label variants."""

from dataclasses import dataclass

import numpy as np

from .core import derive_seed, make_rng, round_half_up
from .errors import ClassTooSmall


@dataclass(frozen=True)
class GaussianPairSpec:
    """Shape of a two-cluster dataset.

    Class A is centred at the origin of the 2-D cluster plane and class B at
    ``(mean_distance, 0)``; orientation comes from the covariances.
    """

    cov_a: tuple
    cov_b: tuple
    proportion: float = 0.5
    mean_distance: float = 1.0
    n: int = 1000
    target_dim: int = 2
    seed: int = 0

    def __post_init__(self):
        for name in ("cov_a", "cov_b"):
            cov = np.asarray(getattr(self, name), dtype=float)
            if cov.shape != (2, 2) or not np.allclose(cov, cov.T):
                raise ValueError(f"{name} must be a symmetric 2x2 matrix")
            if np.linalg.eigvalsh(cov).min() <= 0:
                raise ValueError(f"{name} must be positive definite")
        if not 0.0 < self.proportion < 1.0:
            raise ValueError("proportion must lie in (0, 1)")
        if self.mean_distance < 0:
            raise ValueError("mean_distance must be nonnegative")
        if self.n < 4:
            raise ClassTooSmall("need n >= 4 so both classes keep 2 points")
        if self.target_dim < 2:
            raise ValueError("target_dim must be at least 2")

    def class_sizes(self):
        n_a = min(max(round_half_up(self.proportion * self.n), 2), self.n - 2)
        return n_a, self.n - n_a

    def to_dict(self):
        return {
            "cov_a": np.asarray(self.cov_a, dtype=float).tolist(),
            "cov_b": np.asarray(self.cov_b, dtype=float).tolist(),
            "proportion": self.proportion,
            "mean_distance": self.mean_distance,
            "n": self.n,
            "target_dim": self.target_dim,
            "seed": self.seed,
        }


def noise_variance(cov):
    """Variance of the extra dimensions: smallest eigenvalue of the cluster covariance."""
    return float(np.linalg.eigvalsh(np.asarray(cov, dtype=float)).min())


def _cluster(rng, mean, cov, size, extra):
    cov = np.asarray(cov, dtype=float)
    plane = rng.standard_normal((size, 2)) @ np.linalg.cholesky(cov).T + mean
    if extra == 0:
        return plane
    noise = rng.standard_normal((size, extra)) * np.sqrt(noise_variance(cov))
    return np.hstack([plane, noise])


def generate_gaussian_pair(spec):
    """Sample ``(X, labels)``; class A rows come first, labels are 0 (A) and 1 (B)."""
    rng = make_rng(spec.seed)
    n_a, n_b = spec.class_sizes()
    extra = spec.target_dim - 2
    A = _cluster(rng, np.zeros(2), spec.cov_a, n_a, extra)
    B = _cluster(rng, np.array([spec.mean_distance, 0.0]), spec.cov_b, n_b, extra)
    labels = np.repeat([0, 1], [n_a, n_b])
    return np.vstack([A, B]), labels


def random_covariance(rng, scale_range=(0.3, 2.0)):
    sd = rng.uniform(*scale_range, size=2)
    theta = rng.uniform(0.0, np.pi)
    rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    return rot @ np.diag(sd ** 2) @ rot.T


def random_spec(rng, n=1000, target_dim=100, max_distance=8.0, seed=None):
    """Draw the eight shape parameters of a base dataset at random."""
    rng = make_rng(rng)
    return GaussianPairSpec(
        cov_a=random_covariance(rng),
        cov_b=random_covariance(rng),
        proportion=float(rng.uniform(0.2, 0.8)),
        mean_distance=float(rng.uniform(0.0, max_distance)),
        n=n,
        target_dim=target_dim,
        seed=int(rng.integers(2**31)) if seed is None else seed,
    )


def base_datasets(count, seed, n=1000, target_dim=100):
    """``count`` random specs, each drawn from its own child seed."""
    return [random_spec(np.random.default_rng(derive_seed(seed, i)), n=n, target_dim=target_dim)
            for i in range(count)]


@dataclass(frozen=True)
class NoisyLabelVariant:
    fraction: float
    labels: np.ndarray


def noisy_label_variants(labels, fractions, seed):
    """Shuffle ``round(fraction * n)`` randomly chosen labels among themselves, per fraction."""
    labels = np.asarray(labels)
    n = len(labels)
    out = []
    for i, frac in enumerate(fractions):
        if not 0.0 <= frac <= 1.0:
            raise ValueError(f"fraction {frac} outside [0, 1]")
        rng = np.random.default_rng(derive_seed(seed, i))
        m = round_half_up(frac * n)
        new = labels.copy()
        if m > 1:
            pos = rng.choice(n, size=m, replace=False)
            new[pos] = labels[pos][rng.permutation(m)]
        out.append(NoisyLabelVariant(float(frac), new))
    return out


def _log_density(P, mean, cov):
    cov = np.asarray(cov, dtype=float)
    L = np.linalg.cholesky(cov)
    z = np.linalg.solve(L, (P - mean).T)
    return -0.5 * np.sum(z * z, axis=0) - np.log(np.diag(L)).sum()


def bayes_separability(spec, samples=20000, seed=0):
    """Objective stand-in for a visual separability judgment of the 2-D cluster plane.

    Monte-Carlo accuracy of the Bayes-optimal classifier of the two Gaussians,
    rescaled so that the majority-class rate maps to 0 and perfect accuracy to 1.
    """
    rng = make_rng(seed)
    p = spec.proportion
    n_a = int(rng.binomial(samples, p))
    mean_b = np.array([spec.mean_distance, 0.0])
    A = rng.standard_normal((n_a, 2)) @ np.linalg.cholesky(np.asarray(spec.cov_a)).T
    B = rng.standard_normal((samples - n_a, 2)) @ np.linalg.cholesky(np.asarray(spec.cov_b)).T + mean_b
    P = np.vstack([A, B])
    truth = np.repeat([0, 1], [n_a, samples - n_a])
    score_a = np.log(p) + _log_density(P, np.zeros(2), spec.cov_a)
    score_b = np.log(1 - p) + _log_density(P, mean_b, spec.cov_b)
    acc = float(np.mean((score_b > score_a) == truth))
    chance = max(p, 1 - p)
    return float(min(1.0, max(0.0, (acc - chance) / (1 - chance))))
