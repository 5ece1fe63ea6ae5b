import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clmeval.adjusted import ch_adjusted
from clmeval.errors import DegenerateError, DegenerateRanks
from clmeval.harness import (
    ScoreTable,
    SweepConfig,
    ablation_errors,
    ablation_sweep,
    default_levels,
    improve_clm,
    noisy_label_ranking,
    rank_stability,
    random_masks,
    smape,
    spearman,
)

from conftest import blobs


def test_smape_examples():
    assert smape([1], [3]) == 0.5
    assert smape([0], [0]) == 0.0
    assert smape([2, 5], [2, 5]) == 0.0


@given(st.lists(st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6)), min_size=1, max_size=20))
def test_smape_symmetric_bounded(pairs):
    F, G = zip(*pairs)
    assert smape(F, G) == pytest.approx(smape(G, F))
    assert 0.0 <= smape(F, G) <= 1.0


def test_spearman_examples():
    assert spearman([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5)
    assert spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    with pytest.raises(DegenerateRanks):
        spearman([1, 1, 1], [1, 2, 3])


@given(st.lists(st.integers(-100, 100), min_size=3, max_size=15, unique=True))
def test_spearman_monotone_invariance(a):
    b = list(range(len(a)))
    assert spearman(np.exp(np.array(a) / 50), b) == pytest.approx(spearman(a, b))


def test_default_levels():
    assert default_levels("cardinality") == tuple(range(500, 1001, 50))
    assert default_levels("dimensionality") == (2, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100)
    with pytest.raises(ValueError):
        SweepConfig(axis="cardinality", levels=(3, 2))


def test_ablation_errors_symmetric_zero_diagonal():
    scores = np.random.default_rng(0).random((10, 4))
    E = ablation_errors(scores)
    assert np.allclose(E, E.T) and np.all(np.diag(E) == 0)
    assert np.all(ablation_errors(np.full((5, 3), 0.7)) == 0)


def _constant(X, labels):
    return 0.7


def test_ablation_sweep_small_and_parallel_agree():
    cfg = SweepConfig(axis="dimensionality", base_count=3, seed=4, base_n=80, base_dim=20)
    variants = {"const": _constant, "ch_a": ch_adjusted}
    serial = ablation_sweep(variants, cfg)
    parallel = ablation_sweep(variants, cfg, workers=2)
    assert serial.averages["const"] == 0.0
    assert np.array_equal(serial.scores["ch_a"], parallel.scores["ch_a"])
    assert serial.to_dict()["levels"] == list(cfg.levels)


def test_ablation_error_names_variant():
    def broken(X, labels):
        raise DegenerateError("boom")

    cfg = SweepConfig(axis="cardinality", base_count=2, base_n=60, base_dim=5)
    with pytest.raises(DegenerateError, match="variant broken, level"):
        ablation_sweep({"broken": broken}, cfg)


def test_noisy_label_ranking():
    X, labels = blobs(0, sizes=[100, 100], dim=2, spread=6.0)
    assert noisy_label_ranking(X, labels, ch_adjusted, seed=1) >= 0.9
    with pytest.raises(DegenerateRanks):
        noisy_label_ranking(X, labels, ch_adjusted, fractions=[0.5])
    with pytest.raises(DegenerateRanks):
        noisy_label_ranking(X, labels, _constant)


def test_rank_stability_contract():
    rng = np.random.default_rng(0)
    base = rng.random(30)
    values = np.column_stack([base + 0.1, base, rng.random(30), base])
    P = rank_stability(ScoreTable([f"d{i}" for i in range(30)], list("ABCD"), values), 10, 200, 5)
    assert P[0, 1] == 1.0
    assert P[1, 3] == 1.0  # identical columns never win strictly
    assert np.allclose(P, P.T) and np.all((P >= 0.5) & (P <= 1.0))
    assert np.array_equal(P, rank_stability(values, 10, 200, 5))
    with pytest.raises(ValueError):
        rank_stability(values, 31, 10, 0)


def test_random_masks_nonempty():
    masks = random_masks(3, 500, np.random.default_rng(0))
    assert masks.any(axis=1).all()


def test_improve_never_worse_and_deterministic():
    X, labels = blobs(2, sizes=[40, 40], dim=2, spread=2.0)
    noise = np.random.default_rng(1).normal(scale=3.0, size=(80, 8))
    Y = np.hstack([X, noise])
    a = improve_clm(Y, labels, ch_adjusted, 100, seed=3)
    b = improve_clm(Y, labels, ch_adjusted, 100, seed=3)
    assert a.score >= a.original_score
    assert np.array_equal(a.mask, b.mask) and a.score == b.score
    with pytest.raises(Exception):
        improve_clm(X[:, :1], labels, ch_adjusted, 10)
