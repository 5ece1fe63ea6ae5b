import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from clmeval import adjusted
from clmeval.adjusted import (
    CORES,
    MeasureConfig,
    ch_core,
    db_core,
    dunn_core,
    ii_core,
    prepare,
    sc_core,
    shifted_evaluation,
    xb_core,
)
from clmeval.errors import ClassTooSmall, CLMError, DegenerateError

from conftest import blobs, labeled_data

E5 = math.exp(5.0)


def test_hand_cores(toy):
    X, labels = toy
    assert ch_core(X, labels) == pytest.approx(5 * E5, rel=1e-12)
    assert ii_core(X, labels) == pytest.approx(10 * E5, rel=1e-12)
    assert xb_core(X, labels) == pytest.approx(20 * E5, rel=1e-12)
    assert db_core(X, labels) == pytest.approx(10 * E5, rel=1e-12)
    assert dunn_core(X, labels) == pytest.approx(math.exp(18.0), rel=1e-9)
    sc1 = 1 - (math.exp(-19.0) + math.exp(-17.0)) / 2
    assert sc_core(X, labels) == pytest.approx(sc1, rel=1e-12)


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("core,oracle", [(ch_core, oracles.ch3), (ii_core, oracles.ii1),
                                         (xb_core, oracles.xb3), (db_core, oracles.db3),
                                         (dunn_core, oracles.di2), (sc_core, oracles.sc1)])
def test_cores_match_brute_force(core, oracle, seed):
    X, labels = blobs(seed, sizes=[5, 8, 6], dim=2, spread=1.5)
    X = X / 4.0  # keep the exponentials in range for the oracle
    assert core(X, labels) == pytest.approx(oracle(X, labels), rel=1e-8)


def test_xb_core_is_twice_ii_core_on_two_classes():
    for seed in range(10):
        X, labels = blobs(seed, dim=2)
        assert xb_core(X, labels) == pytest.approx(2 * ii_core(X, labels), rel=1e-12)


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("name,core", [("ch_a", oracles.ch3), ("iixb_a", oracles.ii1),
                                       ("db_a", oracles.db3)])
def test_closed_form_scores_match_pairwise_oracle(name, core, seed):
    X, labels = blobs(seed, sizes=[5, 6, 7], dim=2, spread=1.0)
    X = X / 5.0
    k = 0.3
    expected = oracles.pairwise(core, X, labels, k=k)
    got = adjusted.ADJUSTED[name](X, labels, MeasureConfig(k=k))
    assert got == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_sc_adjusted_is_pairwise_mean_of_sc1():
    X, labels = blobs(3, sizes=[5, 6, 7], dim=2, spread=1.0)
    expected = oracles.pairwise(oracles.sc1, X, labels, logistic=False)
    assert adjusted.sc_adjusted(X, labels) == pytest.approx(expected, rel=1e-9)


def test_two_class_input_is_its_own_pair(toy):
    X, labels = toy
    s = adjusted.ch_adjusted(X, labels)
    assert s == pytest.approx(math.tanh(5 * E5 / 2))


def test_dunn_geometric_median_worst_case_matches_oracle():
    X, labels = blobs(4, sizes=[6, 5], dim=2, spread=2.0)
    prep = prepare("di_a", X, labels, MeasureConfig())
    pc = prep.pairs[0]
    core, idx = oracles.geometric_median_split_core(X)
    assert pc.info["median_index"] == idx
    assert pc.worst[0] == pytest.approx(core, rel=1e-9)


def test_monte_carlo_needs_seed_and_is_deterministic():
    X, labels = blobs(1)
    with pytest.raises(ValueError):
        MeasureConfig(min_mode="monte_carlo").resolve_min_mode("ch_a")
    cfg = MeasureConfig(min_mode="monte_carlo", seed=11, T=30)
    assert adjusted.ch_adjusted(X, labels, cfg) == adjusted.ch_adjusted(X, labels, cfg)
    assert adjusted.dunn_adjusted(X, labels, cfg) == adjusted.dunn_adjusted(X, labels, cfg)


def test_invalid_mode_combinations():
    with pytest.raises(ValueError):
        MeasureConfig(min_mode="closed_form").resolve_min_mode("di_a")
    with pytest.raises(ValueError):
        MeasureConfig(min_mode="geometric_median").resolve_min_mode("ch_a")
    with pytest.raises(ValueError):
        MeasureConfig(k=0.0)
    with pytest.raises(ValueError):
        MeasureConfig(agg="median")


def test_error_names_failing_pair():
    X = np.array([[0.0], [1.0], [5.0], [6.0], [9.0]])
    labels = np.array(["a", "a", "b", "b", "c"])
    with pytest.raises(ClassTooSmall) as info:
        adjusted.dunn_adjusted(X, labels)
    assert "'c'" in str(info.value)
    # CH_A handles the singleton but not coincident pair centroids
    Y = np.array([[0.0], [2.0], [0.0], [2.0], [9.0], [10.0]])
    with pytest.raises(DegenerateError) as info:
        adjusted.db_adjusted(Y, np.array(["a", "a", "b", "b", "c", "c"]))
    assert info.value.pair == ("a", "b")


def test_aggregation_modes():
    X, labels = blobs(5, n_classes=4, spread=2.0)
    rows = prepare("ch_a", X, labels).breakdown(1.0)
    scores = [r["score"] for r in rows]
    assert [(r["class_a"], r["class_b"]) for r in rows] == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    for agg, fn in (("avg", np.mean), ("min", np.min), ("max", np.max)):
        assert adjusted.ch_adjusted(X, labels, MeasureConfig(agg=agg)) == pytest.approx(fn(scores))


def test_clamping_is_recorded():
    # shuffled labels of well separated data beat the real labelling for MC
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 2))
    labels = np.array([0, 1] * 20)
    cfg = MeasureConfig(min_mode="monte_carlo", seed=3, T=50)
    rows = prepare("ch_a", X, labels, cfg).breakdown(1.0)
    assert all(r["score"] >= 0.0 for r in rows)
    assert all((r["score"] == 0.0) == r["clamped"] for r in rows)


# ----------------------------------------------------------------- properties

_CORE_FNS = [ch_core, ii_core, xb_core, db_core, dunn_core, sc_core]


# shifts far above the data scale lose digits to cancellation, so scales stay >= 1
@given(labeled_data(scales=(1.0, 10.0, 1e3)), st.sampled_from([0.1, 1.0, 100.0]))
def test_cores_shift_invariant(data, beta):
    X, labels = data
    for core in _CORE_FNS:
        try:
            v = core(X, labels)
        except DegenerateError:
            continue
        assert shifted_evaluation(core, X, labels, beta) == pytest.approx(v, rel=1e-9, abs=1e-300)


@given(labeled_data(), st.floats(1e-3, 1e3))
def test_adjusted_scale_invariant(data, lam):
    X, labels = data
    for name, fn in adjusted.ADJUSTED.items():
        try:
            v = fn(X, labels)
        except CLMError:
            continue
        assert fn(X * lam, labels) == pytest.approx(v, rel=1e-6, abs=1e-9), name


@given(labeled_data())
def test_adjusted_ranges(data):
    X, labels = data
    for name, fn in adjusted.ADJUSTED.items():
        try:
            v = fn(X, labels)
        except CLMError:
            continue
        lo = -1.0 if name == "sc_a" else 0.0
        assert lo <= v <= 1.0, name


@given(labeled_data(), st.floats(0.01, 10.0), st.floats(1.01, 5.0))
def test_score_monotone_in_k(data, k, factor):
    X, labels = data
    for kind in ("ch_a", "iixb_a", "db_a", "di_a"):
        try:
            prep = prepare(kind, X, labels)
        except CLMError:
            continue
        for pc in prep.pairs:
            assert pc.score(k * factor)[0] >= pc.score(k)[0] - 1e-12


@given(labeled_data(max_classes=3))
def test_isomorphism_invariance(data):
    X, labels = data
    rng = np.random.default_rng(1)
    perm = rng.permutation(len(labels))
    Q, _ = np.linalg.qr(rng.normal(size=(X.shape[1], X.shape[1])))
    Y = (X @ Q + 3.0)[perm]
    names = np.array(["z", "y", "x", "w"])[labels][perm]
    for name, fn in adjusted.ADJUSTED.items():
        try:
            v = fn(X, labels)
        except CLMError:
            continue
        assert fn(Y, names) == pytest.approx(v, rel=1e-6, abs=1e-9), name
