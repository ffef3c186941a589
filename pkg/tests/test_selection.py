"""Example-selection strategies against independent rankings."""

import numpy as np
import pytest

from erloop.data import LabelSource, LabelValue, Record, RecordStore, Side
from erloop.errors import InsufficientLabelsError
from erloop.matcher import MatcherConfig, init_head, pair_feature_matrix, predict_prob
from erloop.selection import (
    SelectionConfig,
    SelectionPool,
    badge_embeddings,
    build_pool,
    entropy,
    kmeanspp_seed,
    qbc_mean_probs,
    select_badge,
    select_greedy,
    select_partition,
    select_qbc,
    select_random,
    select_uncertainty,
    vote_variance,
)


def _pool(pairs, dists=None):
    if dists is None:
        dists = np.zeros(len(pairs))
    return SelectionPool(pairs=list(pairs), dists=np.asarray(dists, dtype=float))


def test_config_validation():
    with pytest.raises(ValueError):
        SelectionConfig(budget=0)
    with pytest.raises(ValueError):
        SelectionConfig(strategy="nope")


def test_build_pool_filters_and_keeps_order():
    cand = [((0, 0), 0.1), ((1, 1), 0.2), ((2, 2), 0.3), ((3, 3), 0.4)]
    pool = build_pool(cand, exclude={(1, 1), (3, 3)})
    assert pool.pairs == [(0, 0), (2, 2)]
    np.testing.assert_allclose(pool.dists, [0.1, 0.3])


def test_entropy_shape_and_extremes():
    assert entropy(0.5) == pytest.approx(np.log(2))
    assert entropy(0.2) == pytest.approx(entropy(0.8))
    assert entropy(0.0) < 1e-10
    arr = entropy(np.array([0.5, 0.9]))
    assert arr.shape == (2,) and arr[0] > arr[1]


def test_uncertainty_ranks_by_entropy_with_id_ties():
    pairs = [(0, 0), (1, 1), (2, 2), (3, 3), (4, 4)]
    probs = {(0, 0): 0.9, (1, 1): 0.5, (2, 2): 0.7, (3, 3): 0.3, (4, 4): 0.1}
    # entropy order: (1,1) first; then the 0.3/0.7 tie resolved by pair id
    # ((2,2) before (3,3)); then the 0.1/0.9 tie ((0,0) before (4,4)).
    got = select_uncertainty(_pool(pairs), probs, budget=5)
    assert got == [(1, 1), (2, 2), (3, 3), (0, 0), (4, 4)]
    assert select_uncertainty(_pool(pairs), probs, budget=2) == [(1, 1), (2, 2)]


def test_random_selection_is_seeded_sampling():
    pairs = [(i, i) for i in range(20)]
    a = select_random(_pool(pairs), 5, np.random.default_rng(3))
    b = select_random(_pool(pairs), 5, np.random.default_rng(3))
    assert a == b
    assert len(set(a)) == 5 and set(a) <= set(pairs)
    assert len(select_random(_pool(pairs[:3]), 10, np.random.default_rng(0))) == 3


def test_greedy_takes_smallest_distances():
    pairs = [(0, 0), (1, 1), (2, 2), (3, 3)]
    got = select_greedy(_pool(pairs, [0.4, 0.1, 0.4, 0.05]), budget=3)
    assert got == [(3, 3), (1, 1), (0, 0)]  # 0.4 tie -> lower pair id


def test_vote_variance_hand_case():
    member_probs = np.array([[0.9, 0.1], [0.8, 0.9], [0.2, 0.3], [0.6, 0.2]])
    np.testing.assert_allclose(vote_variance(member_probs), [0.75 * 0.25, 0.25 * 0.75])


def _toy(rng, n=24, d=4):
    emb_r = rng.standard_normal((n, d))
    emb_s = emb_r + 0.05 * rng.standard_normal((n, d))
    recs = lambda side: [
        Record(id=i, attributes=(("name", f"{side.value}{i}"),)) for i in range(n)
    ]
    store_r = RecordStore(side=Side.R, schema=("name",), records=recs(Side.R))
    store_s = RecordStore(side=Side.S, schema=("name",), records=recs(Side.S))
    return emb_r, emb_s, store_r, store_s


def test_qbc_mean_probs_are_probabilities(rng):
    emb_r, emb_s, store_r, store_s = _toy(rng)
    labeled = [(i, i) for i in range(6)] + [(i, (i + 3) % 24) for i in range(6, 12)]
    labels = np.array([1.0] * 6 + [0.0] * 6)
    pool = _pool([(i, (i + 1) % 24) for i in range(12, 20)])
    mean_p = qbc_mean_probs(
        pool, labeled, labels, emb_r, emb_s, store_r, store_s,
        MatcherConfig(epochs=2), committee_size=3, rng=rng,
    )
    assert mean_p.shape == (8,)
    assert np.all((mean_p > 0) & (mean_p < 1))


def test_qbc_requires_both_classes(rng):
    emb_r, emb_s, store_r, store_s = _toy(rng, n=6)
    with pytest.raises(InsufficientLabelsError):
        qbc_mean_probs(
            _pool([(0, 1)]), [(0, 0), (1, 1)], np.array([1.0, 1.0]),
            emb_r, emb_s, store_r, store_s, MatcherConfig(), 2, rng,
        )


def test_select_qbc_returns_budget_pairs(rng):
    emb_r, emb_s, store_r, store_s = _toy(rng)
    labeled = [(i, i) for i in range(6)] + [(i, (i + 3) % 24) for i in range(6, 12)]
    labels = np.array([1.0] * 6 + [0.0] * 6)
    pool = _pool([(i, (i + 1) % 24) for i in range(12, 22)])
    got = select_qbc(
        pool, labeled, labels, emb_r, emb_s, store_r, store_s,
        MatcherConfig(epochs=2), budget=4, committee_size=2, rng=rng,
    )
    assert len(got) == 4 and len(set(got)) == 4
    assert set(got) <= set(pool.pairs)


def _partition_fixture():
    """Six confident positives, six confident negatives, four uncertain."""
    pairs, probs = [], {}
    for i in range(6):
        pairs.append((i, i)); probs[(i, i)] = 0.93 + 0.01 * i
    for i in range(6, 12):
        pairs.append((i, i)); probs[(i, i)] = 0.07 - 0.01 * (i - 6)
    for i in range(12, 16):
        pairs.append((i, i)); probs[(i, i)] = 0.45 + 0.02 * (i - 12)
    return _pool(pairs), probs


def test_partition2_interleaves_least_confident_sides():
    pool, probs = _partition_fixture()
    chosen, auto = select_partition(pool, probs, budget=4, variant=2)
    # Predicted positive means p > 0.5, so the uncertain band splits into
    # one positive (0.51) and three negatives (0.49, 0.47, 0.45).
    # Least confident positives: (15,15) p=0.51 then (0,0) p=0.93;
    # least confident negatives: (14,14) p=0.49 then (13,13) p=0.47.
    assert chosen == [(15, 15), (14, 14), (0, 0), (13, 13)]
    auto_by_label = {}
    for pair, label in auto:
        auto_by_label.setdefault(label.value, []).append(pair)
    # Most confident per side, ceil(4/4)=1 each, disjoint from chosen.
    assert auto_by_label[LabelValue.DUPLICATE] == [(5, 5)]
    assert auto_by_label[LabelValue.NON_DUPLICATE] == [(11, 11)]
    assert all(lab.source is LabelSource.HIGH_CONFIDENCE_AUTO for _, lab in auto)
    assert not (set(p for p, _ in auto) & set(chosen))


def test_partition2_fills_shortfall_from_the_other_side():
    pairs = [(i, i) for i in range(5)]
    probs = {p: 0.1 + 0.05 * i for i, p in enumerate(pairs)}  # all predicted negative
    chosen, _ = select_partition(_pool(pairs), probs, budget=4, variant=2)
    assert len(chosen) == 4  # half-budget side quota backfilled to the full budget


def test_partition4_queries_all_four_bands():
    pool, probs = _partition_fixture()
    chosen, auto = select_partition(pool, probs, budget=8, variant=4)
    assert auto == []  # variant 4 never auto-labels
    assert len(chosen) == 8 and len(set(chosen)) == 8
    # Quarter-budget (2) from each band: least/most confident per side.
    assert {(15, 15), (0, 0)} <= set(chosen)    # least-confident positives
    assert {(14, 14), (13, 13)} <= set(chosen)  # least-confident negatives
    assert {(5, 5), (4, 4)} <= set(chosen)      # most-confident positives
    assert {(11, 11), (10, 10)} <= set(chosen)  # most-confident negatives


def test_partition_budget_is_never_exceeded():
    pool, probs = _partition_fixture()
    for variant in (2, 4):
        chosen, _ = select_partition(pool, probs, budget=3, variant=variant)
        assert len(chosen) == 3


def test_partition_rejects_unknown_variant():
    pool, probs = _partition_fixture()
    with pytest.raises(ValueError):
        select_partition(pool, probs, budget=4, variant=3)


def test_badge_embeddings_oracle(rng):
    head = init_head(in_dim=8, hidden=3, rng=rng)
    x = rng.standard_normal((5, 8))
    g = badge_embeddings(x, head)
    a = np.tanh(x @ head.W1.T + head.b1)
    p = predict_prob(x, head)
    expected = (p - (p > 0.5))[:, None] * np.concatenate([a, np.ones((5, 1))], axis=1)
    np.testing.assert_allclose(g, expected, atol=1e-12)
    assert g.shape == (5, 4)  # hidden + bias column


def test_kmeanspp_seed_properties(rng):
    points = rng.standard_normal((30, 4))
    seeds = kmeanspp_seed(points, 10, np.random.default_rng(1))
    assert len(seeds) == 10 and len(set(seeds.tolist())) == 10
    again = kmeanspp_seed(points, 10, np.random.default_rng(1))
    np.testing.assert_array_equal(seeds, again)
    assert len(kmeanspp_seed(points, 50, rng)) == 30  # capped at n


def test_kmeanspp_spreads_across_clusters(rng):
    a = rng.standard_normal((20, 3))
    b = rng.standard_normal((20, 3)) + 100.0
    points = np.vstack([a, b])
    seeds = kmeanspp_seed(points, 2, np.random.default_rng(5))
    sides = {int(s) // 20 for s in seeds}
    assert sides == {0, 1}


def test_kmeanspp_identical_points_fall_back_to_uniform():
    points = np.ones((6, 2))
    seeds = kmeanspp_seed(points, 4, np.random.default_rng(0))
    assert len(set(seeds.tolist())) == 4  # distinct despite zero distances


def test_kmeanspp_needs_a_point():
    with pytest.raises(ValueError):
        kmeanspp_seed(np.zeros((0, 2)), 1, np.random.default_rng(0))


def test_select_badge_small_pool_returns_everything(rng):
    emb_r, emb_s, store_r, store_s = _toy(rng)
    head = init_head(in_dim=4 * emb_r.shape[1], hidden=3, rng=rng)
    pool = _pool([(0, 0), (1, 1)])
    assert select_badge(pool, head, emb_r, emb_s, store_r, store_s, 5, rng) == pool.pairs


def test_select_badge_picks_budget_distinct_pairs(rng):
    emb_r, emb_s, store_r, store_s = _toy(rng)
    head = init_head(in_dim=4 * emb_r.shape[1], hidden=3, rng=rng)
    pool = _pool([(i, (i + 1) % 24) for i in range(20)])
    got = select_badge(pool, head, emb_r, emb_s, store_r, store_s, 6, rng)
    assert len(got) == 6 and len(set(got)) == 6
    assert set(got) <= set(pool.pairs)
