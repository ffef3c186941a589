"""Matcher head: features, scoring, analytic gradients, training, storage."""

import numpy as np
import pytest

from erloop.data import (
    Label,
    LabeledSet,
    LabelSource,
    LabelValue,
    Record,
    RecordStore,
    Side,
)
from erloop.errors import CheckpointError, InsufficientLabelsError
from erloop.matcher import (
    MatcherConfig,
    init_head,
    load_matcher,
    matcher_loss_and_grads,
    paired_features,
    predict_all,
    predict_prob,
    save_matcher,
    score,
    train_head_on_pairs,
    train_matcher,
)
from erloop.optim import check_gradient


def test_paired_features_hand_case():
    e_r = np.array([1.0, -2.0])
    e_s = np.array([3.0, 2.0])
    np.testing.assert_allclose(
        paired_features(e_r, e_s),
        [1.0, -2.0, 3.0, 2.0, 2.0, 4.0, 3.0, -4.0],
    )


def test_paired_features_batch_matches_single(rng):
    e_r = rng.standard_normal((5, 3))
    e_s = rng.standard_normal((5, 3))
    batch = paired_features(e_r, e_s)
    assert batch.shape == (5, 12)
    for i in range(5):
        np.testing.assert_allclose(batch[i], paired_features(e_r[i], e_s[i]))


def test_score_matches_reference(rng):
    head = init_head(in_dim=6, hidden=4, rng=rng)
    x = rng.standard_normal(6)
    expected = np.tanh(head.W1 @ x + head.b1) @ head.w2 + head.b2
    assert score(x, head) == pytest.approx(expected)


def test_predict_prob_is_clamped_sigmoid(rng):
    head = init_head(in_dim=4, hidden=3, rng=rng)
    head.b2 = 100.0  # saturate
    p = predict_prob(np.zeros(4), head)
    assert 0.0 < p < 1.0
    head.b2 = -100.0
    assert 0.0 < predict_prob(np.zeros(4), head) < 1.0


def test_loss_hand_case_single_example():
    # One positive scored f: loss must be log(1 + exp(-f)).
    params = {
        "W1": np.zeros((2, 3)),
        "b1": np.array([np.arctanh(0.5), 0.0]),
        "w2": np.array([2.0, 0.0]),
        "b2": np.array([0.25]),
    }
    f = 0.5 * 2.0 + 0.25
    loss, _ = matcher_loss_and_grads(np.zeros((1, 3)), np.array([1.0]), params)
    assert loss == pytest.approx(np.log1p(np.exp(-f)))
    loss0, _ = matcher_loss_and_grads(np.zeros((1, 3)), np.array([0.0]), params)
    assert loss0 == pytest.approx(np.log1p(np.exp(f)))


def test_loss_gradients_pass_finite_difference(rng):
    for _ in range(5):
        m, d = int(rng.integers(2, 7)), int(rng.integers(2, 5))
        hidden = int(rng.integers(2, 5))
        x = rng.standard_normal((m, d))
        y = (rng.random(m) < 0.5).astype(float)
        head = init_head(in_dim=d, hidden=hidden, rng=rng)
        err = check_gradient(
            lambda p: matcher_loss_and_grads(x, y, p), head.params(), rng
        )
        assert err < 1e-4


def _toy_stores(rng, n=30, d=4):
    """Two aligned stores plus separable embeddings: dups share a direction."""
    emb_r = rng.standard_normal((n, d))
    emb_s = emb_r + 0.05 * rng.standard_normal((n, d))
    records_r = [Record(id=i, attributes=(("name", f"r{i}"),)) for i in range(n)]
    records_s = [Record(id=i, attributes=(("name", f"s{i}"),)) for i in range(n)]
    store_r = RecordStore(side=Side.R, schema=("name",), records=records_r)
    store_s = RecordStore(side=Side.S, schema=("name",), records=records_s)
    return store_r, store_s, emb_r, emb_s


def test_training_separates_a_separable_problem(rng):
    store_r, store_s, emb_r, emb_s = _toy_stores(rng)
    pos = [(i, i) for i in range(15)]
    neg = [(i, (i + 7) % 30) for i in range(15, 30)]
    pairs = pos + neg
    y = np.array([1.0] * 15 + [0.0] * 15)
    cfg = MatcherConfig(epochs=60, lr=1e-2)
    head = train_head_on_pairs(pairs, y, emb_r, emb_s, store_r, store_s, cfg, rng)
    probs = predict_all(pairs, head, emb_r, emb_s, store_r, store_s)
    acc = np.mean([(probs[p] > 0.5) == bool(t) for p, t in zip(pairs, y)])
    assert acc >= 0.9


def test_training_requires_both_classes(rng):
    store_r, store_s, emb_r, emb_s = _toy_stores(rng, n=4)
    with pytest.raises(InsufficientLabelsError):
        train_head_on_pairs(
            [(0, 0), (1, 1)], np.array([1.0, 1.0]),
            emb_r, emb_s, store_r, store_s, MatcherConfig(), rng,
        )


def test_train_matcher_reads_labeled_set(rng):
    store_r, store_s, emb_r, emb_s = _toy_stores(rng, n=10)
    labeled = LabeledSet()
    for i in range(5):
        labeled.add((i, i), Label(LabelValue.DUPLICATE, LabelSource.SEED))
    for i in range(5, 10):
        labeled.add((i, (i + 3) % 10), Label(LabelValue.NON_DUPLICATE, LabelSource.SEED))
    head = train_matcher(labeled, emb_r, emb_s, store_r, store_s, MatcherConfig(epochs=5), rng)
    assert head.in_dim == 4 * emb_r.shape[1]


def test_training_is_deterministic_for_a_seed():
    rng_data = np.random.default_rng(4)
    store_r, store_s, emb_r, emb_s = _toy_stores(rng_data)
    pairs = [(i, i) for i in range(10)] + [(i, (i + 5) % 30) for i in range(10, 20)]
    y = np.array([1.0] * 10 + [0.0] * 10)
    cfg = MatcherConfig(epochs=3)
    heads = [
        train_head_on_pairs(
            pairs, y, emb_r, emb_s, store_r, store_s, cfg, np.random.default_rng(9)
        )
        for _ in range(2)
    ]
    np.testing.assert_array_equal(heads[0].W1, heads[1].W1)
    assert heads[0].b2 == heads[1].b2


def test_warm_start_continues_from_init(rng):
    store_r, store_s, emb_r, emb_s = _toy_stores(rng, n=10)
    pairs = [(i, i) for i in range(5)] + [(i, (i + 3) % 10) for i in range(5, 10)]
    y = np.array([1.0] * 5 + [0.0] * 5)
    cfg = MatcherConfig(epochs=1)
    first = train_head_on_pairs(pairs, y, emb_r, emb_s, store_r, store_s, cfg, rng)
    again = train_head_on_pairs(
        pairs, y, emb_r, emb_s, store_r, store_s, cfg, rng, init=first
    )
    assert again is not first
    assert not np.array_equal(again.W1, first.W1)  # continued, not re-initialized copy


def test_matcher_file_roundtrip(tmp_path, rng):
    head = init_head(in_dim=8, hidden=3, rng=rng)
    head.b2 = 0.75
    path = tmp_path / "matcher.bin"
    save_matcher(head, path)
    loaded = load_matcher(path)
    np.testing.assert_allclose(loaded.W1, head.W1, atol=1e-6)
    np.testing.assert_allclose(loaded.w2, head.w2, atol=1e-6)
    assert loaded.b2 == pytest.approx(head.b2, abs=1e-6)


def test_matcher_file_bad_magic(tmp_path):
    path = tmp_path / "matcher.bin"
    path.write_bytes(b"WRONGMAG" + b"\x00" * 32)
    with pytest.raises(CheckpointError):
        load_matcher(path)
