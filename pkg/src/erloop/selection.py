"""Labeling strategies: pick B pairs from the candidate pool each round.

Strategies: prediction-entropy uncertainty, uniform random, greedy
nearest-distance, bootstrap query-by-committee, confidence partitioning
(with optional auto-labeling of the high-confidence sets), and
gradient-embedding diversity via k-means++ seeding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .data import Label, LabelSource, LabelValue, PairId, RecordStore
from .errors import InsufficientLabelsError
from .matcher import (
    MatcherConfig,
    MatcherHead,
    pair_feature_matrix,
    predict_prob,
    train_head_on_pairs,
)

Strategy = Literal[
    "uncertainty", "random", "greedy", "qbc", "partition2", "partition4", "badge"
]

STRATEGIES: tuple[str, ...] = (
    "uncertainty",
    "random",
    "greedy",
    "qbc",
    "partition2",
    "partition4",
    "badge",
)


@dataclass
class SelectionConfig:
    strategy: Strategy = "uncertainty"
    budget: int = 128
    qbc_committee_size: int = 5

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")


@dataclass
class SelectionPool:
    """Eligible pairs: candidates minus already-labeled minus test pairs."""

    pairs: list[PairId]
    dists: np.ndarray  # aligned with pairs

    def __len__(self) -> int:
        return len(self.pairs)


def build_pool(
    cand: Sequence[tuple[PairId, float]],
    exclude: set[PairId],
) -> SelectionPool:
    """Filter a candidate list down to selectable pairs (order kept)."""
    pairs = []
    dists = []
    for pair, dist in cand:
        if pair not in exclude:
            pairs.append(pair)
            dists.append(dist)
    return SelectionPool(pairs=pairs, dists=np.array(dists))


def entropy(p: np.ndarray | float) -> np.ndarray | float:
    """Binary entropy in nats, symmetric around its maximum ln 2 at 0.5."""
    q = np.clip(np.asarray(p, dtype=np.float64), 1e-12, 1.0 - 1e-12)
    h = -q * np.log(q) - (1.0 - q) * np.log(1.0 - q)
    return float(h) if np.isscalar(p) else h


def _pool_probs(pool: SelectionPool, probs: dict[PairId, float]) -> np.ndarray:
    return np.array([probs[pair] for pair in pool.pairs])


def _pair_sort_keys(pairs: Sequence[PairId]) -> tuple[np.ndarray, np.ndarray]:
    return np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])


def select_uncertainty(
    pool: SelectionPool, probs: dict[PairId, float], budget: int
) -> list[PairId]:
    """Highest prediction entropy first; ties toward 0.5, then pair id."""
    p = _pool_probs(pool, probs)
    h = entropy(p)
    r, s = _pair_sort_keys(pool.pairs)
    order = np.lexsort((s, r, np.abs(p - 0.5), -h))[:budget]
    return [pool.pairs[i] for i in order]


def select_random(
    pool: SelectionPool, budget: int, rng: np.random.Generator
) -> list[PairId]:
    take = min(budget, len(pool))
    idx = rng.choice(len(pool), size=take, replace=False)
    return [pool.pairs[i] for i in idx]


def select_greedy(pool: SelectionPool, budget: int) -> list[PairId]:
    """Most similar (smallest retrieval distance) first."""
    r, s = _pair_sort_keys(pool.pairs)
    order = np.lexsort((s, r, pool.dists))[:budget]
    return [pool.pairs[i] for i in order]


def qbc_mean_probs(
    pool: SelectionPool,
    labeled_pairs: Sequence[PairId],
    labels: np.ndarray,
    emb_r: np.ndarray,
    emb_s: np.ndarray,
    store_r: RecordStore,
    store_s: RecordStore,
    matcher_cfg: MatcherConfig,
    committee_size: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Mean duplicate probability over bootstrap-trained matcher heads.

    Each head trains on a resample of the labeled set (same size, with
    replacement, re-drawn until both classes are present).
    """
    if not np.any(labels == 1) or not np.any(labels == 0):
        raise InsufficientLabelsError("bootstrap committee needs both classes")
    n = len(labeled_pairs)
    x_pool = pair_feature_matrix(pool.pairs, emb_r, emb_s, store_r, store_s)
    acc = np.zeros(len(pool))
    for _ in range(committee_size):
        while True:
            idx = rng.choice(n, size=n, replace=True)
            yb = labels[idx]
            if np.any(yb == 1) and np.any(yb == 0):
                break
        head = train_head_on_pairs(
            [labeled_pairs[i] for i in idx],
            yb,
            emb_r,
            emb_s,
            store_r,
            store_s,
            matcher_cfg,
            rng,
        )
        acc += predict_prob(x_pool, head)
    return acc / committee_size


def vote_variance(member_probs: np.ndarray) -> np.ndarray:
    """Hard-vote disagreement q(1-q), q = fraction of members voting 1.

    Kept alongside the soft entropy measure for comparison; maximal 0.25
    at an even split.
    """
    votes = (np.asarray(member_probs) > 0.5).mean(axis=0)
    return votes * (1.0 - votes)


def select_qbc(
    pool: SelectionPool,
    labeled_pairs: Sequence[PairId],
    labels: np.ndarray,
    emb_r: np.ndarray,
    emb_s: np.ndarray,
    store_r: RecordStore,
    store_s: RecordStore,
    matcher_cfg: MatcherConfig,
    budget: int,
    committee_size: int,
    rng: np.random.Generator,
) -> list[PairId]:
    """Entropy of the bootstrap committee's mean probability, descending."""
    mean_p = qbc_mean_probs(
        pool,
        labeled_pairs,
        labels,
        emb_r,
        emb_s,
        store_r,
        store_s,
        matcher_cfg,
        committee_size,
        rng,
    )
    h = entropy(mean_p)
    r, s = _pair_sort_keys(pool.pairs)
    order = np.lexsort((s, r, np.abs(mean_p - 0.5), -h))[:budget]
    return [pool.pairs[i] for i in order]


def select_partition(
    pool: SelectionPool,
    probs: dict[PairId, float],
    budget: int,
    variant: int,
) -> tuple[list[PairId], list[tuple[PairId, Label]]]:
    """Confidence-partitioned selection.

    The pool splits into predicted positives (p > 0.5) and negatives;
    each side ranks by entropy.  Variant 2 queries the least-confident
    half-budget per side and auto-labels the most-confident
    quarter-budget per side; variant 4 queries a quarter-budget from all
    four sets.  Shortfalls on one side are filled from the other; the
    human budget never exceeds ``budget``.
    """
    if variant not in (2, 4):
        raise ValueError("variant must be 2 or 4")
    p = _pool_probs(pool, probs)
    h = entropy(p)
    r, s = _pair_sort_keys(pool.pairs)
    pos_mask = p > 0.5

    def side_order(mask: np.ndarray, most_uncertain_first: bool) -> list[int]:
        idx = np.flatnonzero(mask)
        if idx.size == 0:
            return []
        key = -h[idx] if most_uncertain_first else h[idx]
        return [int(idx[i]) for i in np.lexsort((s[idx], r[idx], key))]

    half = -(-budget // 2)
    quarter = -(-budget // 4)
    lc_pos = side_order(pos_mask, True)
    lc_neg = side_order(~pos_mask, True)

    def interleave(a: list[int], b: list[int]) -> list[int]:
        out = []
        for i in range(max(len(a), len(b))):
            if i < len(a):
                out.append(a[i])
            if i < len(b):
                out.append(b[i])
        return out

    chosen: list[int] = []
    if variant == 2:
        chosen = interleave(lc_pos[:half], lc_neg[:half])
    else:
        hc_pos = side_order(pos_mask, False)
        hc_neg = side_order(~pos_mask, False)
        # quota pick from each set in turn, skipping already-chosen
        taken: set[int] = set()
        for ranked in (lc_pos, lc_neg, hc_pos, hc_neg):
            got = 0
            for i in ranked:
                if got >= quarter:
                    break
                if i not in taken:
                    taken.add(i)
                    chosen.append(i)
                    got += 1
    # fill shortfall from remaining pool, most uncertain first
    if len(chosen) < min(budget, len(pool)):
        taken = set(chosen)
        rest = [i for i in np.lexsort((s, r, -h)) if i not in taken]
        chosen += rest[: min(budget, len(pool)) - len(chosen)]
    chosen = chosen[:budget]

    auto: list[tuple[PairId, Label]] = []
    if variant == 2:
        taken = set(chosen)
        hc_pos = [i for i in side_order(pos_mask, False) if i not in taken][:quarter]
        hc_neg = [i for i in side_order(~pos_mask, False) if i not in taken][:quarter]
        for i in hc_pos:
            auto.append(
                (pool.pairs[i], Label(LabelValue.DUPLICATE, LabelSource.HIGH_CONFIDENCE_AUTO))
            )
        for i in hc_neg:
            auto.append(
                (pool.pairs[i], Label(LabelValue.NON_DUPLICATE, LabelSource.HIGH_CONFIDENCE_AUTO))
            )
    return [pool.pairs[i] for i in chosen], auto


def badge_embeddings(x: np.ndarray, head: MatcherHead) -> np.ndarray:
    """Hallucinated last-layer gradient embedding per pair feature row.

    With predicted label ``y_hat = [p > 0.5]`` the binary cross-entropy
    gradient with respect to (w2, b2) is ``(p - y_hat) * [tanh(W1 x + b1); 1]``.
    """
    a = np.tanh(x @ head.W1.T + head.b1)
    p = np.asarray(predict_prob(x, head))
    factor = p - (p > 0.5)
    return factor[:, None] * np.concatenate([a, np.ones((len(a), 1))], axis=1)


def kmeanspp_seed(
    points: np.ndarray, n_seeds: int, rng: np.random.Generator
) -> np.ndarray:
    """k-means++ seeding: D^2-weighted sampling of min(n_seeds, n) indices.

    When every remaining squared distance is zero (duplicate points),
    the next seed is drawn uniformly from the unchosen points.
    """
    n = len(points)
    if n < 1:
        raise ValueError("kmeanspp_seed needs at least one point")
    n_seeds = min(n_seeds, n)
    chosen = np.empty(n_seeds, dtype=np.intp)
    picked = np.zeros(n, dtype=bool)
    first = int(rng.integers(n))
    chosen[0] = first
    picked[first] = True
    d2 = np.sum((points - points[first]) ** 2, axis=1)
    for j in range(1, n_seeds):
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            unpicked = np.flatnonzero(~picked)
            idx = int(unpicked[rng.integers(len(unpicked))])
        chosen[j] = idx
        picked[idx] = True
        d2 = np.minimum(d2, np.sum((points - points[idx]) ** 2, axis=1))
    return chosen


def select_badge(
    pool: SelectionPool,
    head: MatcherHead,
    emb_r: np.ndarray,
    emb_s: np.ndarray,
    store_r: RecordStore,
    store_s: RecordStore,
    budget: int,
    rng: np.random.Generator,
) -> list[PairId]:
    """Diverse selection: k-means++ seeds over gradient embeddings."""
    if len(pool) <= budget:
        return list(pool.pairs)
    x = pair_feature_matrix(pool.pairs, emb_r, emb_s, store_r, store_s)
    g = badge_embeddings(x, head)
    seeds = kmeanspp_seed(g, budget, rng)
    return [pool.pairs[i] for i in seeds]
