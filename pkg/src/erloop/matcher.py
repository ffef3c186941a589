"""Paired duplicate classifier.

A pair (r, s) is represented by the interaction features
``[E(r); E(s); |E(r)-E(s)|; E(r)*E(s)]`` and scored by a one-hidden-layer
head ``F(x) = w2 . tanh(W1 x + b1) + b2``; the duplicate probability is
``sigmoid(F)``.  Training minimizes the summed logistic cross-entropy
over the labeled set, with analytic gradients and AdamW.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import LabeledSet, PairId, RecordStore
from .errors import CheckpointError, InsufficientLabelsError
from .optim import AdamW, Params

MATCHER_MAGIC = b"DIALMCH1"

PROB_CLAMP = 1e-12


@dataclass
class MatcherConfig:
    hidden: int = 64
    epochs: int = 20
    batch_size: int = 16
    lr: float = 1e-3
    weight_decay: float = 0.01


@dataclass
class MatcherHead:
    """One-hidden-layer scorer; re-initialized fresh every training call."""

    W1: np.ndarray  # (h, 4d)
    b1: np.ndarray  # (h,)
    w2: np.ndarray  # (h,)
    b2: float

    @property
    def hidden(self) -> int:
        return self.W1.shape[0]

    @property
    def in_dim(self) -> int:
        return self.W1.shape[1]

    def params(self) -> Params:
        return {
            "W1": self.W1,
            "b1": self.b1,
            "w2": self.w2,
            "b2": np.array([self.b2]),
        }


def init_head(in_dim: int, hidden: int, rng: np.random.Generator) -> MatcherHead:
    """Fresh head: uniform fan-in weights, zero biases."""
    bound1 = 1.0 / np.sqrt(in_dim)
    bound2 = 1.0 / np.sqrt(hidden)
    return MatcherHead(
        W1=rng.uniform(-bound1, bound1, size=(hidden, in_dim)),
        b1=np.zeros(hidden),
        w2=rng.uniform(-bound2, bound2, size=hidden),
        b2=0.0,
    )


def paired_features(e_r: np.ndarray, e_s: np.ndarray) -> np.ndarray:
    """Interaction features for one pair or a batch of pairs.

    Accepts vectors of shape (d,) or matrices (m, d); returns (4d,) or
    (m, 4d): ``[e_r, e_s, |e_r - e_s|, e_r * e_s]`` along the last axis.
    """
    return np.concatenate([e_r, e_s, np.abs(e_r - e_s), e_r * e_s], axis=-1)


def score(x: np.ndarray, head: MatcherHead) -> np.ndarray | float:
    """F(x) for one feature vector or a batch (last axis = features)."""
    a = np.tanh(x @ head.W1.T + head.b1)
    return a @ head.w2 + head.b2


def predict_prob(x: np.ndarray, head: MatcherHead) -> np.ndarray | float:
    """sigmoid(F(x)) clamped away from {0, 1} so logs stay finite."""
    f = score(x, head)
    prob = 1.0 / (1.0 + np.exp(-np.asarray(f, dtype=np.float64)))
    clamped = np.clip(prob, PROB_CLAMP, 1.0 - PROB_CLAMP)
    return float(clamped) if np.isscalar(f) else clamped


def matcher_loss_and_grads(
    x: np.ndarray, y: np.ndarray, params: Params
) -> tuple[float, Params]:
    """Summed logistic loss over a batch and analytic parameter gradients.

    ``loss = sum_pos log(1+exp(-F)) + sum_neg log(1+exp(F))``; the
    gradient of the loss in F is ``sigmoid(F) - y``.
    """
    W1, b1, w2, b2 = params["W1"], params["b1"], params["w2"], params["b2"]
    z = x @ W1.T + b1
    a = np.tanh(z)
    f = a @ w2 + b2[0]
    loss = float(np.sum(np.logaddexp(0.0, np.where(y == 1, -f, f))))
    g = 1.0 / (1.0 + np.exp(-f)) - y  # dloss/dF per example
    da = g[:, None] * w2
    dz = da * (1.0 - a * a)
    grads: Params = {
        "W1": dz.T @ x,
        "b1": dz.sum(axis=0),
        "w2": a.T @ g,
        "b2": np.array([g.sum()]),
    }
    return loss, grads


def pair_feature_matrix(
    pairs: Sequence[PairId],
    emb_r: np.ndarray,
    emb_s: np.ndarray,
    store_r: RecordStore,
    store_s: RecordStore,
) -> np.ndarray:
    rows_r = np.array([store_r.row_of(r) for r, _ in pairs], dtype=np.intp)
    rows_s = np.array([store_s.row_of(s) for _, s in pairs], dtype=np.intp)
    return paired_features(emb_r[rows_r], emb_s[rows_s])


def train_head_on_pairs(
    pairs: Sequence[PairId],
    y: np.ndarray,
    emb_r: np.ndarray,
    emb_s: np.ndarray,
    store_r: RecordStore,
    store_s: RecordStore,
    cfg: MatcherConfig,
    rng: np.random.Generator,
    init: MatcherHead | None = None,
) -> MatcherHead:
    """Train a fresh head on an explicit (possibly repeated) pair sample.

    This is the core loop behind :func:`train_matcher`; bootstrap-based
    callers use it directly since a resample may repeat pairs.  ``init``
    continues from an existing head instead of re-initializing.

    Raises
    ------
    InsufficientLabelsError
        If either class is empty.
    """
    if not np.any(y == 1) or not np.any(y == 0):
        raise InsufficientLabelsError("matcher training needs both classes in T")
    x = pair_feature_matrix(pairs, emb_r, emb_s, store_r, store_s)

    if init is None:
        head = init_head(in_dim=x.shape[1], hidden=cfg.hidden, rng=rng)
    else:
        head = MatcherHead(W1=init.W1.copy(), b1=init.b1.copy(), w2=init.w2.copy(), b2=init.b2)
    params = head.params()
    n = len(pairs)
    steps_per_epoch = max(1, -(-n // cfg.batch_size))
    opt = AdamW(
        params,
        lr=cfg.lr,
        weight_decay=cfg.weight_decay,
        total_steps=cfg.epochs * steps_per_epoch,
    )
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            _, grads = matcher_loss_and_grads(x[idx], y[idx], params)
            opt.step(grads)
    head.b2 = float(params["b2"][0])
    return head


def train_matcher(
    labeled: LabeledSet,
    emb_r: np.ndarray,
    emb_s: np.ndarray,
    store_r: RecordStore,
    store_s: RecordStore,
    cfg: MatcherConfig,
    rng: np.random.Generator,
    init: MatcherHead | None = None,
) -> MatcherHead:
    """Train a head on the labeled pair set (fresh unless ``init`` given)."""
    pairs = [p for p, _ in labeled.items()]
    y = np.array([1.0 if labeled[p].is_duplicate else 0.0 for p in pairs])
    return train_head_on_pairs(pairs, y, emb_r, emb_s, store_r, store_s, cfg, rng, init=init)


def predict_all(
    pairs: Sequence[PairId],
    head: MatcherHead,
    emb_r: np.ndarray,
    emb_s: np.ndarray,
    store_r: RecordStore,
    store_s: RecordStore,
) -> dict[PairId, float]:
    """Duplicate probability for every pair, keyed by PairId."""
    if not pairs:
        return {}
    x = pair_feature_matrix(pairs, emb_r, emb_s, store_r, store_s)
    probs = predict_prob(x, head)
    return {pair: float(p) for pair, p in zip(pairs, probs)}


def save_matcher(head: MatcherHead, path: str | Path) -> None:
    """MCH1 layout: magic, u32-le h, u32-le in_dim, then W1, b1, w2, b2 as f32-le."""
    with open(path, "wb") as fh:
        fh.write(MATCHER_MAGIC)
        fh.write(struct.pack("<II", head.hidden, head.in_dim))
        for block in (head.W1, head.b1, head.w2, np.array([head.b2])):
            fh.write(np.ascontiguousarray(block, dtype="<f4").tobytes(order="C"))


def load_matcher(path: str | Path) -> MatcherHead:
    with open(path, "rb") as fh:
        magic = fh.read(len(MATCHER_MAGIC))
        if magic != MATCHER_MAGIC:
            raise CheckpointError(f"{path}: bad magic {magic!r}")
        header = fh.read(8)
        if len(header) != 8:
            raise CheckpointError(f"{path}: truncated header")
        h, in_dim = struct.unpack("<II", header)
        payload = fh.read()
    expected = (h * in_dim + h + h + 1) * 4
    if len(payload) != expected:
        raise CheckpointError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    flat = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    w1_end = h * in_dim
    return MatcherHead(
        W1=flat[:w1_end].reshape(h, in_dim),
        b1=flat[w1_end : w1_end + h],
        w2=flat[w1_end + h : w1_end + 2 * h],
        b2=float(flat[-1]),
    )
