"""Committee of masked affine embedding heads for blocking.

Each member k applies ``E_k(x) = tanh(U_k (M_k * E(x)) + V_k)`` on top of
the frozen base embedding, where ``M_k`` is a fixed random binary mask.
Members are trained to pull labeled duplicates together and push
constructed negatives apart; the default objective is the contrastive
softmax over one positive and 3b negative similarity terms, with triplet
and pairwise-classification objectives available for comparison.

Negatives are built per batch from b sampled duplicates plus b records
drawn from each list; member-specific shuffles decorrelate the
committee.  An ablation switch replaces the constructed negatives with
labeled non-duplicate pairs.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .data import PairId, RecordStore
from .errors import CheckpointError, InsufficientLabelsError
from .optim import AdamW, Params

COMMITTEE_MAGIC = b"DIALCMT1"


@dataclass
class CommitteeConfig:
    n_members: int = 3
    mask_keep_prob: float = 0.5
    batch_size: int = 16
    epochs: int = 200
    objective: Literal["contrastive", "classification", "triplet"] = "contrastive"
    margin: float = 1.0
    lr: float = 1e-3
    weight_decay: float = 0.01
    negative_source: Literal["random", "labeled"] = "random"
    similarity: Literal["sqeuclidean", "scaled_cosine"] = "sqeuclidean"
    cosine_scale: float = 10.0

    def __post_init__(self) -> None:
        if self.n_members < 1:
            raise ValueError("n_members must be >= 1")
        if not 0.0 < self.mask_keep_prob <= 1.0:
            raise ValueError("mask_keep_prob must be in (0, 1]")


@dataclass
class CommitteeMember:
    """Mask is fixed at creation; U, V (and the optional pairwise scorer
    used by the classification objective) are the trainable parameters."""

    mask: np.ndarray  # (d,) of {0.0, 1.0}
    U: np.ndarray  # (d, d)
    V: np.ndarray  # (d,)
    scorer_w: np.ndarray | None = None  # (3d,)
    scorer_b: float = 0.0

    def params(self) -> Params:
        out: Params = {"U": self.U, "V": self.V}
        if self.scorer_w is not None:
            out["cw"] = self.scorer_w
            out["cb"] = np.array([self.scorer_b])
        return out


Committee = list[CommitteeMember]


@dataclass
class NegativeBatch:
    """One training batch: b positives plus the sampled negative material.

    With ``source="random"`` the negatives for positive p are
    ``(r_i, s_p)``, ``(r_p, s_i)`` and ``(r_i, s_i)`` over the b sampled
    records, under each member's own shuffle.  With ``source="labeled"``
    the same 3b slots are filled by labeled non-duplicate pairs, shared
    across members.
    """

    pos_r_rows: np.ndarray  # (b,)
    pos_s_rows: np.ndarray  # (b,)
    source: Literal["random", "labeled"]
    member_rand_r: list[np.ndarray] = field(default_factory=list)  # per member (b,)
    member_rand_s: list[np.ndarray] = field(default_factory=list)
    labeled_r_rows: np.ndarray | None = None  # (3b,)
    labeled_s_rows: np.ndarray | None = None

    @property
    def b(self) -> int:
        return len(self.pos_r_rows)


def init_committee(
    cfg: CommitteeConfig, d: int, seed_key: Sequence[int]
) -> Committee:
    """Fresh committee: Bernoulli(p) masks (all-zero masks re-drawn),
    U uniform in +-1/sqrt(d), V zero."""
    members: Committee = []
    bound = 1.0 / np.sqrt(d)
    for k in range(cfg.n_members):
        rng = np.random.default_rng([*seed_key, k])
        mask = (rng.random(d) < cfg.mask_keep_prob).astype(np.float64)
        while not mask.any():
            mask = (rng.random(d) < cfg.mask_keep_prob).astype(np.float64)
        scorer_w = None
        if cfg.objective == "classification":
            scorer_w = rng.uniform(-1.0 / np.sqrt(3 * d), 1.0 / np.sqrt(3 * d), size=3 * d)
        members.append(
            CommitteeMember(
                mask=mask,
                U=rng.uniform(-bound, bound, size=(d, d)),
                V=np.zeros(d),
                scorer_w=scorer_w,
            )
        )
    return members


def member_embed(x: np.ndarray, member: CommitteeMember) -> np.ndarray:
    """E_k for one base embedding (d,) or a batch (n, d)."""
    return np.tanh((x * member.mask) @ member.U.T + member.V)


def _sample_rows(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    return rng.choice(n, size=size, replace=n < size)


def build_negative_batch(
    t_pos: Sequence[PairId],
    store_r: RecordStore,
    store_s: RecordStore,
    cfg: CommitteeConfig,
    rng: np.random.Generator,
    t_neg: Sequence[PairId] | None = None,
    positives: Sequence[int] | None = None,
) -> NegativeBatch:
    """Sample one training batch.

    Positives are drawn without replacement when enough are available,
    with replacement otherwise; the same rule applies to the random
    record draws and (at size 3b) to labeled negatives.  The training
    loop passes ``positives`` (indices into ``t_pos``) explicitly so
    each epoch walks a shuffled partition of the duplicates; the batch
    size then follows the slice.
    """
    if not t_pos:
        raise InsufficientLabelsError("negative batch needs at least one labeled duplicate")
    if positives is not None:
        pos_idx = np.asarray(positives, dtype=np.intp)
        b = len(pos_idx)
    else:
        b = cfg.batch_size
        pos_idx = _sample_rows(len(t_pos), b, rng)
    pos_r_rows = np.array([store_r.row_of(t_pos[i][0]) for i in pos_idx], dtype=np.intp)
    pos_s_rows = np.array([store_s.row_of(t_pos[i][1]) for i in pos_idx], dtype=np.intp)

    if cfg.negative_source == "labeled":
        if not t_neg:
            raise InsufficientLabelsError("labeled negative source needs non-duplicate pairs")
        neg_idx = _sample_rows(len(t_neg), 3 * b, rng)
        return NegativeBatch(
            pos_r_rows=pos_r_rows,
            pos_s_rows=pos_s_rows,
            source="labeled",
            labeled_r_rows=np.array([store_r.row_of(t_neg[i][0]) for i in neg_idx], dtype=np.intp),
            labeled_s_rows=np.array([store_s.row_of(t_neg[i][1]) for i in neg_idx], dtype=np.intp),
        )

    rand_r = _sample_rows(len(store_r), b, rng)
    rand_s = _sample_rows(len(store_s), b, rng)
    member_rand_r = [rand_r[rng.permutation(b)] for _ in range(cfg.n_members)]
    member_rand_s = [rand_s[rng.permutation(b)] for _ in range(cfg.n_members)]
    return NegativeBatch(
        pos_r_rows=pos_r_rows,
        pos_s_rows=pos_s_rows,
        source="random",
        member_rand_r=member_rand_r,
        member_rand_s=member_rand_s,
    )


def _forward(params: Params, mask: np.ndarray, rows: np.ndarray, emb: np.ndarray):
    """Masked input and member embedding for a set of base rows."""
    x = emb[rows] * mask
    e = np.tanh(x @ params["U"].T + params["V"])
    return x, e


def _backprop_uv(grads: Params, x: np.ndarray, e: np.ndarray, de: np.ndarray) -> None:
    dz = de * (1.0 - e * e)
    grads["U"] += dz.T @ x
    grads["V"] += dz.sum(axis=0)


def _neg_sq_cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of -(squared euclidean distance) between rows of a and b."""
    return -(
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * a @ b.T
    )


def _normalize_rows(e: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    nrm = np.maximum(np.linalg.norm(e, axis=1, keepdims=True), 1e-30)
    return e / nrm, nrm


def _member_negatives(batch: NegativeBatch, member_index: int):
    if batch.source == "labeled":
        return batch.labeled_r_rows, batch.labeled_s_rows
    return batch.member_rand_r[member_index], batch.member_rand_s[member_index]


def similarity_logits(
    batch: NegativeBatch,
    member: CommitteeMember,
    member_index: int,
    emb_r: np.ndarray,
    emb_s: np.ndarray,
    cfg: CommitteeConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """Log-similarities entering each positive's softmax denominator.

    Returns ``(pos, neg)`` with shapes (b,) and (b, 3b): the denominator
    for positive p holds exactly the 1 + 3b terms
    ``exp(pos[p]), exp(neg[p, 0]), ..., exp(neg[p, 3b-1])``.
    """
    params = member.params()
    _, ep_r = _forward(params, member.mask, batch.pos_r_rows, emb_r)
    _, ep_s = _forward(params, member.mask, batch.pos_s_rows, emb_s)
    nr, ns = _member_negatives(batch, member_index)
    _, en_r = _forward(params, member.mask, nr, emb_r)
    _, en_s = _forward(params, member.mask, ns, emb_s)
    if cfg.similarity == "scaled_cosine":
        scale = cfg.cosine_scale
        np_r, _ = _normalize_rows(ep_r)
        np_s, _ = _normalize_rows(ep_s)
        nn_r, _ = _normalize_rows(en_r)
        nn_s, _ = _normalize_rows(en_s)
        pos = scale * np.sum(np_r * np_s, axis=1)
        if batch.source == "labeled":
            neg = np.broadcast_to(scale * np.sum(nn_r * nn_s, axis=1), (batch.b, len(nr)))
        else:
            neg = np.concatenate(
                [
                    scale * np_s @ nn_r.T,
                    scale * np_r @ nn_s.T,
                    np.broadcast_to(scale * np.sum(nn_r * nn_s, axis=1), (batch.b, len(nr))),
                ],
                axis=1,
            )
        return pos, np.array(neg)
    pos = -np.sum((ep_r - ep_s) ** 2, axis=1)
    if batch.source == "labeled":
        neg = np.broadcast_to(-np.sum((en_r - en_s) ** 2, axis=1), (batch.b, len(nr)))
    else:
        neg = np.concatenate(
            [
                _neg_sq_cross(ep_s, en_r),
                _neg_sq_cross(ep_r, en_s),
                np.broadcast_to(-np.sum((en_r - en_s) ** 2, axis=1), (batch.b, len(nr))),
            ],
            axis=1,
        )
    return pos, np.array(neg)


def contrastive_loss_and_grads(
    params: Params,
    mask: np.ndarray,
    batch: NegativeBatch,
    member_index: int,
    emb_r: np.ndarray,
    emb_s: np.ndarray,
    cfg: CommitteeConfig,
) -> tuple[float, Params]:
    """Softmax contrastive loss over 1 + 3b similarity terms per positive.

    The loss is the negated log-probability of the positive term,
    summed over the batch; evaluated with log-sum-exp for stability.
    Returns analytic gradients with respect to U and V.
    """
    xp_r, ep_r = _forward(params, mask, batch.pos_r_rows, emb_r)
    xp_s, ep_s = _forward(params, mask, batch.pos_s_rows, emb_s)
    nr, ns = _member_negatives(batch, member_index)
    xn_r, en_r = _forward(params, mask, nr, emb_r)
    xn_s, en_s = _forward(params, mask, ns, emb_s)
    b_pos = batch.b
    cosine = cfg.similarity == "scaled_cosine"

    if cosine:
        scale = cfg.cosine_scale
        hp_r, nrm_pr = _normalize_rows(ep_r)
        hp_s, nrm_ps = _normalize_rows(ep_s)
        hn_r, nrm_nr = _normalize_rows(en_r)
        hn_s, nrm_ns = _normalize_rows(en_s)
        pos_logit = scale * np.sum(hp_r * hp_s, axis=1)
        if batch.source == "labeled":
            lab = scale * np.sum(hn_r * hn_s, axis=1)
            neg = np.broadcast_to(lab, (b_pos, len(nr)))
        else:
            m_a = scale * hp_s @ hn_r.T
            m_b = scale * hp_r @ hn_s.T
            l_c = scale * np.sum(hn_r * hn_s, axis=1)
            neg = np.concatenate([m_a, m_b, np.broadcast_to(l_c, (b_pos, len(nr)))], axis=1)
    else:
        pos_logit = -np.sum((ep_r - ep_s) ** 2, axis=1)
        if batch.source == "labeled":
            lab = -np.sum((en_r - en_s) ** 2, axis=1)
            neg = np.broadcast_to(lab, (b_pos, len(nr)))
        else:
            m_a = _neg_sq_cross(ep_s, en_r)
            m_b = _neg_sq_cross(ep_r, en_s)
            l_c = -np.sum((en_r - en_s) ** 2, axis=1)
            neg = np.concatenate([m_a, m_b, np.broadcast_to(l_c, (b_pos, len(nr)))], axis=1)

    logits = np.concatenate([pos_logit[:, None], neg], axis=1)
    peak = logits.max(axis=1, keepdims=True)
    lse = peak[:, 0] + np.log(np.sum(np.exp(logits - peak), axis=1))
    loss = float(np.sum(lse - pos_logit))

    w = np.exp(logits - lse[:, None])  # softmax weights, rows sum to 1
    g_pos = w[:, 0] - 1.0
    nneg = neg.shape[1]

    grads: Params = {"U": np.zeros_like(params["U"]), "V": np.zeros_like(params["V"])}
    d_ep_r = np.zeros_like(ep_r)
    d_ep_s = np.zeros_like(ep_s)
    d_en_r = np.zeros_like(en_r)
    d_en_s = np.zeros_like(en_s)

    if cosine:
        dh_pr = np.zeros_like(hp_r)
        dh_ps = np.zeros_like(hp_s)
        dh_nr = np.zeros_like(hn_r)
        dh_ns = np.zeros_like(hn_s)
        dh_pr += scale * g_pos[:, None] * hp_s
        dh_ps += scale * g_pos[:, None] * hp_r
        if batch.source == "labeled":
            c = w[:, 1:].sum(axis=0)
            dh_nr += scale * c[:, None] * hn_s
            dh_ns += scale * c[:, None] * hn_r
        else:
            b = len(nr)
            w_a = w[:, 1 : 1 + b]
            w_b = w[:, 1 + b : 1 + 2 * b]
            w_c = w[:, 1 + 2 * b :]
            dh_ps += scale * w_a @ hn_r
            dh_nr += scale * w_a.T @ hp_s
            dh_pr += scale * w_b @ hn_s
            dh_ns += scale * w_b.T @ hp_r
            c = w_c.sum(axis=0)
            dh_nr += scale * c[:, None] * hn_s
            dh_ns += scale * c[:, None] * hn_r
        for de, dh, h, nrm in (
            (d_ep_r, dh_pr, hp_r, nrm_pr),
            (d_ep_s, dh_ps, hp_s, nrm_ps),
            (d_en_r, dh_nr, hn_r, nrm_nr),
            (d_en_s, dh_ns, hn_s, nrm_ns),
        ):
            de += (dh - np.sum(dh * h, axis=1, keepdims=True) * h) / nrm
    else:
        diff_pos = ep_r - ep_s
        d_ep_r += -2.0 * g_pos[:, None] * diff_pos
        d_ep_s += 2.0 * g_pos[:, None] * diff_pos
        if batch.source == "labeled":
            c = w[:, 1:].sum(axis=0)
            diff_lab = en_r - en_s
            d_en_r += -2.0 * c[:, None] * diff_lab
            d_en_s += 2.0 * c[:, None] * diff_lab
        else:
            b = len(nr)
            w_a = w[:, 1 : 1 + b]
            w_b = w[:, 1 + b : 1 + 2 * b]
            w_c = w[:, 1 + 2 * b :]
            rs_a = w_a.sum(axis=1)
            cs_a = w_a.sum(axis=0)
            d_ep_s += -2.0 * (rs_a[:, None] * ep_s - w_a @ en_r)
            d_en_r += 2.0 * (w_a.T @ ep_s - cs_a[:, None] * en_r)
            rs_b = w_b.sum(axis=1)
            cs_b = w_b.sum(axis=0)
            d_ep_r += -2.0 * (rs_b[:, None] * ep_r - w_b @ en_s)
            d_en_s += 2.0 * (w_b.T @ ep_r - cs_b[:, None] * en_s)
            c = w_c.sum(axis=0)
            diff_c = en_r - en_s
            d_en_r += -2.0 * c[:, None] * diff_c
            d_en_s += 2.0 * c[:, None] * diff_c

    _backprop_uv(grads, xp_r, ep_r, d_ep_r)
    _backprop_uv(grads, xp_s, ep_s, d_ep_s)
    _backprop_uv(grads, xn_r, en_r, d_en_r)
    _backprop_uv(grads, xn_s, en_s, d_en_s)
    return loss, grads


def triplet_loss_and_grads(
    params: Params,
    mask: np.ndarray,
    batch: NegativeBatch,
    member_index: int,
    emb_r: np.ndarray,
    emb_s: np.ndarray,
    cfg: CommitteeConfig,
) -> tuple[float, Params]:
    """Double-anchor hinge on euclidean distances in member space.

    Positive p is pushed closer to its partner than to one random
    negative record per side (position-aligned in the member's shuffled
    lists); the hinge subgradient is zero at the corner and at
    coincident points.
    """
    xp_r, ep_r = _forward(params, mask, batch.pos_r_rows, emb_r)
    xp_s, ep_s = _forward(params, mask, batch.pos_s_rows, emb_s)
    nr, ns = _member_negatives(batch, member_index)
    b = batch.b
    xn_r, en_r = _forward(params, mask, nr[:b], emb_r)
    xn_s, en_s = _forward(params, mask, ns[:b], emb_s)

    def dist(u, v):
        return np.linalg.norm(u - v, axis=1)

    def unit(u, v, d):
        inv = np.where(d > 0, 1.0 / np.maximum(d, 1e-300), 0.0)
        return (u - v) * inv[:, None]

    d_pos = dist(ep_r, ep_s)
    d_neg_s = dist(ep_r, en_s)  # anchor r against its random s partner
    d_neg_r = dist(ep_s, en_r)  # anchor s against its random r partner
    t1 = d_pos - d_neg_s + cfg.margin
    t2 = d_pos - d_neg_r + cfg.margin
    a1 = (t1 > 0).astype(np.float64)
    a2 = (t2 > 0).astype(np.float64)
    loss = float(np.sum(t1 * a1) + np.sum(t2 * a2))

    u_pos = unit(ep_r, ep_s, d_pos)
    u1 = unit(ep_r, en_s, d_neg_s)
    u2 = unit(ep_s, en_r, d_neg_r)
    d_ep_r = (a1 + a2)[:, None] * u_pos - a1[:, None] * u1
    d_ep_s = -(a1 + a2)[:, None] * u_pos - a2[:, None] * u2
    d_en_s = a1[:, None] * u1
    d_en_r = a2[:, None] * u2

    grads: Params = {"U": np.zeros_like(params["U"]), "V": np.zeros_like(params["V"])}
    _backprop_uv(grads, xp_r, ep_r, d_ep_r)
    _backprop_uv(grads, xp_s, ep_s, d_ep_s)
    _backprop_uv(grads, xn_r, en_r, d_en_r)
    _backprop_uv(grads, xn_s, en_s, d_en_s)
    return loss, grads


def classification_loss_and_grads(
    params: Params,
    mask: np.ndarray,
    batch: NegativeBatch,
    member_index: int,
    emb_r: np.ndarray,
    emb_s: np.ndarray,
    cfg: CommitteeConfig,
) -> tuple[float, Params]:
    """Pairwise logistic loss with a per-member linear scorer.

    Each positive contributes one positive example and its 3b negative
    slots contribute one negative example each, scored from
    ``[E_k(r); E_k(s); |E_k(r)-E_k(s)|]``.
    """
    xp_r, ep_r = _forward(params, mask, batch.pos_r_rows, emb_r)
    xp_s, ep_s = _forward(params, mask, batch.pos_s_rows, emb_s)
    nr, ns = _member_negatives(batch, member_index)
    xn_r, en_r = _forward(params, mask, nr, emb_r)
    xn_s, en_s = _forward(params, mask, ns, emb_s)
    b_pos = batch.b
    b = len(nr) if batch.source == "random" else None

    # Stack embedded rows once; examples reference them by index.
    e_all = np.concatenate([ep_r, ep_s, en_r, en_s], axis=0)
    x_all = np.concatenate([xp_r, xp_s, xn_r, xn_s], axis=0)
    off_ps = b_pos
    off_nr = 2 * b_pos
    off_ns = 2 * b_pos + len(nr)

    pos_u = np.arange(b_pos)
    pos_v = off_ps + np.arange(b_pos)
    if batch.source == "labeled":
        n_lab = len(nr)
        neg_u = np.tile(off_nr + np.arange(n_lab), b_pos)
        neg_v = np.tile(off_ns + np.arange(n_lab), b_pos)
    else:
        i = np.arange(b)
        neg_u_blocks = []
        neg_v_blocks = []
        # per positive p: (r_i, s_p), (r_p, s_i), (r_i, s_i) over i = 1..b
        for p in range(b_pos):
            neg_u_blocks += [off_nr + i, np.full(b, p), off_nr + i]
            neg_v_blocks += [np.full(b, off_ps + p), off_ns + i, off_ns + i]
        neg_u = np.concatenate(neg_u_blocks)
        neg_v = np.concatenate(neg_v_blocks)

    u_idx = np.concatenate([pos_u, neg_u])
    v_idx = np.concatenate([pos_v, neg_v])
    y = np.concatenate([np.ones(b_pos), np.zeros(len(neg_u))])

    uu = e_all[u_idx]
    vv = e_all[v_idx]
    sgn = np.sign(uu - vv)
    feats = np.concatenate([uu, vv, np.abs(uu - vv)], axis=1)
    q = feats @ params["cw"] + params["cb"][0]
    loss = float(np.sum(np.logaddexp(0.0, np.where(y == 1, -q, q))))

    g = 1.0 / (1.0 + np.exp(-q)) - y
    d = ep_r.shape[1]
    dfeats = g[:, None] * params["cw"]
    du = dfeats[:, :d] + sgn * dfeats[:, 2 * d :]
    dv = dfeats[:, d : 2 * d] - sgn * dfeats[:, 2 * d :]
    d_e_all = np.zeros_like(e_all)
    np.add.at(d_e_all, u_idx, du)
    np.add.at(d_e_all, v_idx, dv)

    grads: Params = {
        "U": np.zeros_like(params["U"]),
        "V": np.zeros_like(params["V"]),
        "cw": feats.T @ g,
        "cb": np.array([g.sum()]),
    }
    _backprop_uv(grads, x_all, e_all, d_e_all)
    return loss, grads


_LOSS_FNS = {
    "contrastive": contrastive_loss_and_grads,
    "triplet": triplet_loss_and_grads,
    "classification": classification_loss_and_grads,
}


def train_committee(
    t_pos: Sequence[PairId],
    t_neg: Sequence[PairId],
    emb_r: np.ndarray,
    emb_s: np.ndarray,
    store_r: RecordStore,
    store_s: RecordStore,
    cfg: CommitteeConfig,
    seed_key: Sequence[int],
    init: Committee | None = None,
) -> Committee:
    """Create a fresh committee (or continue from ``init``) and train it.

    Each epoch shuffles the duplicates and walks them in slices of the
    batch size (ceil(|t_pos| / b) batches, negatives freshly sampled per
    batch); all members step on each batch under their own shuffle and
    optimizer.  The base embeddings are read-only throughout.
    """
    if not t_pos:
        raise InsufficientLabelsError("committee training needs labeled duplicates")
    if cfg.negative_source == "labeled" and not t_neg:
        raise InsufficientLabelsError("labeled negative source needs non-duplicate pairs")
    if init is None:
        members = init_committee(cfg, emb_r.shape[1], seed_key)
    else:
        members = [
            CommitteeMember(
                mask=m.mask.copy(),
                U=m.U.copy(),
                V=m.V.copy(),
                scorer_w=None if m.scorer_w is None else m.scorer_w.copy(),
                scorer_b=m.scorer_b,
            )
            for m in init
        ]
    if cfg.epochs == 0:
        return members
    param_sets = [m.params() for m in members]
    batches_per_epoch = max(1, -(-len(t_pos) // cfg.batch_size))
    total_steps = cfg.epochs * batches_per_epoch
    opts = [
        AdamW(ps, lr=cfg.lr, weight_decay=cfg.weight_decay, total_steps=total_steps)
        for ps in param_sets
    ]
    loss_fn = _LOSS_FNS[cfg.objective]
    rng = np.random.default_rng([*seed_key, 0xBA7C4])
    t_pos = list(t_pos)
    t_neg = list(t_neg)
    for _ in range(cfg.epochs):
        if len(t_pos) >= cfg.batch_size:
            order = rng.permutation(len(t_pos))
            slices = [
                order[i : i + cfg.batch_size]
                for i in range(0, len(t_pos), cfg.batch_size)
            ]
        else:
            slices = [None]  # build_negative_batch upsamples with replacement
        for chunk in slices:
            batch = build_negative_batch(
                t_pos, store_r, store_s, cfg, rng, t_neg=t_neg, positives=chunk
            )
            for k, member in enumerate(members):
                _, grads = loss_fn(
                    param_sets[k], member.mask, batch, k, emb_r, emb_s, cfg
                )
                opts[k].step(grads)
    for k, member in enumerate(members):
        if member.scorer_w is not None:
            member.scorer_b = float(param_sets[k]["cb"][0])
    return members


def save_committee(members: Committee, mask_keep_prob: float, path: str | Path) -> None:
    """CMT1 layout: magic, u32-le N, u32-le d, f32-le keep-prob, then per
    member d mask bytes (0/1), U as f32-le row-major, V as f32-le."""
    d = members[0].U.shape[0]
    with open(path, "wb") as fh:
        fh.write(COMMITTEE_MAGIC)
        fh.write(struct.pack("<IIf", len(members), d, mask_keep_prob))
        for m in members:
            fh.write(m.mask.astype(np.uint8).tobytes())
            fh.write(np.ascontiguousarray(m.U, dtype="<f4").tobytes(order="C"))
            fh.write(np.ascontiguousarray(m.V, dtype="<f4").tobytes())


def load_committee(path: str | Path) -> tuple[Committee, float]:
    with open(path, "rb") as fh:
        magic = fh.read(len(COMMITTEE_MAGIC))
        if magic != COMMITTEE_MAGIC:
            raise CheckpointError(f"{path}: bad magic {magic!r}")
        header = fh.read(12)
        if len(header) != 12:
            raise CheckpointError(f"{path}: truncated header")
        n, d, keep_prob = struct.unpack("<IIf", header)
        members: Committee = []
        per_member = d + (d * d + d) * 4
        for _ in range(n):
            blob = fh.read(per_member)
            if len(blob) != per_member:
                raise CheckpointError(f"{path}: truncated member block")
            mask = np.frombuffer(blob[:d], dtype=np.uint8).astype(np.float64)
            flat = np.frombuffer(blob[d:], dtype="<f4").astype(np.float64)
            members.append(
                CommitteeMember(mask=mask, U=flat[: d * d].reshape(d, d), V=flat[d * d :])
            )
        if fh.read(1):
            raise CheckpointError(f"{path}: trailing bytes")
    return members, float(keep_prob)
