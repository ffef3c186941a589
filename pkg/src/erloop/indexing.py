"""Per-member nearest-neighbor retrieval and the merged candidate set.

For every committee member, the R side is indexed in that member's
embedding space and probed with every S embedding for its k nearest
neighbors under squared euclidean distance.  The per-member results are
pooled, deduplicated keeping the minimum distance, sorted by
``(dist, r_id, s_id)`` and truncated to the candidate budget.

Two backends: ``exact`` scans all distances (BLAS-backed); ``ivf``
clusters the indexed vectors into coarse cells with k-means and probes
only the nearest cells, trading recall for speed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .blocker import Committee, member_embed
from .data import PairId, RecordStore

_KMEANS_ITERS = 20
_KMEANS_SEED = 0x1DF  # build_index takes no rng; clustering must be reproducible


@dataclass
class IndexConfig:
    k: int = 3
    cand_size: int | None = None  # None resolves to 3 * |S| at retrieval time
    backend: Literal["exact", "ivf"] = "exact"
    ivf_nlist: int | None = None  # None resolves to ceil(sqrt(n))
    ivf_nprobe: int | None = None  # None resolves to max(1, nlist // 8)


@dataclass(frozen=True)
class ScoredPair:
    pair: PairId
    dist: float
    member: int


@dataclass
class CandidateSet:
    """Deduplicated retrieval output: ``(pair, min dist)`` ascending."""

    pairs: list[tuple[PairId, float]]

    def __post_init__(self) -> None:
        self._dist = {pair: dist for pair, dist in self.pairs}

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair: PairId) -> bool:
        return pair in self._dist

    def __iter__(self):
        return iter(self.pairs)

    def dist_of(self, pair: PairId) -> float:
        return self._dist[pair]

    @property
    def pair_ids(self) -> set[PairId]:
        return set(self._dist)


def _sq_dists(queries: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """All squared distances, (n_queries, n_vectors), clamped at zero."""
    d2 = (
        np.sum(queries * queries, axis=1)[:, None]
        + np.sum(vectors * vectors, axis=1)[None, :]
        - 2.0 * queries @ vectors.T
    )
    return np.maximum(d2, 0.0)


def _topk_rows(block: np.ndarray, k: int) -> np.ndarray:
    """Per-row column indices of the k smallest entries, ties by column id.

    A stable sort on values breaks ties by original column order, which
    is exactly ascending id.  Large rows are first cut down with
    argpartition; rows whose k-th value equals the partition boundary
    (where ties may straddle the cut) fall back to the full sort.
    """
    n = block.shape[1]
    k = min(k, n)
    m = max(64, 2 * k)
    if n <= m:
        return np.argsort(block, axis=1, kind="stable")[:, :k]
    part = np.argpartition(block, m - 1, axis=1)[:, :m]
    part.sort(axis=1)  # restore ascending column order so stable ties work
    sub = np.take_along_axis(block, part, axis=1)
    inner = np.argsort(sub, axis=1, kind="stable")[:, :k]
    rows = np.take_along_axis(part, inner, axis=1)
    kth = np.take_along_axis(sub, inner[:, -1:], axis=1)[:, 0]
    boundary = sub.max(axis=1)  # the m-th smallest value per row
    bad = kth >= boundary
    if np.any(bad):
        rows[bad] = np.argsort(block[bad], axis=1, kind="stable")[:, :k]
    return rows


@dataclass
class ExactIndex:
    vectors: np.ndarray

    def __len__(self) -> int:
        return len(self.vectors)

    def probe_all(self, queries: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Per query: row ids and distances of the k nearest vectors.

        Returns (ids, dists), each of shape (n_queries, min(k, n)).
        """
        k = min(k, len(self.vectors))
        ids = np.empty((len(queries), k), dtype=np.intp)
        dists = np.empty((len(queries), k))
        chunk = max(1, (1 << 22) // max(1, len(self.vectors)))
        for start in range(0, len(queries), chunk):
            block = _sq_dists(queries[start : start + chunk], self.vectors)
            rows = _topk_rows(block, k)
            ids[start : start + len(rows)] = rows
            dists[start : start + len(rows)] = np.take_along_axis(block, rows, axis=1)
        return ids, dists


@dataclass
class IVFIndex:
    vectors: np.ndarray
    centroids: np.ndarray
    cells: list[np.ndarray]  # row ids per centroid
    nprobe: int

    def __len__(self) -> int:
        return len(self.vectors)

    def probe_all(self, queries: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        k_eff = min(k, len(self.vectors))
        ids = np.full((len(queries), k_eff), -1, dtype=np.intp)
        dists = np.full((len(queries), k_eff), np.inf)
        cent_d = _sq_dists(queries, self.centroids)
        cent_ids = np.arange(len(self.centroids))
        for i in range(len(queries)):
            order = np.lexsort((cent_ids, cent_d[i]))[: self.nprobe]
            rows = np.concatenate([self.cells[c] for c in order])
            if rows.size == 0:
                continue
            drow = _sq_dists(queries[i][None, :], self.vectors[rows])[0]
            sel = np.lexsort((rows, drow))[: min(k_eff, rows.size)]
            ids[i, : len(sel)] = rows[sel]
            dists[i, : len(sel)] = drow[sel]
        return ids, dists


Index = ExactIndex | IVFIndex


def _kmeans(vectors: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    from .selection import kmeanspp_seed

    seeds = kmeanspp_seed(vectors, k, rng)
    centroids = vectors[seeds].copy()
    for _ in range(_KMEANS_ITERS):
        assign = np.argmin(_sq_dists(vectors, centroids), axis=1)
        for c in range(len(centroids)):
            mine = vectors[assign == c]
            if len(mine):
                centroids[c] = mine.mean(axis=0)
    return centroids


def build_index(vectors: np.ndarray, cfg: IndexConfig) -> Index:
    if len(vectors) < 1:
        raise ValueError("cannot index an empty vector set")
    if cfg.backend == "exact":
        return ExactIndex(vectors=vectors)
    nlist = cfg.ivf_nlist if cfg.ivf_nlist is not None else int(np.ceil(np.sqrt(len(vectors))))
    nlist = min(nlist, len(vectors))
    nprobe = cfg.ivf_nprobe if cfg.ivf_nprobe is not None else max(1, nlist // 8)
    nprobe = min(nprobe, nlist)
    centroids = _kmeans(vectors, nlist, np.random.default_rng(_KMEANS_SEED))
    assign = np.argmin(_sq_dists(vectors, centroids), axis=1)
    cells = [np.flatnonzero(assign == c) for c in range(len(centroids))]
    return IVFIndex(vectors=vectors, centroids=centroids, cells=cells, nprobe=nprobe)


def probe(index: Index, query: np.ndarray, k: int) -> list[tuple[int, float]]:
    """Nearest rows for a single query: [(row_id, squared distance), ...]."""
    ids, dists = index.probe_all(np.asarray(query)[None, :], k)
    return [(int(i), float(d)) for i, d in zip(ids[0], dists[0]) if i >= 0]


def merge_scored_pairs(scored: Sequence[ScoredPair], cand_size: int) -> CandidateSet:
    """Dedup by pair keeping min dist, sort by (dist, r, s), truncate."""
    best: dict[PairId, float] = {}
    for sp in scored:
        prev = best.get(sp.pair)
        if prev is None or sp.dist < prev:
            best[sp.pair] = sp.dist
    if not best:
        return CandidateSet(pairs=[])
    items = list(best.items())
    r = np.array([p[0] for p, _ in items])
    s = np.array([p[1] for p, _ in items])
    d = np.array([dist for _, dist in items])
    order = np.lexsort((s, r, d))[:cand_size]
    return CandidateSet(pairs=[items[i] for i in order])


def _retrieve_in_spaces(
    spaces: Sequence[tuple[np.ndarray, np.ndarray]],
    store_r: RecordStore,
    store_s: RecordStore,
    cfg: IndexConfig,
) -> CandidateSet:
    cand_size = cfg.cand_size if cfg.cand_size is not None else 3 * len(store_s)
    r_ids = np.array(store_r.ids)
    s_ids = np.array(store_s.ids)
    scored: list[ScoredPair] = []
    for k_idx, (er, es) in enumerate(spaces):
        index = build_index(er, cfg)
        nbr_rows, nbr_dists = index.probe_all(es, cfg.k)
        for s_row in range(len(es)):
            for col in range(nbr_rows.shape[1]):
                row = nbr_rows[s_row, col]
                if row < 0:
                    continue
                scored.append(
                    ScoredPair(
                        pair=(int(r_ids[row]), int(s_ids[s_row])),
                        dist=float(nbr_dists[s_row, col]),
                        member=k_idx,
                    )
                )
    return merge_scored_pairs(scored, cand_size)


def retrieve_candidates(
    members: Committee,
    emb_r: np.ndarray,
    emb_s: np.ndarray,
    store_r: RecordStore,
    store_s: RecordStore,
    cfg: IndexConfig,
) -> CandidateSet:
    """Index-by-committee retrieval over all members, merged and capped."""
    spaces = [(member_embed(emb_r, m), member_embed(emb_s, m)) for m in members]
    return _retrieve_in_spaces(spaces, store_r, store_s, cfg)


def retrieve_candidates_fixed(
    emb_r: np.ndarray,
    emb_s: np.ndarray,
    store_r: RecordStore,
    store_s: RecordStore,
    cfg: IndexConfig,
) -> CandidateSet:
    """Blocking without a committee: k-NN directly on the base embeddings."""
    return _retrieve_in_spaces([(emb_r, emb_s)], store_r, store_s, cfg)


def write_candidates(cand: CandidateSet, path: str | Path) -> None:
    """Dump the candidate set as CSV rows (r_id, s_id, min_dist)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("r_id", "s_id", "min_dist"))
        for (r_id, s_id), dist in cand.pairs:
            writer.writerow((r_id, s_id, repr(dist)))
