"""Base record encoder E(x).

Records are serialized to text, hashed into a sparse character n-gram
count vector and projected to a dense d-dimensional embedding by a fixed
random linear map.  The encoder is deterministic for a given seed and is
frozen: only the committee heads and matcher on top of it are trained.

Embedding matrices can be swapped with externally computed ones through
the ``EMB1`` binary format (:func:`save_embeddings` /
:func:`load_precomputed`), so a heavier sentence encoder can be plugged
in offline without touching the rest of the pipeline.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import Record, RecordStore, serialize_record
from .errors import CheckpointError

EMB_MAGIC = b"DIALEMB1"

FNV_OFFSET = np.uint64(0xCBF29CE484222325)
FNV_PRIME = np.uint64(0x100000001B3)

_DEFAULT_NGRAMS = (3, 4, 5)


@dataclass(frozen=True)
class EncoderConfig:
    """Lightweight encoder settings; ``build()`` materializes the projection."""

    dim: int = 64
    hash_buckets: int = 1 << 16
    ngram_sizes: tuple[int, ...] = _DEFAULT_NGRAMS
    seed: int = 0

    def build(self) -> "HashedNgramEncoder":
        return HashedNgramEncoder(
            dim=self.dim,
            hash_buckets=self.hash_buckets,
            ngram_sizes=self.ngram_sizes,
            seed=self.seed,
        )


def _fnv1a_bytes(data: bytes) -> int:
    """Scalar 64-bit FNV-1a; reference implementation for the hasher."""
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def _ngram_hashes(text: str, n: int) -> np.ndarray:
    """Hashes of every length-``n`` byte window of ``text`` (uint64 array).

    Vectorized FNV-1a: all windows are hashed in lockstep, relying on
    numpy's modular uint64 arithmetic to match the scalar definition.
    """
    raw = np.frombuffer(text.encode("utf-8"), dtype=np.uint8)
    if raw.size < n:
        return np.empty(0, dtype=np.uint64)
    windows = np.lib.stride_tricks.sliding_window_view(raw, n).astype(np.uint64)
    h = np.full(windows.shape[0], FNV_OFFSET, dtype=np.uint64)
    with np.errstate(over="ignore"):
        for j in range(n):
            h = (h ^ windows[:, j]) * FNV_PRIME
    return h


@dataclass
class HashedNgramEncoder:
    """char n-gram hashing featurizer + frozen random projection.

    Parameters
    ----------
    dim : int
        Output embedding dimension d.
    hash_buckets : int
        Size of the hashed count vector the projection reads from.
    ngram_sizes : tuple of int
        Character n-gram lengths pooled into one count vector.
    seed : int
        Seed for the projection matrix; two encoders with the same seed
        and shape produce identical embeddings.
    """

    dim: int = 64
    hash_buckets: int = 1 << 16
    ngram_sizes: tuple[int, ...] = _DEFAULT_NGRAMS
    seed: int = 0
    projection: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        rng = np.random.default_rng([self.seed, 0xE0C0DE])
        proj = rng.standard_normal((self.dim, self.hash_buckets))
        proj /= np.linalg.norm(proj, axis=1, keepdims=True)
        self.projection = proj

    def _feature_entries(self, text: str) -> tuple[np.ndarray, np.ndarray]:
        """Sparse form of the feature vector: (bucket indices, values)."""
        lowered = text.lower()
        per_n = [_ngram_hashes(lowered, n) for n in self.ngram_sizes]
        per_n = [h for h in per_n if h.size]
        if not per_n:
            return np.empty(0, dtype=np.intp), np.empty(0)
        hashes = np.concatenate(per_n) % np.uint64(self.hash_buckets)
        idx, counts = np.unique(hashes, return_counts=True)
        vals = counts.astype(np.float64)
        vals /= np.linalg.norm(vals)
        return idx.astype(np.intp), vals

    def features(self, text: str) -> np.ndarray:
        """l2-normalized hashed n-gram counts of the lowercased text."""
        counts = np.zeros(self.hash_buckets)
        idx, vals = self._feature_entries(text)
        counts[idx] = vals
        return counts

    def encode_text(self, text: str) -> np.ndarray:
        idx, vals = self._feature_entries(text)
        return self.projection[:, idx] @ vals if idx.size else np.zeros(self.dim)

    def encode_record(self, rec: Record) -> np.ndarray:
        return self.encode_text(serialize_record(rec))

    def encode_store(self, store: RecordStore) -> np.ndarray:
        """Embed every record; row i corresponds to ``store[i]``.

        Uses a sparse feature matrix so one store encodes in a single
        sparse-dense product instead of one dense projection per record.
        """
        from scipy import sparse

        if len(store) == 0:
            return np.zeros((0, self.dim))
        rows, cols, vals = [], [], []
        for i, rec in enumerate(store):
            idx, v = self._feature_entries(serialize_record(rec))
            rows.append(np.full(idx.size, i, dtype=np.intp))
            cols.append(idx)
            vals.append(v)
        feats = sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(len(store), self.hash_buckets),
        )
        return np.asarray(feats @ self.projection.T)


def save_embeddings(matrix: np.ndarray, path: str | Path) -> None:
    """Write an n x d embedding matrix in the EMB1 binary layout.

    Layout: magic ``DIALEMB1``, u32-le n, u32-le d, then n*d IEEE-754
    32-bit little-endian floats in row-major order.
    """
    mat = np.ascontiguousarray(matrix, dtype="<f4")
    if mat.ndim != 2:
        raise ValueError("embedding matrix must be 2-D")
    with open(path, "wb") as fh:
        fh.write(EMB_MAGIC)
        fh.write(struct.pack("<II", mat.shape[0], mat.shape[1]))
        fh.write(mat.tobytes(order="C"))


def load_precomputed(path: str | Path, store: RecordStore) -> np.ndarray:
    """Read an EMB1 file and validate it against ``store``.

    Raises
    ------
    CheckpointError
        On bad magic, truncated payload, a row count that does not match
        ``len(store)``, or non-finite entries.
    """
    with open(path, "rb") as fh:
        magic = fh.read(len(EMB_MAGIC))
        if magic != EMB_MAGIC:
            raise CheckpointError(f"{path}: bad magic {magic!r}")
        header = fh.read(8)
        if len(header) != 8:
            raise CheckpointError(f"{path}: truncated header")
        n, d = struct.unpack("<II", header)
        payload = fh.read()
    expected = n * d * 4
    if len(payload) != expected:
        raise CheckpointError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    if n != len(store):
        raise CheckpointError(f"{path}: file has {n} rows, store has {len(store)} records")
    matrix = np.frombuffer(payload, dtype="<f4").reshape(n, d).astype(np.float64)
    if not np.all(np.isfinite(matrix)):
        raise CheckpointError(f"{path}: non-finite embedding entries")
    return matrix
