"""Shared fixtures: tiny synthetic datasets sized for fast unit tests."""

import os

# Pin BLAS to one thread before numpy loads: reproducibility guarantees
# (and the timing checks) assume single-threaded reductions.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")

import numpy as np
import pytest

from erloop.synth import SynthConfig, write_dataset

TINY = SynthConfig(
    n_r=120,
    n_s=120,
    n_dups=40,
    seed=11,
    test_dups=15,
    test_negs=35,
    train_dups=12,
    train_negs=24,
)


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """A small two-table dataset on disk, shared across tests (read-only)."""
    path = tmp_path_factory.mktemp("data") / "tiny"
    write_dataset(path, TINY)
    return path


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
