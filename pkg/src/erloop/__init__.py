"""erloop: active-learning entity resolution with learned blocking.

The library trains a pair matcher and a committee of blocking
embeddings from a growing labeled set, retrieves candidate pairs by
nearest-neighbor search in each committee member's space, and picks the
next pairs to label with a pluggable selection strategy.  A CLI and a
small HTTP service wrap the loop for scripted runs and human labeling
sessions.
"""

from .blocker import Committee, CommitteeConfig, CommitteeMember, train_committee
from .data import (
    GoldStandard,
    Label,
    LabeledSet,
    LabelSource,
    LabelValue,
    PairId,
    Record,
    RecordStore,
    Side,
    load_dataset,
)
from .encoder import EncoderConfig, HashedNgramEncoder
from .errors import (
    CheckpointError,
    ConfigError,
    DatasetFormatError,
    ErloopError,
    InsufficientLabelsError,
    IntegrityError,
    NumericError,
    ParseError,
    QueueError,
    UndefinedMetricError,
)
from .indexing import CandidateSet, IndexConfig, retrieve_candidates
from .loop import (
    LoopConfig,
    SessionConfig,
    SessionData,
    SessionState,
    final_predictions,
    finish_round,
    init_session,
    load_session,
    prepare_data,
    run_round,
    run_session,
    save_session,
    submit_label,
)
from .matcher import MatcherConfig, MatcherHead, train_matcher
from .metrics import PRF, RoundMetrics, prf_allpairs, prf_test, recall_cand
from .selection import STRATEGIES, SelectionConfig
from .synth import SynthConfig, build_catalog, write_dataset

__version__ = "0.1.0"

__all__ = [
    "CandidateSet",
    "CheckpointError",
    "Committee",
    "CommitteeConfig",
    "CommitteeMember",
    "ConfigError",
    "DatasetFormatError",
    "EncoderConfig",
    "ErloopError",
    "GoldStandard",
    "HashedNgramEncoder",
    "IndexConfig",
    "InsufficientLabelsError",
    "IntegrityError",
    "Label",
    "LabeledSet",
    "LabelSource",
    "LabelValue",
    "LoopConfig",
    "MatcherConfig",
    "MatcherHead",
    "NumericError",
    "PRF",
    "PairId",
    "ParseError",
    "QueueError",
    "Record",
    "RecordStore",
    "RoundMetrics",
    "STRATEGIES",
    "SelectionConfig",
    "SessionConfig",
    "SessionData",
    "SessionState",
    "Side",
    "SynthConfig",
    "UndefinedMetricError",
    "build_catalog",
    "final_predictions",
    "finish_round",
    "init_session",
    "load_dataset",
    "load_session",
    "prepare_data",
    "prf_allpairs",
    "prf_test",
    "recall_cand",
    "retrieve_candidates",
    "run_round",
    "run_session",
    "save_session",
    "submit_label",
    "train_committee",
    "train_matcher",
    "write_dataset",
]
