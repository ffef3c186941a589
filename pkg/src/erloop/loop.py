"""Active-learning orchestration.

Each round: train the matcher on T, train a fresh committee on T's
duplicates, retrieve candidates per member and merge, score candidates,
select pairs for labeling, obtain labels (simulated oracle or a human
queue), fold them into T and append metrics.

Randomness is drawn from streams keyed by (global_seed, round, purpose)
so runs are reproducible and phases are independent of each other's
draw counts.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Literal

import numpy as np

from .blocker import Committee, CommitteeConfig, load_committee, save_committee, train_committee
from .data import (
    Label,
    LabeledSet,
    LabelSource,
    LabelValue,
    PairId,
    GoldStandard,
    RecordStore,
    load_dataset,
)
from .encoder import EncoderConfig
from .errors import ConfigError, IntegrityError, QueueError
from .indexing import (
    CandidateSet,
    IndexConfig,
    retrieve_candidates,
    retrieve_candidates_fixed,
    write_candidates,
)
from .matcher import (
    MatcherConfig,
    MatcherHead,
    load_matcher,
    predict_all,
    save_matcher,
    train_matcher,
)
from .metrics import PHASES, RoundMetrics, prf_allpairs, prf_test, recall_cand, write_metrics, read_metrics
from .selection import (
    SelectionConfig,
    build_pool,
    select_badge,
    select_greedy,
    select_partition,
    select_qbc,
    select_random,
    select_uncertainty,
)

# purpose components of the keyed rng streams
_P_SEED = 0
_P_MATCHER = 1
_P_COMMITTEE = 2
_P_SELECTION = 3


def _rng(global_seed: int, round_no: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng([global_seed, round_no, purpose])


@dataclass
class LoopConfig:
    rounds: int = 10
    seed_pos: int = 64
    seed_neg: int = 64
    warm_start: bool = False
    global_seed: int = 0
    oracle: Literal["simulated", "human"] = "simulated"
    record_times: bool = False  # off by default so metrics files are reproducible
    fixed_blocker: bool = False  # baseline: block on raw base embeddings, no committee

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ConfigError("rounds must be >= 1")
        if self.seed_pos < 1 or self.seed_neg < 1:
            raise ConfigError("seed counts must be >= 1 per class")


@dataclass
class SessionConfig:
    loop: LoopConfig = field(default_factory=LoopConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    matcher: MatcherConfig = field(default_factory=MatcherConfig)
    committee: CommitteeConfig = field(default_factory=CommitteeConfig)
    index: IndexConfig = field(default_factory=IndexConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)


@dataclass
class SessionData:
    """A loaded dataset with its (frozen) base embeddings."""

    store_r: RecordStore
    store_s: RecordStore
    gold: GoldStandard
    emb_r: np.ndarray
    emb_s: np.ndarray


def prepare_data(dir_path, encoder_cfg: EncoderConfig | None = None) -> SessionData:
    """Load a dataset directory and embed both record lists once."""
    store_r, store_s, gold = load_dataset(dir_path)
    enc = (encoder_cfg or EncoderConfig()).build()
    return SessionData(
        store_r=store_r,
        store_s=store_s,
        gold=gold,
        emb_r=enc.encode_store(store_r),
        emb_s=enc.encode_store(store_s),
    )


@dataclass
class SessionState:
    labeled: LabeledSet
    round: int = 0
    head: MatcherHead | None = None
    committee: Committee | None = None
    cand: CandidateSet | None = None
    probs: dict[PairId, float] = field(default_factory=dict)
    history: list[RoundMetrics] = field(default_factory=list)
    pending: list[PairId] = field(default_factory=list)
    pending_decisions: dict[PairId, bool] = field(default_factory=dict)
    pending_auto: list[tuple[PairId, Label]] = field(default_factory=list)
    pending_times: dict[str, float] = field(default_factory=dict)
    cum_matcher_time: float = 0.0
    cum_committee_time: float = 0.0

    def status(self, total_rounds: int) -> str:
        if self.pending:
            return "awaiting_labels"
        if self.round >= total_rounds:
            return "done"
        return "idle"


def init_session(data: SessionData, cfg: SessionConfig) -> SessionState:
    """Build the seed labeled set: seed_pos duplicates and seed_neg
    non-duplicates, none from the test split.

    Negatives come from the labeled files when available and are topped
    up with random non-duplicate pairs otherwise.
    """
    lc = cfg.loop
    rng = _rng(lc.global_seed, 0, _P_SEED)
    test_ids = data.gold.test_pair_ids
    labeled = LabeledSet()

    pos_avail = sorted(data.gold.dups - test_ids)
    if len(pos_avail) < lc.seed_pos:
        raise ConfigError(
            f"need {lc.seed_pos} seed duplicates outside the test split, have {len(pos_avail)}"
        )
    for i in rng.choice(len(pos_avail), size=lc.seed_pos, replace=False):
        labeled.add(pos_avail[i], Label(LabelValue.DUPLICATE, LabelSource.SEED), round=0)

    neg_label = Label(LabelValue.NON_DUPLICATE, LabelSource.SEED)
    neg_avail = sorted(data.gold.nondups - test_ids)
    added = 0
    n_file = min(len(neg_avail), lc.seed_neg)
    if n_file:
        for i in rng.choice(len(neg_avail), size=n_file, replace=False):
            labeled.add(neg_avail[i], neg_label, round=0)
            added += 1
    r_ids = data.store_r.ids
    s_ids = data.store_s.ids
    attempts = 0
    while added < lc.seed_neg:
        attempts += 1
        if attempts > 1000 * lc.seed_neg:
            raise ConfigError("could not sample enough non-duplicate seed pairs")
        pair = (
            r_ids[int(rng.integers(len(r_ids)))],
            s_ids[int(rng.integers(len(s_ids)))],
        )
        if pair in data.gold.dups or pair in test_ids or pair in labeled:
            continue
        labeled.add(pair, neg_label, round=0)
        added += 1
    return SessionState(labeled=labeled)


def _select(
    pool,
    probs: dict[PairId, float],
    state: SessionState,
    data: SessionData,
    cfg: SessionConfig,
    round_no: int,
    head: MatcherHead,
) -> tuple[list[PairId], list[tuple[PairId, Label]]]:
    sc = cfg.selection
    budget = sc.budget
    rng = _rng(cfg.loop.global_seed, round_no, _P_SELECTION)
    if sc.strategy == "uncertainty":
        return select_uncertainty(pool, probs, budget), []
    if sc.strategy == "random":
        return select_random(pool, budget, rng), []
    if sc.strategy == "greedy":
        return select_greedy(pool, budget), []
    if sc.strategy == "qbc":
        pairs = [p for p, _ in state.labeled.items()]
        y = np.array([1.0 if state.labeled[p].is_duplicate else 0.0 for p in pairs])
        return (
            select_qbc(
                pool,
                pairs,
                y,
                data.emb_r,
                data.emb_s,
                data.store_r,
                data.store_s,
                cfg.matcher,
                budget,
                sc.qbc_committee_size,
                rng,
            ),
            [],
        )
    if sc.strategy == "partition2":
        return select_partition(pool, probs, budget, 2)
    if sc.strategy == "partition4":
        return select_partition(pool, probs, budget, 4)
    if sc.strategy == "badge":
        return (
            select_badge(
                pool, head, data.emb_r, data.emb_s, data.store_r, data.store_s, budget, rng
            ),
            [],
        )
    raise ConfigError(f"unknown selection strategy {sc.strategy!r}")


def run_round(
    state: SessionState,
    data: SessionData,
    cfg: SessionConfig,
    on_phase: Callable[[str], None] | None = None,
) -> SessionState:
    """Execute one round in place (also returned for chaining).

    With the simulated oracle the round completes fully; with the human
    oracle it stops at the labeling step, leaving the queue in
    ``state.pending`` to be drained via :func:`submit_label` and
    :func:`finish_round`.
    """
    if state.pending:
        raise QueueError("current round is still awaiting labels")
    lc = cfg.loop
    r = state.round + 1
    notify = on_phase if on_phase is not None else (lambda phase: None)
    times: dict[str, float] = {}

    notify("training")
    t0 = time.perf_counter()
    head = train_matcher(
        state.labeled,
        data.emb_r,
        data.emb_s,
        data.store_r,
        data.store_s,
        cfg.matcher,
        _rng(lc.global_seed, r, _P_MATCHER),
        init=state.head if lc.warm_start else None,
    )
    times["matcher"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    committee = None
    if not lc.fixed_blocker:
        committee = train_committee(
            state.labeled.positives,
            state.labeled.negatives,
            data.emb_r,
            data.emb_s,
            data.store_r,
            data.store_s,
            cfg.committee,
            (lc.global_seed, r, _P_COMMITTEE),
            init=state.committee if lc.warm_start else None,
        )
    times["committee"] = time.perf_counter() - t0

    notify("blocking")
    t0 = time.perf_counter()
    if committee is None:
        cand = retrieve_candidates_fixed(
            data.emb_r, data.emb_s, data.store_r, data.store_s, cfg.index
        )
    else:
        cand = retrieve_candidates(
            committee, data.emb_r, data.emb_s, data.store_r, data.store_s, cfg.index
        )
    times["index_retrieve"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    cand_pairs = [p for p, _ in cand.pairs]
    probs = predict_all(cand_pairs, head, data.emb_r, data.emb_s, data.store_r, data.store_s)
    exclude = {p for p, _ in state.labeled.items()} | data.gold.test_pair_ids
    pool = build_pool(cand.pairs, exclude)
    to_label, auto = _select(pool, probs, state, data, cfg, r, head)
    times["selection"] = time.perf_counter() - t0

    if len(to_label) > cfg.selection.budget:
        raise IntegrityError("selection exceeded the labeling budget")
    chosen = set(to_label)
    if len(chosen) != len(to_label):
        raise IntegrityError("selection returned a repeated pair")
    if chosen & data.gold.test_pair_ids:
        raise IntegrityError("selection touched a test pair")
    for pair in to_label:
        if pair in state.labeled:
            raise IntegrityError(f"selection returned already-labeled pair {pair}")

    state.round = r
    state.head = head
    state.committee = committee
    state.cand = cand
    state.probs = probs
    state.pending_auto = auto
    state.pending_times = times

    if lc.oracle == "human":
        state.pending = list(to_label)
        state.pending_decisions = {}
        return state
    decisions = {pair: pair in data.gold.dups for pair in to_label}
    _apply_labels(state, data, cfg, decisions, LabelSource.ORACLE_SIMULATED)
    return state


def _apply_labels(
    state: SessionState,
    data: SessionData,
    cfg: SessionConfig,
    decisions: dict[PairId, bool],
    source: LabelSource,
) -> None:
    for pair, is_dup in decisions.items():
        value = LabelValue.DUPLICATE if is_dup else LabelValue.NON_DUPLICATE
        state.labeled.add(pair, Label(value, source), round=state.round)
    for pair, label in state.pending_auto:
        if pair not in state.labeled:
            state.labeled.add(pair, label, round=state.round)
    state.pending = []
    state.pending_decisions = {}
    state.pending_auto = []
    _append_metrics(state, data, cfg)


def _append_metrics(state: SessionState, data: SessionData, cfg: SessionConfig) -> None:
    state.cum_matcher_time += state.pending_times.get("matcher", 0.0)
    state.cum_committee_time += state.pending_times.get("committee", 0.0)
    if cfg.loop.record_times:
        times = {
            "matcher": state.cum_matcher_time,
            "committee": state.cum_committee_time,
            "index_retrieve": state.pending_times.get("index_retrieve", 0.0),
            "selection": state.pending_times.get("selection", 0.0),
        }
    else:
        times = {phase: 0.0 for phase in PHASES}
    preds = final_predictions(state)
    state.history.append(
        RoundMetrics(
            round=state.round,
            labeled=state.labeled.human_labeled_count(),
            recall_cand=recall_cand(state.cand.pair_ids, data.gold.dups),
            test=prf_test(preds, data.gold.test_pairs),
            all=prf_allpairs(preds, data.gold.dups),
            times=times,
        )
    )
    state.pending_times = {}


def final_predictions(state: SessionState) -> set[PairId]:
    """Pairs retrieved in cand whose duplicate probability exceeds 0.5."""
    return {pair for pair, prob in state.probs.items() if prob > 0.5}


def submit_label(state: SessionState, pair: PairId, is_dup: bool) -> int:
    """Record one human decision; returns the number still queued."""
    if pair not in state.pending:
        raise QueueError(f"pair {pair} is not awaiting a label")
    state.pending.remove(pair)
    state.pending_decisions[pair] = is_dup
    return len(state.pending)


def finish_round(state: SessionState, data: SessionData, cfg: SessionConfig) -> SessionState:
    """Fold a drained human queue into T and close out the round."""
    if state.pending:
        raise QueueError(f"{len(state.pending)} pairs still await labels")
    _apply_labels(state, data, cfg, state.pending_decisions, LabelSource.ORACLE_HUMAN)
    return state


def run_session(
    data: SessionData,
    cfg: SessionConfig,
    on_phase: Callable[[str], None] | None = None,
) -> SessionState:
    """Seed and run all configured rounds with the simulated oracle."""
    if cfg.loop.oracle != "simulated":
        raise ConfigError("run_session drives the simulated oracle only")
    state = init_session(data, cfg)
    for _ in range(cfg.loop.rounds):
        run_round(state, data, cfg, on_phase)
    return state


# --- checkpoint directory -------------------------------------------------

_STATE_FILE = "state.json"
_LABELS_FILE = "labels.csv"
_METRICS_FILE = "metrics.jsonl"
_MATCHER_FILE = "matcher.bin"
_COMMITTEE_FILE = "committee.bin"
_CAND_FILE = "cand.csv"
_PROBS_FILE = "probs.csv"
_CONFIG_FILE = "config.txt"


def save_session(
    state: SessionState, cfg: SessionConfig, out_dir, config_text: str = ""
) -> None:
    """Write the full session to a directory (usable to resume labeling)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / _CONFIG_FILE).write_text(config_text, encoding="utf-8")
    with open(out / _LABELS_FILE, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("r_id", "s_id", "label", "source", "round"))
        for pair, label in state.labeled.items():
            writer.writerow(
                (
                    pair[0],
                    pair[1],
                    int(label.is_duplicate),
                    label.source.value,
                    state.labeled.round_of(pair),
                )
            )
    write_metrics(state.history, out / _METRICS_FILE)
    if state.head is not None:
        save_matcher(state.head, out / _MATCHER_FILE)
    if state.committee is not None:
        save_committee(state.committee, cfg.committee.mask_keep_prob, out / _COMMITTEE_FILE)
    if state.cand is not None:
        write_candidates(state.cand, out / _CAND_FILE)
        with open(out / _PROBS_FILE, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(("r_id", "s_id", "prob"))
            for pair, _ in state.cand.pairs:
                writer.writerow((pair[0], pair[1], repr(state.probs[pair])))
    blob = {
        "round": state.round,
        "pending": [list(p) for p in state.pending],
        "pending_decisions": [[p[0], p[1], d] for p, d in state.pending_decisions.items()],
        "pending_auto": [
            [p[0], p[1], label.value.value, label.source.value] for p, label in state.pending_auto
        ],
        "pending_times": state.pending_times,
        "cum_matcher_time": state.cum_matcher_time,
        "cum_committee_time": state.cum_committee_time,
    }
    (out / _STATE_FILE).write_text(json.dumps(blob, indent=2), encoding="utf-8")


def load_session(out_dir) -> SessionState:
    """Rebuild a session saved by :func:`save_session`."""
    out = Path(out_dir)
    labeled = LabeledSet()
    with open(out / _LABELS_FILE, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            pair = (int(row["r_id"]), int(row["s_id"]))
            value = LabelValue.DUPLICATE if row["label"] == "1" else LabelValue.NON_DUPLICATE
            labeled.add(
                pair, Label(value, LabelSource(row["source"])), round=int(row["round"])
            )
    state = SessionState(labeled=labeled)
    state.history = read_metrics(out / _METRICS_FILE)
    blob = json.loads((out / _STATE_FILE).read_text(encoding="utf-8"))
    state.round = blob["round"]
    state.pending = [tuple(p) for p in blob["pending"]]
    state.pending_decisions = {(p[0], p[1]): p[2] for p in blob["pending_decisions"]}
    state.pending_auto = [
        ((p[0], p[1]), Label(LabelValue(p[2]), LabelSource(p[3]))) for p in blob["pending_auto"]
    ]
    state.pending_times = blob["pending_times"]
    state.cum_matcher_time = blob["cum_matcher_time"]
    state.cum_committee_time = blob["cum_committee_time"]
    if (out / _MATCHER_FILE).is_file():
        state.head = load_matcher(out / _MATCHER_FILE)
    if (out / _COMMITTEE_FILE).is_file():
        state.committee, _ = load_committee(out / _COMMITTEE_FILE)
    if (out / _CAND_FILE).is_file():
        pairs = []
        with open(out / _CAND_FILE, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                pairs.append(((int(row["r_id"]), int(row["s_id"])), float(row["min_dist"])))
        state.cand = CandidateSet(pairs=pairs)
        with open(out / _PROBS_FILE, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                state.probs[(int(row["r_id"]), int(row["s_id"]))] = float(row["prob"])
    return state
