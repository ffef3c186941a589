"""Round metrics: blocker recall, test-split P/R/F1, all-pairs P/R/F1.

Serialized as JSON lines, one object per round:
``{round, labeled, recall_cand, test: {p, r, f1}, all: {p, r, f1},
times: {matcher, committee, index_retrieve, selection}}``.
The two training times are cumulative over rounds; the other two are
per-round measurements.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .data import PairId
from .errors import UndefinedMetricError

PHASES = ("matcher", "committee", "index_retrieve", "selection")


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _prf(tp: int, fp: int, fn: int) -> PRF:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return PRF(precision=p, recall=r, f1=f1_score(p, r))


def recall_cand(cand_pairs: set[PairId], dups: set[PairId]) -> float:
    """Fraction of gold duplicates surviving blocking."""
    if not dups:
        raise UndefinedMetricError("recall is undefined for an empty duplicate set")
    return len(cand_pairs & dups) / len(dups)


def prf_test(
    predictions: set[PairId], test_pairs: Sequence[tuple[PairId, bool]]
) -> PRF:
    """P/R/F1 over the held-out test pairs.

    A test pair counts as predicted positive iff it is in
    ``predictions`` (i.e. retrieved in cand with probability > 0.5).
    """
    tp = fp = fn = 0
    for pair, is_dup in test_pairs:
        predicted = pair in predictions
        if predicted and is_dup:
            tp += 1
        elif predicted and not is_dup:
            fp += 1
        elif not predicted and is_dup:
            fn += 1
    return _prf(tp, fp, fn)


def prf_allpairs(predictions: set[PairId], dups: set[PairId]) -> PRF:
    """P/R/F1 of the final predicted duplicates against the full gold set."""
    tp = len(predictions & dups)
    return _prf(tp, len(predictions) - tp, len(dups) - tp)


@dataclass
class RoundMetrics:
    round: int
    labeled: int
    recall_cand: float
    test: PRF
    all: PRF
    times: dict[str, float]

    def to_json(self) -> str:
        obj = {
            "round": self.round,
            "labeled": self.labeled,
            "recall_cand": self.recall_cand,
            "test": {"p": self.test.precision, "r": self.test.recall, "f1": self.test.f1},
            "all": {"p": self.all.precision, "r": self.all.recall, "f1": self.all.f1},
            "times": {phase: self.times.get(phase, 0.0) for phase in PHASES},
        }
        return json.dumps(obj, separators=(", ", ": "))

    @classmethod
    def from_json(cls, line: str) -> "RoundMetrics":
        obj = json.loads(line)
        return cls(
            round=obj["round"],
            labeled=obj["labeled"],
            recall_cand=obj["recall_cand"],
            test=PRF(obj["test"]["p"], obj["test"]["r"], obj["test"]["f1"]),
            all=PRF(obj["all"]["p"], obj["all"]["r"], obj["all"]["f1"]),
            times=dict(obj["times"]),
        )


def write_metrics(rounds: Iterable[RoundMetrics], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rm in rounds:
            fh.write(rm.to_json() + "\n")


def read_metrics(path: str | Path) -> list[RoundMetrics]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(RoundMetrics.from_json(line))
    return out
