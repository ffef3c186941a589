"""Domain model for records, pairs, labels and gold standards.

Datasets follow the DeepMatcher CSV layout: two record tables
(``tableA.csv``, ``tableB.csv``) with an ``id`` column plus attribute
columns, and labeled pair files (``test.csv``, optionally ``train.csv``
and ``valid.csv``) with ``ltable_id, rtable_id, label`` columns.  An
optional ``matches.csv`` lists extra gold duplicate pairs.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import DatasetFormatError, IntegrityError, ParseError

PairId = tuple[int, int]
"""A candidate pair ``(r_id, s_id)``; ordered lexicographically."""


class Side(enum.Enum):
    R = "R"
    S = "S"


class LabelValue(enum.Enum):
    DUPLICATE = "duplicate"
    NON_DUPLICATE = "non_duplicate"


class LabelSource(enum.Enum):
    SEED = "seed"
    ORACLE_SIMULATED = "oracle_simulated"
    ORACLE_HUMAN = "oracle_human"
    HIGH_CONFIDENCE_AUTO = "high_confidence_auto"


@dataclass(frozen=True)
class Label:
    value: LabelValue
    source: LabelSource

    @property
    def is_duplicate(self) -> bool:
        return self.value is LabelValue.DUPLICATE


@dataclass(frozen=True)
class Record:
    """One entity mention: a stable id plus ordered (name, value) attributes."""

    id: int
    attributes: tuple[tuple[str, str], ...]


@dataclass
class RecordStore:
    """An ordered, immutable-after-load list of records for one side.

    Every record conforms to ``schema`` (missing values are stored as
    empty strings).  Row order is load order and is what embedding
    matrices are aligned with; ``row_of`` maps record ids back to rows.
    """

    side: Side
    schema: tuple[str, ...]
    records: list[Record] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._row_by_id = {rec.id: i for i, rec in enumerate(self.records)}
        if len(self._row_by_id) != len(self.records):
            raise IntegrityError(f"duplicate record id in {self.side.value} store")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[Record]:
        return iter(self.records)

    def __getitem__(self, row: int) -> Record:
        return self.records[row]

    def row_of(self, record_id: int) -> int:
        return self._row_by_id[record_id]

    def by_id(self, record_id: int) -> Record:
        return self.records[self._row_by_id[record_id]]

    @property
    def ids(self) -> list[int]:
        return [rec.id for rec in self.records]


@dataclass
class GoldStandard:
    """Ground truth: the full duplicate set plus the held-out test split.

    ``test_pairs`` must never be queried during example selection;
    ``nondups`` are label-0 pairs from the train/valid files and are the
    preferred source of seed negatives.
    """

    dups: set[PairId]
    test_pairs: list[tuple[PairId, bool]]
    nondups: set[PairId] = field(default_factory=set)

    @property
    def test_pair_ids(self) -> set[PairId]:
        return {pair for pair, _ in self.test_pairs}


class LabeledSet:
    """The growing labeled pair set T; a pair is labeled at most once.

    Also remembers the round each label arrived in (0 for seeds), which
    checkpoint dumps expose.
    """

    def __init__(self) -> None:
        self._entries: dict[PairId, Label] = {}
        self._rounds: dict[PairId, int] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, pair: PairId) -> bool:
        return pair in self._entries

    def __getitem__(self, pair: PairId) -> Label:
        return self._entries[pair]

    def items(self) -> Iterable[tuple[PairId, Label]]:
        return self._entries.items()

    def round_of(self, pair: PairId) -> int:
        return self._rounds[pair]

    def add(self, pair: PairId, label: Label, round: int = 0) -> None:
        if pair in self._entries:
            raise IntegrityError(f"pair {pair} labeled twice")
        self._entries[pair] = label
        self._rounds[pair] = round

    @property
    def positives(self) -> list[PairId]:
        return [p for p, lab in self._entries.items() if lab.is_duplicate]

    @property
    def negatives(self) -> list[PairId]:
        return [p for p, lab in self._entries.items() if not lab.is_duplicate]

    def human_labeled_count(self) -> int:
        """Entries labeled by a person or the simulated stand-in (incl. seeds)."""
        return sum(
            1
            for lab in self._entries.values()
            if lab.source is not LabelSource.HIGH_CONFIDENCE_AUTO
        )


def serialize_record(rec: Record) -> str:
    """Flatten a record to the single text form fed to the encoder.

    Attribute names and values are concatenated in order with single
    spaces; attributes with empty values are skipped entirely (name
    included), so unrelated records do not share placeholder tokens.
    """
    parts: list[str] = []
    for name, value in rec.attributes:
        if value:
            parts.append(name)
            parts.append(value)
    return " ".join(parts)


def record_attributes(rec: Record) -> list[list[str]]:
    """Attributes as JSON-ready ``[name, value]`` lists (queue rendering)."""
    return [[name, value] for name, value in rec.attributes]


def _read_table(path: Path, side: Side) -> RecordStore:
    if not path.is_file():
        raise DatasetFormatError(f"missing table file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError(f"empty table file: {path}") from None
        if not header or header[0] != "id":
            raise DatasetFormatError(f"{path}: first column must be 'id'")
        schema = tuple(header[1:])
        records = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rec_id = int(row[0])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: non-integer id {row[0]!r}") from None
            values = row[1:]
            if len(values) < len(schema):
                values = values + [""] * (len(schema) - len(values))
            elif len(values) > len(schema):
                raise DatasetFormatError(f"{path}:{lineno}: more values than columns")
            records.append(Record(id=rec_id, attributes=tuple(zip(schema, values))))
    return RecordStore(side=side, schema=schema, records=records)


def _read_pairs(path: Path) -> list[tuple[PairId, bool]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"ltable_id", "rtable_id", "label"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise DatasetFormatError(f"{path}: expected columns ltable_id, rtable_id, label")
        out = []
        for lineno, row in enumerate(reader, start=2):
            try:
                pair = (int(row["ltable_id"]), int(row["rtable_id"]))
            except (TypeError, ValueError):
                raise ParseError(f"{path}:{lineno}: non-integer pair ids") from None
            if row["label"] not in ("0", "1"):
                raise ParseError(f"{path}:{lineno}: label {row['label']!r} not in {{0,1}}")
            out.append((pair, row["label"] == "1"))
    return out


def _read_matches(path: Path) -> set[PairId]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"ltable_id", "rtable_id"}.issubset(reader.fieldnames):
            raise DatasetFormatError(f"{path}: expected columns ltable_id, rtable_id")
        pairs = set()
        for lineno, row in enumerate(reader, start=2):
            try:
                pairs.add((int(row["ltable_id"]), int(row["rtable_id"])))
            except (TypeError, ValueError):
                raise ParseError(f"{path}:{lineno}: non-integer pair ids") from None
    return pairs


def load_dataset(dir_path: str | Path) -> tuple[RecordStore, RecordStore, GoldStandard]:
    """Load a DeepMatcher-layout dataset directory.

    Returns the two record stores and the gold standard.  The duplicate
    set is the union of label-1 pairs across all provided pair files
    plus the optional ``matches.csv``; label-0 pairs from train/valid
    become ``nondups``.

    Raises
    ------
    DatasetFormatError
        If a required file is missing or malformed.
    IntegrityError
        If a table contains a duplicated id or a pair file references an
        unknown record.
    ParseError
        If an id or label does not parse.
    """
    root = Path(dir_path)
    if not root.is_dir():
        raise DatasetFormatError(f"dataset directory not found: {root}")
    store_r = _read_table(root / "tableA.csv", Side.R)
    store_s = _read_table(root / "tableB.csv", Side.S)

    test_path = root / "test.csv"
    if not test_path.is_file():
        raise DatasetFormatError(f"missing pair file: {test_path}")
    test_pairs = _read_pairs(test_path)

    dups: set[PairId] = {pair for pair, pos in test_pairs if pos}
    nondups: set[PairId] = set()
    for name in ("train.csv", "valid.csv"):
        path = root / name
        if path.is_file():
            for pair, pos in _read_pairs(path):
                (dups if pos else nondups).add(pair)
    matches_path = root / "matches.csv"
    if matches_path.is_file():
        dups |= _read_matches(matches_path)

    r_ids = set(store_r._row_by_id)
    s_ids = set(store_s._row_by_id)
    for pair in dups | nondups | {p for p, _ in test_pairs}:
        if pair[0] not in r_ids or pair[1] not in s_ids:
            raise IntegrityError(f"pair {pair} references a missing record")

    return store_r, store_s, GoldStandard(dups=dups, test_pairs=test_pairs, nondups=nondups)


def write_store(store: RecordStore, path: str | Path) -> None:
    """Write a record table back to CSV (RFC 4180 quoting, UTF-8)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("id",) + store.schema)
        for rec in store.records:
            writer.writerow([rec.id] + [v for _, v in rec.attributes])


def write_pairs(pairs: Iterable[tuple[PairId, bool]], path: str | Path) -> None:
    """Write a labeled pair file (``ltable_id, rtable_id, label``)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("ltable_id", "rtable_id", "label"))
        for (r_id, s_id), pos in pairs:
            writer.writerow((r_id, s_id, int(pos)))
