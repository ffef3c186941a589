"""Seeded synthetic catalog generator for two-list deduplication.

List R holds clean product records; list S mixes perturbed copies of R
records (typos, abbreviations, dropped words, re-formatted prices,
partially rewritten filler text) with distractors that reuse the same
brands and sometimes nouns.  The generator also emits train/test pair
files so the output directory is loadable like any other dataset.

Evidence design: the model code's digits are the entity fingerprint.
Copies may reformat the code (case, hyphen) but never alter its digits,
while distractors always draw fresh digits, so code overlap separates
true matches from look-alikes.  A small fraction of records on the S
side omit the code entirely (matching real listings that skip model
info); those pairs are genuinely ambiguous and keep the matcher's
mid-confidence band populated.  The filler field is deliberately heavy:
it gives every record a chunk of uninformative character mass, so
untrained distances are noisy and blocking genuinely benefits from
supervision.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import PairId, Record, RecordStore, Side, write_pairs, write_store

SCHEMA = ("name", "brand", "model", "category", "price")

BRANDS = (
    "acme", "zenith", "nortek", "quanta", "solara", "vextron", "peakline",
    "bluecrest", "omnitech", "starfield", "ironwood", "calypso", "nebular",
    "trailhead", "vantage", "kestrel", "lumio", "arcadia", "fenwick", "dorado",
)
NOUNS = (
    "speaker", "keyboard", "monitor", "printer", "router", "headphones",
    "charger", "webcam", "microphone", "projector", "scanner", "tablet",
    "drive", "adapter", "mouse", "dock", "camera", "turntable", "amplifier",
    "subwoofer", "soundbar", "earbuds", "console", "controller",
)
ADJS = (
    "wireless", "portable", "compact", "premium", "classic", "digital",
    "ergonomic", "foldable", "rugged", "ultra", "slim", "pro", "mini",
    "advanced", "smart", "gaming", "studio", "travel",
)
# Deliberately small vocabulary: the filler occupies a low-dimensional
# subspace of the embedding, so supervision can learn to discount it,
# while per-record draws still randomize untrained distances.
FILLER = (
    "series", "edition", "bundle", "warranty", "official", "genuine",
    "retail", "boxed", "sealed", "refurbished", "certified", "clearance",
    "exclusive", "standard", "limited", "original", "household", "imported",
)


@dataclass
class SynthConfig:
    n_r: int = 2000
    n_s: int = 2000
    n_dups: int = 500
    seed: int = 7
    test_dups: int = 150
    test_negs: int = 350
    train_dups: int = 200
    train_negs: int = 400
    filler_min: int = 3
    filler_max: int = 4
    # distractor hardness: chance a distractor copies its source's noun
    same_noun_prob: float = 0.35
    # chance an S-side record omits its model code (applied to copies and
    # distractors alike, so a missing code is ambiguity, not a label leak)
    drop_model_prob: float = 0.15
    # fraction of copies rewritten so heavily (fresh filler, terse name)
    # that raw-embedding distance no longer finds them; retrieving these
    # is what a trained blocker is for
    deep_copy_prob: float = 0.45

    def __post_init__(self) -> None:
        if self.n_dups > min(self.n_r, self.n_s):
            raise ValueError("more duplicates than records")
        if self.test_dups + self.train_dups > self.n_dups:
            raise ValueError("train/test duplicate splits exceed the duplicate count")


def _choice(rng: np.random.Generator, seq) -> str:
    return seq[int(rng.integers(len(seq)))]


def _model_code(rng: np.random.Generator) -> str:
    letters = "".join(chr(65 + int(rng.integers(26))) for _ in range(2))
    digits = "".join(str(int(rng.integers(10))) for _ in range(4))
    return f"{letters}-{digits}"


def _filler_words(rng: np.random.Generator, cfg: SynthConfig) -> list[str]:
    n = int(rng.integers(cfg.filler_min, cfg.filler_max + 1))
    return [_choice(rng, FILLER) for _ in range(n)]


def _remix_filler(
    words: list[str], rng: np.random.Generator, cfg: SynthConfig, keep: float
) -> list[str]:
    """Copy the source filler, keeping each word with probability ``keep``
    and topping up with fresh draws."""
    out = [w for w in words if rng.random() < keep]
    n = int(rng.integers(cfg.filler_min, cfg.filler_max + 1))
    while len(out) < n:
        out.append(_choice(rng, FILLER))
    return out[:n]


def _typo(word: str, rng: np.random.Generator) -> str:
    if len(word) < 3:
        return word
    i = int(rng.integers(len(word) - 1))
    op = int(rng.integers(3))
    if op == 0:  # swap adjacent
        return word[:i] + word[i + 1] + word[i] + word[i + 2 :]
    if op == 1:  # drop
        return word[:i] + word[i + 1 :]
    return word[: i + 1] + word[i] + word[i + 1 :]  # double


def _abbrev(word: str) -> str:
    return word[:3] if len(word) > 4 else word


def _terse_name(
    brand: str, adj: str, noun: str, rng: np.random.Generator
) -> str:
    """Heavily shortened listing title: most words abbreviated or gone."""
    words = []
    if rng.random() < 0.5:
        words.append(_abbrev(brand) if rng.random() < 0.6 else brand)
    if rng.random() < 0.4:
        words.append(adj if rng.random() < 0.5 else _abbrev(adj))
    words.append(noun if rng.random() < 0.7 else _abbrev(noun))
    return " ".join(words)


def _perturb_name(name: str, rng: np.random.Generator) -> str:
    words = name.split()
    out = []
    for w in words:
        u = rng.random()
        if u < 0.15:
            out.append(_typo(w, rng))
        elif u < 0.25:
            out.append(_abbrev(w))
        else:
            out.append(w)
    if len(out) > 2 and rng.random() < 0.15:
        del out[int(rng.integers(1, len(out)))]
    if len(out) > 1 and rng.random() < 0.15:
        i = int(rng.integers(len(out) - 1))
        out[i], out[i + 1] = out[i + 1], out[i]
    return " ".join(out)


def _perturb_model(model: str, rng: np.random.Generator) -> str:
    """Reformat only: the digits are the entity's fingerprint and survive."""
    u = rng.random()
    if u < 0.3:
        return model.lower()
    if u < 0.5:
        return model.replace("-", "")
    if u < 0.6:
        return model.replace("-", "").lower()
    return model


def _format_price(value: float, rng: np.random.Generator) -> str:
    u = rng.random()
    if u < 0.4:
        return f"{value:.2f}"
    if u < 0.65:
        return f"${value:.2f}"
    if u < 0.85:
        return f"{value:.2f} usd"
    return f"{value:.0f}"


def _record(rec_id: int, name: str, brand: str, model: str, category: str, price: str) -> Record:
    return Record(
        id=rec_id,
        attributes=(
            ("name", name),
            ("brand", brand),
            ("model", model),
            ("category", category),
            ("price", price),
        ),
    )


@dataclass
class Catalog:
    store_r: RecordStore
    store_s: RecordStore
    dup_pairs: list[PairId]
    hard_neg_pairs: list[PairId]


def build_catalog(cfg: SynthConfig | None = None) -> Catalog:
    """Generate both record lists and the gold pair structure in memory."""
    cfg = cfg or SynthConfig()
    rng = np.random.default_rng([cfg.seed, 0x5E17])

    r_records: list[Record] = []
    r_meta = []  # (brand, noun, adj, model, filler words, price_value)
    for i in range(cfg.n_r):
        brand = _choice(rng, BRANDS)
        noun = _choice(rng, NOUNS)
        adj = _choice(rng, ADJS)
        model = _model_code(rng)
        filler = _filler_words(rng, cfg)
        price_value = float(np.round(rng.uniform(5.0, 500.0), 2))
        name = f"{brand} {adj} {noun} {model}"
        r_records.append(
            _record(i, name, brand, model, " ".join(filler), _format_price(price_value, rng))
        )
        r_meta.append((brand, noun, adj, model, filler, price_value))

    dup_sources = rng.choice(cfg.n_r, size=cfg.n_dups, replace=False)
    s_payload: list[tuple[Record, int]] = []  # (record-sans-id, source r row or -1)
    for src in dup_sources:
        brand, noun, adj, model, filler, price_value = r_meta[src]
        out_model = "" if rng.random() < cfg.drop_model_prob else _perturb_model(model, rng)
        if rng.random() < cfg.deep_copy_prob:
            name = _terse_name(brand, adj, noun, rng)
            keep = rng.uniform(0.0, 0.12)
        else:
            name = _perturb_name(f"{brand} {adj} {noun}", rng)
            keep = rng.uniform(0.5, 0.95)
        if out_model:
            name = f"{name} {_perturb_model(model, rng)}"
        new_price = price_value if rng.random() < 0.7 else price_value + float(rng.integers(-3, 4))
        rec = _record(
            -1,
            name,
            brand if rng.random() < 0.6 else _abbrev(brand),
            out_model,
            " ".join(_remix_filler(filler, rng, cfg, keep)),
            _format_price(max(new_price, 1.0), rng),
        )
        s_payload.append((rec, int(src)))

    n_distract = cfg.n_s - cfg.n_dups
    distract_sources = rng.integers(0, cfg.n_r, size=n_distract)
    for src in distract_sources:
        brand, noun, _, _, _, _ = r_meta[src]
        use_noun = noun if rng.random() < cfg.same_noun_prob else _choice(rng, NOUNS)
        adj = _choice(rng, ADJS)
        out_model = "" if rng.random() < cfg.drop_model_prob else _model_code(rng)
        name = f"{brand} {adj} {use_noun}"
        if out_model:
            name = f"{name} {out_model}"
        rec = _record(
            -1,
            name,
            brand,
            out_model,
            " ".join(_filler_words(rng, cfg)),
            _format_price(float(np.round(rng.uniform(5.0, 500.0), 2)), rng),
        )
        s_payload.append((rec, int(src)))

    order = rng.permutation(len(s_payload))
    s_records: list[Record] = []
    dup_pairs: list[PairId] = []
    hard_neg_pairs: list[PairId] = []
    for new_id, old_pos in enumerate(order):
        rec, src = s_payload[old_pos]
        s_records.append(Record(id=new_id, attributes=rec.attributes))
        if old_pos < cfg.n_dups:
            dup_pairs.append((src, new_id))
        else:
            hard_neg_pairs.append((src, new_id))

    return Catalog(
        store_r=RecordStore(side=Side.R, schema=SCHEMA, records=r_records),
        store_s=RecordStore(side=Side.S, schema=SCHEMA, records=s_records),
        dup_pairs=sorted(dup_pairs),
        hard_neg_pairs=sorted(hard_neg_pairs),
    )


def write_dataset(dir_path, cfg: SynthConfig | None = None) -> Catalog:
    """Generate and write a loadable dataset directory; returns the catalog."""
    cfg = cfg or SynthConfig()
    catalog = build_catalog(cfg)
    rng = np.random.default_rng([cfg.seed, 0x3A11])

    root = Path(dir_path)
    root.mkdir(parents=True, exist_ok=True)
    write_store(catalog.store_r, root / "tableA.csv")
    write_store(catalog.store_s, root / "tableB.csv")

    dup_order = rng.permutation(len(catalog.dup_pairs))
    test_dups = [catalog.dup_pairs[i] for i in dup_order[: cfg.test_dups]]
    train_dups = [
        catalog.dup_pairs[i] for i in dup_order[cfg.test_dups : cfg.test_dups + cfg.train_dups]
    ]
    neg_order = rng.permutation(len(catalog.hard_neg_pairs))
    test_negs = [catalog.hard_neg_pairs[i] for i in neg_order[: cfg.test_negs]]
    train_negs = [
        catalog.hard_neg_pairs[i] for i in neg_order[cfg.test_negs : cfg.test_negs + cfg.train_negs]
    ]

    write_pairs(
        [(p, True) for p in test_dups] + [(p, False) for p in test_negs],
        root / "test.csv",
    )
    write_pairs(
        [(p, True) for p in train_dups] + [(p, False) for p in train_negs],
        root / "train.csv",
    )
    with open(root / "matches.csv", "w", newline="", encoding="utf-8") as fh:
        fh.write("ltable_id,rtable_id\n")
        for r_id, s_id in catalog.dup_pairs:
            fh.write(f"{r_id},{s_id}\n")
    return catalog
