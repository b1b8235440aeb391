"""Corpus ingestion, normalization, and the shared chord-token vocabulary.

Corpora are JSONL files, one record per line:

    {"key": "C", "mode": "Maj", "chords": ["C", "Am", "F", "G"], "source": "human_corpus"}

Chord strings are canonicalized on load, so the vocabulary and every encoded
sequence use one spelling per chord. Human and model-generated corpora share
a single vocabulary (union plus an UNK bucket) so that any candidate sequence
gets a finite log-probability under both priors.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chords import (
    Key,
    Mode,
    Progression,
    canonicalize,
    parse_key,
    parse_mode,
    parse_progression,
    transpose_progression,
)

__all__ = [
    "FormatError",
    "SOURCES",
    "CorpusRecord",
    "CorpusLoadResult",
    "load_corpus",
    "save_corpus",
    "normalize_to_c",
    "record_to_progression",
    "progression_to_record",
    "TokenVocab",
    "build_vocab",
    "encode",
    "decode",
    "DatasetSplit",
    "make_split",
]

log = logging.getLogger(__name__)

SOURCES = ("human_corpus", "llm_generated")

PAD, BOS, EOS, UNK = "PAD", "BOS", "EOS", "UNK"
RESERVED = (PAD, BOS, EOS, UNK)
PAD_ID, BOS_ID, EOS_ID, UNK_ID = range(4)

VOCAB_FORMAT_VERSION = 1


class FormatError(ValueError):
    """Raised when a corpus file is empty or mostly malformed."""


@dataclass(frozen=True)
class CorpusRecord:
    key: Key
    mode: Mode
    chords: tuple[str, ...]
    source: str = "human_corpus"

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")

    def to_json_obj(self) -> dict:
        return {
            "key": self.key.render(),
            "mode": self.mode.render(),
            "chords": list(self.chords),
            "source": self.source,
        }


def record_to_progression(record: CorpusRecord) -> Progression:
    return parse_progression(" ".join(record.chords), record.key, record.mode)


def progression_to_record(p: Progression, source: str) -> CorpusRecord:
    return CorpusRecord(key=p.key, mode=p.mode, chords=p.tokens(), source=source)


def _parse_line(obj: dict, default_source: str | None) -> CorpusRecord:
    key = parse_key(obj["key"])
    mode = parse_mode(obj["mode"])
    chords = obj["chords"]
    if not isinstance(chords, list) or not chords:
        raise ValueError("'chords' must be a non-empty list")
    canonical = tuple(canonicalize(str(c)) for c in chords)
    source = obj.get("source", default_source)
    if source is None:
        raise ValueError("missing 'source'")
    return CorpusRecord(key=key, mode=mode, chords=canonical, source=source)


@dataclass
class CorpusLoadResult:
    records: list[CorpusRecord]
    skipped: list[tuple[int, str]]  # (1-based line number, reason)

    @property
    def skipped_count(self) -> int:
        return len(self.skipped)


def load_corpus(path: str | Path, default_source: str | None = None) -> CorpusLoadResult:
    """Load a JSONL corpus, skipping malformed lines.

    Skipped lines are logged with their line numbers and reported in the
    result. Raises :class:`FormatError` for an empty file or when more than
    10% of non-blank lines are malformed.
    """
    records: list[CorpusRecord] = []
    skipped: list[tuple[int, str]] = []
    total = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            total += 1
            try:
                records.append(_parse_line(json.loads(line), default_source))
            except (ValueError, KeyError, TypeError) as err:
                skipped.append((lineno, str(err)))
                log.warning("%s:%d skipped: %s", path, lineno, err)
    if total == 0:
        raise FormatError(f"{path}: empty corpus file")
    if len(skipped) > 0.10 * total:
        raise FormatError(
            f"{path}: {len(skipped)}/{total} lines malformed (first: "
            f"line {skipped[0][0]}: {skipped[0][1]})"
        )
    return CorpusLoadResult(records=records, skipped=skipped)


def save_corpus(records: list[CorpusRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json_obj(), sort_keys=True) + "\n")


def normalize_to_c(records: list[CorpusRecord], bars: int | None = 4) -> list[CorpusRecord]:
    """Transpose every record to key C (mode preserved) and filter bar count.

    Records whose chord count differs from ``bars`` are dropped from the
    returned training set; pass ``bars=None`` to keep all lengths. Idempotent.
    """
    key_c = parse_key("C")
    out = []
    for rec in records:
        if bars is not None and len(rec.chords) != bars:
            continue
        p = transpose_progression(record_to_progression(rec), key_c)
        out.append(CorpusRecord(key=key_c, mode=rec.mode, chords=p.tokens(), source=rec.source))
    return out


@dataclass(frozen=True)
class TokenVocab:
    """Bijective map between canonical chord tokens and integer ids.

    Ids 0..3 are the reserved PAD/BOS/EOS/UNK tokens; chord tokens follow in
    frequency-descending, then lexicographic, order so the mapping is a pure
    function of the corpus content.
    """

    tokens: tuple[str, ...]  # non-reserved, in id order
    token_to_id: dict[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        mapping = {tok: i for i, tok in enumerate(RESERVED)}
        for i, tok in enumerate(self.tokens):
            if tok in mapping:
                raise ValueError(f"duplicate or reserved token {tok!r}")
            mapping[tok] = len(RESERVED) + i
        object.__setattr__(self, "token_to_id", mapping)

    def __len__(self) -> int:
        return len(RESERVED) + len(self.tokens)

    @property
    def version(self) -> str:
        payload = json.dumps([list(RESERVED), list(self.tokens)], separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()[:12]

    def id_of(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def token_of(self, idx: int) -> str:
        if idx < len(RESERVED):
            return RESERVED[idx]
        return self.tokens[idx - len(RESERVED)]

    def to_dict(self) -> dict:
        return {
            "format_version": VOCAB_FORMAT_VERSION,
            "version": self.version,
            "reserved": list(RESERVED),
            "tokens": list(self.tokens),
        }

    @staticmethod
    def from_dict(obj: dict) -> "TokenVocab":
        if obj.get("format_version") != VOCAB_FORMAT_VERSION:
            raise FormatError(f"unsupported vocab format {obj.get('format_version')!r}")
        if tuple(obj["reserved"]) != RESERVED:
            raise FormatError("vocab reserved tokens do not match")
        vocab = TokenVocab(tokens=tuple(obj["tokens"]))
        if "version" in obj and obj["version"] != vocab.version:
            raise FormatError("vocab version stamp does not match content")
        return vocab

    def save(self, path: str | Path) -> None:
        # sort_keys + fixed separators keep the file byte-stable across runs
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")

    @staticmethod
    def load(path: str | Path) -> "TokenVocab":
        with open(path, encoding="utf-8") as fh:
            return TokenVocab.from_dict(json.load(fh))


def build_vocab(records: list[CorpusRecord], min_freq: int = 1) -> TokenVocab:
    """Shared vocabulary over the union of all records' chord tokens."""
    if not records:
        raise ValueError("need at least one record to build a vocabulary")
    counts: dict[str, int] = {}
    for rec in records:
        for tok in rec.chords:
            counts[tok] = counts.get(tok, 0) + 1
    kept = [tok for tok, n in counts.items() if n >= min_freq]
    kept.sort(key=lambda tok: (-counts[tok], tok))
    return TokenVocab(tokens=tuple(kept))


def encode(p: Progression, vocab: TokenVocab) -> list[int]:
    """BOS-prefixed, EOS-terminated id sequence; out-of-vocab chords map to UNK."""
    return [BOS_ID] + [vocab.id_of(tok) for tok in p.tokens()] + [EOS_ID]


def encode_tokens(tokens: tuple[str, ...] | list[str], vocab: TokenVocab) -> list[int]:
    return [BOS_ID] + [vocab.id_of(tok) for tok in tokens] + [EOS_ID]


def decode(ids: list[int], vocab: TokenVocab) -> list[str]:
    """Chord token strings for ``ids``, dropping framing tokens; UNK stays literal."""
    out = []
    for idx in ids:
        if idx in (PAD_ID, BOS_ID, EOS_ID):
            continue
        out.append(vocab.token_of(idx))
    return out


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[tuple[int, ...], ...]
    validation: tuple[tuple[int, ...], ...]
    ratio: float
    seed: int


def make_split(sequences: list[list[int]], ratio: float = 0.9, seed: int = 0) -> DatasetSplit:
    """Disjoint shuffled train/validation split, reproducible from the seed."""
    if not 0.0 < ratio <= 1.0:
        raise ValueError("ratio must be in (0, 1]")
    order = np.random.default_rng(seed).permutation(len(sequences))
    cut = max(1, int(round(ratio * len(sequences)))) if sequences else 0
    train = tuple(tuple(sequences[i]) for i in order[:cut])
    validation = tuple(tuple(sequences[i]) for i in order[cut:])
    return DatasetSplit(train=train, validation=validation, ratio=ratio, seed=seed)
