"""Synthetic desk-scale corpora for offline training, fixtures, and tests.

The real training data (licensed song corpora, live model output) cannot be
redistributed, so experiments and the offline pipeline run on progressions
drawn from two hand-written first-order chord chains: a "human" chain with
strongly functional pop/jazz movement, and a flatter, more chromatic chain
that mimics the higher-entropy output of a general-purpose language model.
"""

from __future__ import annotations

import numpy as np

from .chords import (
    ALLOWED_KEY_ROOTS,
    Key,
    Progression,
    parse_key,
    parse_mode,
    parse_progression,
    transpose_progression,
)
from .corpus import CorpusRecord, TokenVocab, progression_to_record

__all__ = [
    "HUMAN_CHAIN",
    "LLM_CHAIN",
    "sample_chain_progression",
    "synthetic_human_corpus",
    "synthetic_llm_corpus",
    "uniform_random_progressions",
]

# (start distribution, transition table); weights are relative.
HUMAN_CHAIN = (
    {"C": 4.0, "Am": 2.0, "F": 2.0, "G": 1.0, "Dm": 1.0, "Em": 0.5, "Cmaj7": 0.5},
    {
        "C": {"F": 3.0, "G": 2.0, "Am": 3.0, "Dm": 1.5, "Em": 1.0, "Cmaj7": 0.5, "Fmaj7": 0.5},
        "Am": {"F": 3.0, "G": 2.0, "Dm": 1.5, "C": 2.0, "Em": 1.0},
        "F": {"G": 3.0, "C": 3.0, "Am": 1.5, "Dm": 1.0, "G7": 0.5},
        "G": {"C": 4.0, "Am": 2.0, "F": 1.0, "Em": 0.5},
        "Dm": {"G": 3.0, "G7": 1.5, "C": 1.0, "Am": 1.0, "Em": 0.5},
        "Em": {"F": 2.0, "Am": 2.0, "Dm": 1.0, "C": 1.0},
        "G7": {"C": 4.0, "Am": 1.0},
        "Cmaj7": {"F": 2.0, "Am": 1.0, "Dm": 1.0},
        "Fmaj7": {"G": 1.5, "Em": 1.0, "C": 1.0},
    },
)

# Flatter transitions over a wider, more chromatic palette.
_LLM_STATES = (
    "C", "Cmaj7", "C7", "C6/9", "Csus4", "Caug", "Dm7", "D7", "Ebmaj7", "E7",
    "Em7", "Fm", "Fmaj7", "F#dim", "G7", "Gsus4", "Abmaj7", "Am7", "A7", "Bm7b5", "Bb",
)
LLM_CHAIN = (
    {state: 1.0 for state in _LLM_STATES},
    {
        state: {other: (2.0 if other in ("C", "Fmaj7", "G7", "Am7") else 1.0)
                for other in _LLM_STATES if other != state}
        for state in _LLM_STATES
    },
)


def _draw(weights: dict[str, float], rng: np.random.Generator) -> str:
    names = sorted(weights)
    probs = np.asarray([weights[n] for n in names], dtype=np.float64)
    return names[int(rng.choice(len(names), p=probs / probs.sum()))]


def sample_chain_progression(
    chain: tuple[dict, dict],
    bars: int,
    rng: np.random.Generator,
    key: Key | None = None,
) -> Progression:
    start, table = chain
    tokens = [_draw(start, rng)]
    while len(tokens) < bars:
        tokens.append(_draw(table[tokens[-1]], rng))
    return parse_progression(" ".join(tokens), key or parse_key("C"), parse_mode("Maj"))


def synthetic_human_corpus(
    n: int, rng: np.random.Generator, bars: int = 4, spread_keys: bool = True
) -> list[CorpusRecord]:
    """Functional-harmony records; keys vary (transposed out of C) unless disabled."""
    records = []
    for _ in range(n):
        p = sample_chain_progression(HUMAN_CHAIN, bars, rng)
        if spread_keys:
            target = Key(ALLOWED_KEY_ROOTS[int(rng.integers(len(ALLOWED_KEY_ROOTS)))])
            p = transpose_progression(p, target)
        records.append(progression_to_record(p, source="human_corpus"))
    return records


def synthetic_llm_corpus(
    n: int, rng: np.random.Generator, bars: int = 4, human_mix: float = 0.5
) -> list[CorpusRecord]:
    """Higher-entropy, chromatically flavored records, all in C.

    A ``human_mix`` fraction is drawn from the functional chain instead,
    mirroring how a general model's output overlaps human-like progressions;
    that overlap is what gives the acceptance ratios useful dynamic range.
    """
    records = []
    for _ in range(n):
        chain = HUMAN_CHAIN if rng.random() < human_mix else LLM_CHAIN
        records.append(
            progression_to_record(
                sample_chain_progression(chain, bars, rng), source="llm_generated"
            )
        )
    return records


def uniform_random_progressions(
    vocab: TokenVocab, n: int, bars: int, rng: np.random.Generator
) -> list[Progression]:
    """Progressions drawn uniformly over the non-reserved vocabulary."""
    key, mode = parse_key("C"), parse_mode("Maj")
    out = []
    for _ in range(n):
        tokens = [vocab.tokens[int(i)] for i in rng.integers(len(vocab.tokens), size=bars)]
        out.append(parse_progression(" ".join(tokens), key, mode))
    return out
