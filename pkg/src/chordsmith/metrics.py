"""Diversity and distribution-similarity metrics over chord-token sequences.

Self-BLEU treats each progression in a set as the hypothesis and the rest as
references; the set average is high when the set is repetitive and low when
it is diverse. Jensen-Shannon divergence compares unigram or bigram chord
distributions in base 2, so it ranges from 0 (identical) to 1 (disjoint
support). Both metrics operate on canonical chord-token strings, the same
identity the priors are trained on.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .chords import Progression

__all__ = [
    "OrderMismatch",
    "NGramDistribution",
    "bleu",
    "self_bleu",
    "jsd",
]


class OrderMismatch(ValueError):
    """The two distributions use different n-gram orders."""


TokenSeq = Sequence[str]


def _as_token_seqs(items: Iterable[Progression | TokenSeq]) -> list[tuple[str, ...]]:
    out = []
    for item in items:
        out.append(item.tokens() if isinstance(item, Progression) else tuple(item))
    return out


def _ngrams(tokens: TokenSeq, n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i: i + n]) for i in range(len(tokens) - n + 1)]


@dataclass(frozen=True)
class NGramDistribution:
    """Counts of order-1 or order-2 chord-token n-grams."""

    order: int
    counts: dict[tuple[str, ...], int]
    total: int

    @staticmethod
    def from_progressions(items: Iterable[Progression | TokenSeq], order: int) -> "NGramDistribution":
        if order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        counts: Counter = Counter()
        for tokens in _as_token_seqs(items):
            counts.update(_ngrams(tokens, order))
        return NGramDistribution(order=order, counts=dict(counts), total=sum(counts.values()))

    def prob(self, gram: tuple[str, ...]) -> float:
        return self.counts.get(gram, 0) / self.total


def jsd(a: NGramDistribution, b: NGramDistribution) -> float:
    """Base-2 Jensen-Shannon divergence between two n-gram distributions."""
    if a.order != b.order:
        raise OrderMismatch(f"order {a.order} vs {b.order}")
    if a.total == 0 or b.total == 0:
        raise ValueError("cannot compare an empty distribution")
    divergence = 0.0
    for gram in set(a.counts) | set(b.counts):
        pa, pb = a.prob(gram), b.prob(gram)
        m = 0.5 * (pa + pb)
        if pa > 0:
            divergence += 0.5 * pa * math.log2(pa / m)
        if pb > 0:
            divergence += 0.5 * pb * math.log2(pb / m)
    return min(max(divergence, 0.0), 1.0)


def _modified_precision(hyp: TokenSeq, refs: list[tuple[str, ...]], n: int) -> tuple[int, int]:
    hyp_counts = Counter(_ngrams(hyp, n))
    if not hyp_counts:
        return 0, 0
    max_ref: Counter = Counter()
    for ref in refs:
        for gram, count in Counter(_ngrams(ref, n)).items():
            max_ref[gram] = max(max_ref[gram], count)
    clipped = sum(min(count, max_ref[gram]) for gram, count in hyp_counts.items())
    return clipped, sum(hyp_counts.values())


def bleu(
    hypothesis: TokenSeq,
    references: list[TokenSeq],
    max_n: int = 4,
    smoothing_eps: float = 1e-9,
) -> float:
    """Sentence BLEU: clipped n-gram precisions, geometric mean, brevity penalty.

    Zero precisions are floored at ``smoothing_eps``; the n-gram order is
    capped at the hypothesis length so short progressions are not scored on
    orders they cannot contain.
    """
    if not references:
        raise ValueError("need at least one reference")
    hyp = tuple(hypothesis)
    refs = [tuple(r) for r in references]
    orders = min(max_n, len(hyp))
    if orders == 0:
        return 0.0
    log_sum = 0.0
    for n in range(1, orders + 1):
        clipped, total = _modified_precision(hyp, refs, n)
        precision = clipped / total if total else 0.0
        log_sum += math.log(max(precision, smoothing_eps))
    geo_mean = math.exp(log_sum / orders)
    c = len(hyp)
    r = min((abs(len(ref) - c), len(ref)) for ref in refs)[1]
    brevity = 1.0 if c >= r else math.exp(1.0 - r / c)
    return brevity * geo_mean


def self_bleu(
    items: Sequence[Progression | TokenSeq],
    max_n: int = 4,
    smoothing_eps: float = 1e-9,
) -> float:
    """Mean leave-one-out BLEU of a set against itself. Lower is more diverse."""
    seqs = _as_token_seqs(items)
    if len(seqs) < 2:
        raise ValueError("need at least two progressions")
    scores = [
        bleu(seq, seqs[:i] + seqs[i + 1:], max_n=max_n, smoothing_eps=smoothing_eps)
        for i, seq in enumerate(seqs)
    ]
    return sum(scores) / len(scores)
