"""Experiment runners: prompting-diversity and distribution-coherence studies.

The diversity study compares Self-BLEU of progression sets produced by one
batched "generate N diverse progressions" call against sets built from N
independent single-progression calls. The coherence study measures unigram
and bigram Jensen-Shannon divergence between a reference corpus (normalized
to C) and each generation condition.
"""

from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .assets import load_keyword_list
from .chords import Progression, parse_key, parse_mode
from .corpus import CorpusRecord, record_to_progression
from .llm import ChatProvider, KeywordSet, generate_candidate_single, generate_candidates_batch
from .metrics import NGramDistribution, jsd, self_bleu
from .sampler import InsufficientData

__all__ = [
    "ExperimentReport",
    "run_diversity_experiment",
    "run_coherence_experiment",
]


@dataclass
class ExperimentReport:
    """Metric rows per condition plus everything needed to reproduce them."""

    kind: str
    conditions: dict[str, dict[str, float]]
    config: dict = field(default_factory=dict)
    seed: int | None = None

    def to_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "conditions": self.conditions, "config": self.config, "seed": self.seed},
            indent=2,
            sort_keys=True,
        )

    def to_markdown(self) -> str:
        metrics = sorted({m for row in self.conditions.values() for m in row})
        lines = ["| Condition | " + " | ".join(metrics) + " |"]
        lines.append("|" + "---|" * (len(metrics) + 1))
        for name, row in self.conditions.items():
            cells = [f"{row[m]:.4f}" if isinstance(row.get(m), float) else str(row.get(m, "")) for m in metrics]
            lines.append(f"| {name} | " + " | ".join(cells) + " |")
        return "\n".join(lines)

    def write_csv(self, path: str | Path) -> None:
        metrics = sorted({m for row in self.conditions.values() for m in row})
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["condition", *metrics])
            for name, row in self.conditions.items():
                writer.writerow([name, *(row.get(m, "") for m in metrics)])


def _draw_keywords(pool: list[str], rng: np.random.Generator, count: int = 3) -> KeywordSet:
    picks = [pool[int(i)] for i in rng.choice(len(pool), size=count, replace=False)]
    return KeywordSet.from_words(picks)


def run_diversity_experiment(
    provider: ChatProvider,
    pairs: int,
    set_size: int = 30,
    bars: int = 4,
    seed: int = 0,
    keyword_pool: list[str] | None = None,
    max_n: int = 4,
) -> ExperimentReport:
    """Self-BLEU of batched-prompt sets vs repeated single-prompt sets.

    Each pair draws fresh random keywords per provider call; all progressions
    are generated in C major.
    """
    if pairs < 1:
        raise InsufficientData("need at least one pair of sets")
    pool = keyword_pool or load_keyword_list()
    rng = np.random.default_rng(seed)
    key, mode = parse_key("C"), parse_mode("Maj")

    batch_scores, single_scores = [], []
    for _ in range(pairs):
        batch_set = generate_candidates_batch(
            _draw_keywords(pool, rng), key, mode, bars, set_size, provider
        )
        single_set = [
            generate_candidate_single(_draw_keywords(pool, rng), key, mode, bars, provider)
            for _ in range(set_size)
        ]
        batch_scores.append(self_bleu(batch_set, max_n=max_n))
        single_scores.append(self_bleu(single_set, max_n=max_n))

    def _row(scores: list[float]) -> dict[str, float]:
        return {
            "self_bleu_mean": statistics.fmean(scores),
            "self_bleu_std": statistics.pstdev(scores) if len(scores) > 1 else 0.0,
            "pairs": float(len(scores)),
        }

    return ExperimentReport(
        kind="diversity",
        conditions={"batch_prompt": _row(batch_scores), "single_prompt": _row(single_scores)},
        config={"set_size": set_size, "bars": bars, "max_n": max_n},
        seed=seed,
    )


def run_coherence_experiment(
    corpus_records: Sequence[CorpusRecord],
    conditions: dict[str, Sequence[Progression]],
    min_size: int = 500,
) -> ExperimentReport:
    """Unigram/bigram JSD of each generation condition against the corpus."""
    if not corpus_records:
        raise InsufficientData("empty reference corpus")
    for rec in corpus_records:
        if rec.key.root.render() != "C":
            raise ValueError("reference corpus must be normalized to C first")
    for name, progs in conditions.items():
        if len(progs) < min_size:
            raise InsufficientData(f"condition {name!r} has {len(progs)} < {min_size} progressions")

    corpus_progs = [record_to_progression(r) for r in corpus_records]
    reference = {
        order: NGramDistribution.from_progressions(corpus_progs, order) for order in (1, 2)
    }
    rows = {}
    for name, progs in conditions.items():
        rows[name] = {
            "unigram_jsd": jsd(NGramDistribution.from_progressions(progs, 1), reference[1]),
            "bigram_jsd": jsd(NGramDistribution.from_progressions(progs, 2), reference[2]),
            "n": float(len(progs)),
        }
    return ExperimentReport(
        kind="coherence",
        conditions=rows,
        config={"corpus_size": len(corpus_records), "min_size": min_size},
    )
