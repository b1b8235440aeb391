#!/usr/bin/env python3
"""Regenerate packaged assets: mock LLM fixtures and desk-scale model artifacts.

Everything is seeded, so reruns produce identical fixtures and functionally
equivalent models. Run from the repository root:

    python3 scripts/build_assets.py
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from chordsmith import deskdata
from chordsmith.corpus import build_vocab, encode, make_split, normalize_to_c, record_to_progression
from chordsmith.priors import ModelConfig, save, train

ASSETS = Path(__file__).resolve().parent.parent / "src" / "chordsmith" / "assets"

DESK_CONFIG = ModelConfig(
    layers=2,
    embed_dim=64,
    hidden_dim=64,
    dropout=0.1,
    learning_rate=5e-3,
    max_epochs=15,
    batch_size=64,
    patience=5,
    seed=0,
)


def build_fixtures() -> None:
    fixtures = ASSETS / "fixtures"
    fixtures.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(2024)

    for bars in (3, 4):
        lines = [
            record_to_progression(r).render()
            for r in deskdata.synthetic_llm_corpus(30, rng, bars=bars)
        ]
        (fixtures / f"default_chord_batch_bars{bars}.txt").write_text(
            "\n".join(lines) + "\n", encoding="utf-8"
        )
        single = record_to_progression(deskdata.synthetic_llm_corpus(1, rng, bars=bars)[0])
        (fixtures / f"default_chord_single_bars{bars}.txt").write_text(
            single.render() + "\n", encoding="utf-8"
        )

    (fixtures / "default_keyword_extraction.txt").write_text(
        "dreamy, acoustic, indie, mellow, nostalgic, folk\n", encoding="utf-8"
    )

    transcription = {
        "detected_key": "Gb",
        "detected_mode": "Min",
        "chords": [
            {"symbol": "Gbm", "start_s": 0.0, "end_s": 2.5},
            {"symbol": "A", "start_s": 2.5, "end_s": 5.0},
            {"symbol": "C#m/E", "start_s": 5.0, "end_s": 7.5},
            {"symbol": "B7", "start_s": 7.5, "end_s": 10.0},
            {"symbol": "Ebm7b5", "start_s": 10.0, "end_s": 12.5},
        ],
    }
    (fixtures / "transcription_default.json").write_text(
        json.dumps(transcription, indent=2) + "\n", encoding="utf-8"
    )
    print(f"fixtures written to {fixtures}")


def build_models() -> None:
    models_dir = ASSETS / "models"
    models_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(7)

    human = normalize_to_c(deskdata.synthetic_human_corpus(3000, rng))
    generated = normalize_to_c(deskdata.synthetic_llm_corpus(3000, rng))
    vocab = build_vocab(human + generated)
    vocab.save(models_dir / "vocab.json")

    for role, records in (("prior", human), ("proposal", generated)):
        sequences = [encode(record_to_progression(r), vocab) for r in records]
        split = make_split(sequences, ratio=0.9, seed=0)
        model, report = train(split, DESK_CONFIG, vocab, role=role)
        save(model, models_dir / f"{role}.pt")
        print(
            f"{role}: {report.epochs_run} epochs, validation NLL "
            f"{report.validation_nll:.4f} ({report.wall_time_s:.1f}s)"
        )


if __name__ == "__main__":
    build_fixtures()
    build_models()
