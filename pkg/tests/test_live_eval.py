"""Optional live-provider harness; directional assertions only.

The published-scale metric values are not reproducible without the licensed
corpus and live model access, so this module asserts only orderings:
Self-BLEU(batch prompting) < Self-BLEU(single prompting), and
JSD(rejection-sampled) < JSD(raw model output) against the supplied corpus.

Enable with:

    CHORDSMITH_LIVE_EVAL=1 OPENAI_API_KEY=... \
    CHORDSMITH_LIVE_CORPUS=/path/to/corpus.jsonl \
    CHORDSMITH_LIVE_PRIOR=/path/prior.pt CHORDSMITH_LIVE_PROPOSAL=/path/proposal.pt \
    pytest tests/test_live_eval.py -v
"""

from __future__ import annotations

import os

import numpy as np
import pytest

requires_live = pytest.mark.skipif(
    not (os.environ.get("CHORDSMITH_LIVE_EVAL") and os.environ.get("OPENAI_API_KEY")),
    reason="live evaluation disabled (set CHORDSMITH_LIVE_EVAL and OPENAI_API_KEY)",
)


def _live_provider():
    from chordsmith.llm import LLMProviderConfig, OpenAIChatProvider

    return OpenAIChatProvider(LLMProviderConfig(), os.environ["OPENAI_API_KEY"])


@requires_live
def test_batch_prompting_is_more_diverse_live():
    from chordsmith.experiments import run_diversity_experiment

    report = run_diversity_experiment(_live_provider(), pairs=5, set_size=30, seed=0)
    assert (
        report.conditions["batch_prompt"]["self_bleu_mean"]
        < report.conditions["single_prompt"]["self_bleu_mean"]
    )


@requires_live
@pytest.mark.skipif(
    not (
        os.environ.get("CHORDSMITH_LIVE_CORPUS")
        and os.environ.get("CHORDSMITH_LIVE_PRIOR")
        and os.environ.get("CHORDSMITH_LIVE_PROPOSAL")
    ),
    reason="supply CHORDSMITH_LIVE_CORPUS and trained model artifact paths",
)
def test_rejection_sampling_improves_coherence_live():
    from chordsmith import priors
    from chordsmith.assets import load_keyword_list
    from chordsmith.chords import parse_key, parse_mode
    from chordsmith.corpus import load_corpus, normalize_to_c
    from chordsmith.experiments import run_coherence_experiment
    from chordsmith.llm import KeywordSet, generate_candidates_batch
    from chordsmith.sampler import SamplerConfig, run_rejection

    provider = _live_provider()
    corpus = normalize_to_c(load_corpus(os.environ["CHORDSMITH_LIVE_CORPUS"]).records)
    prior = priors.load(os.environ["CHORDSMITH_LIVE_PRIOR"])
    proposal = priors.load(os.environ["CHORDSMITH_LIVE_PROPOSAL"])

    rng = np.random.default_rng(0)
    pool = load_keyword_list()
    key, mode = parse_key("C"), parse_mode("Maj")
    cfg = SamplerConfig()

    raw, filtered = [], []
    batches = int(os.environ.get("CHORDSMITH_LIVE_BATCHES", "20"))
    while len(filtered) < 500 and batches > 0:
        batches -= 1
        picks = [pool[int(i)] for i in rng.choice(len(pool), size=3, replace=False)]
        candidates = generate_candidates_batch(
            KeywordSet.from_words(picks), key, mode, 4, cfg.candidate_count, provider
        )
        raw.extend(candidates)
        result = run_rejection(candidates, prior, proposal, cfg, rng, fallback=False)
        filtered.extend(result.suggestions)

    size = min(len(raw), len(filtered))
    report = run_coherence_experiment(
        corpus,
        {"raw_llm": raw[:size], "rejection_sampled": filtered[:size]},
        min_size=min(size, 500),
    )
    rows = report.conditions
    assert rows["rejection_sampled"]["unigram_jsd"] < rows["raw_llm"]["unigram_jsd"]
    assert rows["rejection_sampled"]["bigram_jsd"] < rows["raw_llm"]["bigram_jsd"]
