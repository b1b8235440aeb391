"""Command-line entry points: train, calibrate, generate, eval, serve."""

from __future__ import annotations

import json
import sys
from dataclasses import asdict
from pathlib import Path

import click
import numpy as np

from . import corpus as corpuslib
from . import deskdata, priors
from .assets import asset_path
from .chords import parse_key, parse_mode, parse_progression, render_progression
from .experiments import run_coherence_experiment, run_diversity_experiment
from .llm import KeywordSet, MockProvider
from .sampler import (
    SamplerConfig,
    SamplerDeps,
    calibrate_m,
    calibration_ratios,
    generate_suggestions,
    run_rejection,
)


@click.group()
def main() -> None:
    """Keyword-driven chord progression suggestions and their evaluation."""


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _load_normalized(path: str) -> list:
    result = corpuslib.load_corpus(path)
    if result.skipped:
        click.echo(f"skipped {result.skipped_count} malformed lines", err=True)
    return corpuslib.normalize_to_c(result.records)


@main.command("build-vocab")
@click.option("--corpus", "corpora", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def build_vocab_cmd(corpora: tuple[str, ...], out: str) -> None:
    """Build the shared token vocabulary over one or more corpora."""
    records = []
    for path in corpora:
        records.extend(_load_normalized(path))
    vocab = corpuslib.build_vocab(records)
    vocab.save(out)
    click.echo(f"wrote {out}: {len(vocab.tokens)} tokens (version {vocab.version})")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--vocab", "vocab_path", type=click.Path(exists=True), default=None)
@click.option("--role", type=click.Choice(priors.ROLES), default="prior")
def train(config_path, corpus_path, out, vocab_path, role) -> None:
    """Train a prior over a JSONL corpus and save the artifact."""
    try:
        if config_path:
            with open(config_path, encoding="utf-8") as fh:
                config = priors.ModelConfig(**json.load(fh))
        else:
            config = priors.PRIOR_CONFIG if role == "prior" else priors.PROPOSAL_CONFIG
        records = _load_normalized(corpus_path)
        vocab = (
            corpuslib.TokenVocab.load(vocab_path)
            if vocab_path
            else corpuslib.build_vocab(records)
        )
        sequences = [
            corpuslib.encode(corpuslib.record_to_progression(r), vocab) for r in records
        ]
        split = corpuslib.make_split(sequences, ratio=0.9, seed=config.seed)
        model, report = priors.train(split, config, vocab, role=role)
        priors.save(model, out)
    except (OSError, ValueError, corpuslib.FormatError, priors.DivergenceError) as err:
        _fail(str(err))
    click.echo(
        f"trained {role} in {report.epochs_run} epochs: "
        f"train NLL {report.train_nll:.4f}, validation NLL {report.validation_nll:.4f} "
        f"({report.wall_time_s:.1f}s); saved to {out}"
    )


@main.command()
@click.option("--p", "prior_path", required=True, type=click.Path(exists=True))
@click.option("--q", "proposal_path", required=True, type=click.Path(exists=True))
@click.option("--candidates", required=True, type=click.Path(exists=True))
@click.option("--percentile", type=float, default=0.95, show_default=True)
@click.option("--temperature", type=float, default=1.7, show_default=True)
def calibrate(prior_path, proposal_path, candidates, percentile, temperature) -> None:
    """Calibrate the acceptance scale from a candidate corpus."""
    try:
        prior = priors.load(prior_path)
        proposal = priors.load(proposal_path, expect_vocab=prior.vocab)
        records = corpuslib.load_corpus(candidates).records
        progressions = [corpuslib.record_to_progression(r) for r in records]
        ratios = calibration_ratios(progressions, prior, proposal, temperature=temperature)
        scale = calibrate_m(ratios, percentile=percentile)
    except (OSError, ValueError, corpuslib.FormatError) as err:
        _fail(str(err))
    click.echo(f"acceptance scale: {scale:.4f} (nearest-rank percentile {percentile})")


@main.command()
@click.option("--keywords", required=True, help="comma-separated music keywords")
@click.option("--key", "key_name", default="C", show_default=True)
@click.option("--mode", "mode_name", default="Maj", show_default=True)
@click.option("--bars", type=click.IntRange(3, 4), default=4, show_default=True)
@click.option("--mock", "fixture_dir", type=click.Path(exists=True), default=None,
              help="fixture directory for the offline provider (default: packaged fixtures)")
@click.option("--p", "prior_path", type=click.Path(exists=True), default=None)
@click.option("--q", "proposal_path", type=click.Path(exists=True), default=None)
@click.option("--sampler-config", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
def generate(keywords, key_name, mode_name, bars, fixture_dir, prior_path, proposal_path,
             sampler_config, seed) -> None:
    """Generate chord suggestions fully offline (fixtures + shipped models)."""
    try:
        provider = MockProvider(fixture_dir or asset_path("fixtures"))
        prior = priors.load(prior_path or asset_path("models", "prior.pt"))
        proposal = priors.load(proposal_path or asset_path("models", "proposal.pt"),
                               expect_vocab=prior.vocab)
        cfg = SamplerConfig.load(sampler_config) if sampler_config else SamplerConfig()
        deps = SamplerDeps(provider=provider, prior=prior, proposal=proposal, cfg=cfg)
        result = generate_suggestions(
            KeywordSet.from_words(keywords.split(",")),
            parse_key(key_name),
            parse_mode(mode_name),
            bars,
            deps,
            np.random.default_rng(seed),
        )
    except Exception as err:  # noqa: BLE001 - CLI boundary
        _fail(str(err))
    for progression, tag in zip(result.suggestions, result.provenance):
        click.echo(f"{render_progression(progression)}    [{tag}]")


@main.group(name="eval")
def eval_group() -> None:
    """Diversity and coherence metrics and experiment tables."""


def _read_progression_lines(path: str) -> list:
    key, mode = parse_key("C"), parse_mode("Maj")
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    return [parse_progression(ln, key, mode) for ln in lines]


@eval_group.command("self-bleu")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True),
              help="text file with one progression per line")
@click.option("--max-n", type=int, default=4, show_default=True)
def eval_self_bleu(in_path, max_n) -> None:
    from .metrics import self_bleu

    try:
        score = self_bleu(_read_progression_lines(in_path), max_n=max_n)
    except ValueError as err:
        _fail(str(err))
    click.echo(f"self-BLEU: {score:.4f}")


@eval_group.command("jsd")
@click.option("--a", "a_path", required=True, type=click.Path(exists=True))
@click.option("--b", "b_path", required=True, type=click.Path(exists=True))
def eval_jsd(a_path, b_path) -> None:
    from .metrics import NGramDistribution, jsd

    try:
        sets = [_read_progression_lines(p) for p in (a_path, b_path)]
        for order, label in ((1, "unigram"), (2, "bigram")):
            dists = [NGramDistribution.from_progressions(s, order) for s in sets]
            click.echo(f"{label} JSD: {jsd(dists[0], dists[1]):.4f}")
    except ValueError as err:
        _fail(str(err))


@eval_group.command("diversity")
@click.option("--pairs", type=int, default=5, show_default=True)
@click.option("--set-size", type=int, default=30, show_default=True)
@click.option("--mock", "fixture_dir", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default=None)
def eval_diversity(pairs, set_size, fixture_dir, seed, out_dir) -> None:
    provider = MockProvider(fixture_dir or asset_path("fixtures"))
    try:
        report = run_diversity_experiment(provider, pairs=pairs, set_size=set_size, seed=seed)
    except Exception as err:  # noqa: BLE001 - CLI boundary
        _fail(str(err))
    click.echo(report.to_markdown())
    if out_dir:
        _write_report(report, Path(out_dir), "diversity")


@eval_group.command("tables")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), default=None,
              help="reference corpus JSONL; defaults to a synthesized desk corpus")
@click.option("--corpus-size", type=int, default=2000, show_default=True)
@click.option("--condition-size", type=int, default=500, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default=None)
def eval_tables(corpus_path, corpus_size, condition_size, seed, out_dir) -> None:
    """Coherence table: JSD of generation conditions against the corpus."""
    rng = np.random.default_rng(seed)
    try:
        if corpus_path:
            records = _load_normalized(corpus_path)
        else:
            records = corpuslib.normalize_to_c(
                deskdata.synthetic_human_corpus(corpus_size, rng)
            )
        prior = priors.load(asset_path("models", "prior.pt"))
        proposal = priors.load(asset_path("models", "proposal.pt"))
        prior_samples = [prior.sample(4, rng) for _ in range(condition_size)]
        llm_samples = [
            corpuslib.record_to_progression(r)
            for r in deskdata.synthetic_llm_corpus(condition_size, rng)
        ]
        rejection_cfg = SamplerConfig(candidate_count=30, target_count=4)
        rejected: list = []
        while len(rejected) < condition_size:
            batch = [
                corpuslib.record_to_progression(r)
                for r in deskdata.synthetic_llm_corpus(30, rng)
            ]
            result = run_rejection(batch, prior, proposal, rejection_cfg, rng, fallback=False)
            rejected.extend(result.suggestions)
        conditions = {
            "prior_samples": prior_samples,
            "llm_samples": llm_samples,
            "rejection_sampled": rejected[:condition_size],
            "uniform_random": deskdata.uniform_random_progressions(
                prior.vocab, condition_size, 4, rng
            ),
        }
        report = run_coherence_experiment(records, conditions, min_size=condition_size)
    except Exception as err:  # noqa: BLE001 - CLI boundary
        _fail(str(err))
    click.echo(report.to_markdown())
    if out_dir:
        _write_report(report, Path(out_dir), "coherence")


def _write_report(report, out_dir: Path, name: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{name}.json").write_text(report.to_json() + "\n", encoding="utf-8")
    (out_dir / f"{name}.md").write_text(report.to_markdown() + "\n", encoding="utf-8")
    report.write_csv(out_dir / f"{name}.csv")
    click.echo(f"wrote {name}.json, {name}.md, {name}.csv to {out_dir}")


@main.command("synth-corpus")
@click.option("--kind", type=click.Choice(["human", "llm"]), default="human", show_default=True)
@click.option("-n", "count", type=int, default=2000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def synth_corpus(kind, count, seed, out) -> None:
    """Write a synthetic desk-scale corpus as JSONL."""
    rng = np.random.default_rng(seed)
    records = (
        deskdata.synthetic_human_corpus(count, rng)
        if kind == "human"
        else deskdata.synthetic_llm_corpus(count, rng)
    )
    corpuslib.save_corpus(records, out)
    click.echo(f"wrote {count} {kind} records to {out}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(config_path, host, port) -> None:
    """Boot the HTTP API with config-selected providers."""
    import uvicorn

    from .api import create_app
    from .settings import Settings

    try:
        settings = Settings.load(config_path) if config_path else Settings()
        app = create_app(settings)
    except Exception as err:  # noqa: BLE001 - CLI boundary
        _fail(str(err))
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command("show-config")
def show_config() -> None:
    """Print the effective sampler defaults as JSON."""
    click.echo(json.dumps(asdict(SamplerConfig()), indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
