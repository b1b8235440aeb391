"""Rejection sampling of candidate progressions against the trained priors.

Each candidate x drawn from the proposal model is accepted with probability

    min(1, prior(x) / (scale * proposal(x)))

using an independent uniform draw, which makes the accepted items follow the
prior-corrected distribution. When fewer than the target number of
candidates are accepted, the shortfall is filled with the highest-ratio
rejects; when more are accepted, the highest-ratio accepts are kept. The
scale constant is calibrated offline as a high percentile of observed
probability ratios; the shipped default is 7.64.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Protocol, Sequence

import numpy as np

from .chords import Key, Mode, Progression
from .corpus import encode

if TYPE_CHECKING:
    from .llm import KeywordSet

__all__ = [
    "InsufficientData",
    "SamplerConfig",
    "SamplerDeps",
    "AcceptanceRecord",
    "SuggestionSet",
    "acceptance_ratio",
    "run_rejection",
    "calibrate_m",
    "calibration_ratios",
    "generate_suggestions",
]

log = logging.getLogger(__name__)


class InsufficientData(ValueError):
    """Not enough observations to calibrate or evaluate."""


class SequenceScorer(Protocol):
    """Anything that scores an encoded chord sequence: LSTM prior or lookup table."""

    vocab: object

    def log_prob(self, ids: Sequence[int], temperature: float = ...) -> float: ...


@dataclass(frozen=True)
class SamplerConfig:
    """Rejection-sampling parameters.

    ``acceptance_scale`` is the ratio divisor (calibrated constant),
    ``candidate_count`` how many proposals to request per query,
    ``temperature`` the smoothing applied to both models' scores, and
    ``target_count`` how many suggestions to return.
    """

    acceptance_scale: float = 7.64
    candidate_count: int = 30
    temperature: float = 1.7
    target_count: int = 4

    def __post_init__(self):
        if self.acceptance_scale <= 0:
            raise ValueError("acceptance_scale must be positive")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.target_count < 1 or self.candidate_count < self.target_count:
            raise ValueError("need candidate_count >= target_count >= 1")

    def to_dict(self) -> dict:
        return {
            "acceptance_scale": self.acceptance_scale,
            "candidate_count": self.candidate_count,
            "temperature": self.temperature,
            "target_count": self.target_count,
        }

    @staticmethod
    def from_dict(obj: dict) -> "SamplerConfig":
        return SamplerConfig(**obj)

    @staticmethod
    def load(path: str | Path) -> "SamplerConfig":
        with open(path, encoding="utf-8") as fh:
            return SamplerConfig.from_dict(json.load(fh))

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


@dataclass(frozen=True)
class AcceptanceRecord:
    """Audit entry for one candidate's acceptance test."""

    candidate: Progression
    log_p: float
    log_q: float
    ratio: float
    u: float
    accepted: bool
    duplicate_of: int | None = None  # index of the first identical candidate

    def to_json_obj(self) -> dict:
        return {
            "chords": list(self.candidate.tokens()),
            "key": self.candidate.key.render(),
            "mode": self.candidate.mode.render(),
            "log_p": self.log_p,
            "log_q": self.log_q,
            "ratio": self.ratio,
            "u": self.u,
            "accepted": self.accepted,
            "duplicate_of": self.duplicate_of,
        }


@dataclass(frozen=True)
class SuggestionSet:
    """Ordered suggestions plus the full per-candidate audit trail.

    Accepted suggestions come first (highest ratio first), then any top-k
    fills; ``provenance[i]`` is ``"accepted"`` or ``"topk_fill"``.
    """

    suggestions: tuple[Progression, ...]
    provenance: tuple[str, ...]
    audit: tuple[AcceptanceRecord, ...]

    @property
    def accepted_count(self) -> int:
        return sum(1 for r in self.audit if r.accepted)


def acceptance_ratio(
    x: Progression,
    prior: SequenceScorer,
    proposal: SequenceScorer,
    cfg: SamplerConfig,
) -> float:
    """Clamped acceptance probability min(1, prior/(scale*proposal)) for ``x``.

    Both scores are smoothed with ``cfg.temperature``. The clamp handles the
    calibrated-scale regime where a small fraction of candidates exceeds the
    scale bound.
    """
    log_p = prior.log_prob(encode(x, prior.vocab), cfg.temperature)
    log_q = proposal.log_prob(encode(x, proposal.vocab), cfg.temperature)
    return _ratio_from_scores(log_p, log_q, cfg.acceptance_scale)


def _ratio_from_scores(log_p: float, log_q: float, scale: float) -> float:
    if log_p == float("-inf"):
        return 0.0
    if log_q == float("-inf"):
        return 1.0
    return min(1.0, math.exp(log_p - log_q - math.log(scale)))


def run_rejection(
    candidates: Sequence[Progression],
    prior: SequenceScorer,
    proposal: SequenceScorer,
    cfg: SamplerConfig,
    rng: np.random.Generator,
    fallback: bool = True,
) -> SuggestionSet:
    """Run the acceptance test over a candidate batch and assemble suggestions.

    Every candidate gets an independent uniform draw; duplicates are scored
    independently and flagged in the audit. With ``fallback`` enabled the
    output always holds ``min(target_count, len(candidates))`` items.
    """
    if len(candidates) < cfg.candidate_count:
        log.warning(
            "only %d candidates for a batch size of %d", len(candidates), cfg.candidate_count
        )
    if not candidates:
        return SuggestionSet(suggestions=(), provenance=(), audit=())

    seen: dict[tuple[str, ...], int] = {}
    records: list[AcceptanceRecord] = []
    for i, cand in enumerate(candidates):
        log_p = prior.log_prob(encode(cand, prior.vocab), cfg.temperature)
        log_q = proposal.log_prob(encode(cand, proposal.vocab), cfg.temperature)
        ratio = _ratio_from_scores(log_p, log_q, cfg.acceptance_scale)
        u = float(rng.random())
        tokens = cand.tokens()
        records.append(
            AcceptanceRecord(
                candidate=cand,
                log_p=log_p,
                log_q=log_q,
                ratio=ratio,
                u=u,
                accepted=u < ratio,
                duplicate_of=seen.get(tokens),
            )
        )
        seen.setdefault(tokens, i)

    # Stable sorts keep input order on ties.
    accepted = sorted(
        (r for r in records if r.accepted), key=lambda r: -r.ratio
    )[: cfg.target_count]
    chosen = [(r, "accepted") for r in accepted]
    if fallback and len(chosen) < cfg.target_count:
        rejects = sorted((r for r in records if not r.accepted), key=lambda r: -r.ratio)
        for r in rejects[: cfg.target_count - len(chosen)]:
            chosen.append((r, "topk_fill"))

    return SuggestionSet(
        suggestions=tuple(r.candidate for r, _ in chosen),
        provenance=tuple(tag for _, tag in chosen),
        audit=tuple(records),
    )


def calibrate_m(ratios: Sequence[float], percentile: float = 0.95) -> float:
    """Nearest-rank percentile of observed probability ratios.

    The deployment constant is the 95th percentile by default, which keeps
    extreme outlier ratios from dominating the scale.
    """
    if len(ratios) < 20:
        raise InsufficientData(f"need at least 20 ratios, got {len(ratios)}")
    if not 0.0 < percentile <= 1.0:
        raise ValueError("percentile must be in (0, 1]")
    arr = sorted(float(r) for r in ratios)
    if not all(math.isfinite(r) and r > 0 for r in arr):
        raise ValueError("ratios must be finite and positive")
    rank = max(1, math.ceil(percentile * len(arr)))
    return arr[rank - 1]


def calibration_ratios(
    candidates: Sequence[Progression],
    prior: SequenceScorer,
    proposal: SequenceScorer,
    temperature: float = 1.7,
    proposal_temperature: float | None = None,
) -> list[float]:
    """Unclamped prior/proposal probability ratios for calibration.

    Smoothing is symmetric by default; pass ``proposal_temperature`` to
    study asymmetric smoothing.
    """
    q_temp = temperature if proposal_temperature is None else proposal_temperature
    out = []
    for cand in candidates:
        log_p = prior.log_prob(encode(cand, prior.vocab), temperature)
        log_q = proposal.log_prob(encode(cand, proposal.vocab), q_temp)
        out.append(math.exp(log_p - log_q))
    return out


@dataclass
class SamplerDeps:
    """Everything generate_suggestions needs besides the request itself."""

    provider: object
    prior: SequenceScorer
    proposal: SequenceScorer
    cfg: SamplerConfig = field(default_factory=SamplerConfig)


def generate_suggestions(
    keywords: "KeywordSet",
    key: Key,
    mode: Mode,
    bars: int,
    deps: SamplerDeps,
    rng: np.random.Generator,
) -> SuggestionSet:
    """Full pipeline: request a diverse candidate batch, then filter it."""
    from .llm import generate_candidates_batch

    candidates = generate_candidates_batch(
        keywords, key, mode, bars, deps.cfg.candidate_count, deps.provider
    )
    return run_rejection(candidates, deps.prior, deps.proposal, deps.cfg, rng)
