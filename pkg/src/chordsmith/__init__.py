"""Keyword-driven chord progression suggestions.

A backend that turns music keywords into diverse, musically coherent chord
progressions: an external LLM proposes a large candidate batch, and a
corpus-trained autoregressive chord prior filters the batch by rejection
sampling. Ships with the chord-symbol grammar, corpus and training tooling,
the sampler, evaluation metrics, an HTTP API, and a CLI.
"""

__version__ = "0.1.0"

from .chords import (
    Chord,
    Key,
    Mode,
    ParseError,
    PitchClass,
    Progression,
    canonicalize,
    parse_chord,
    parse_key,
    parse_mode,
    parse_progression,
    render_chord,
    render_progression,
    transpose_progression,
)
from .sampler import SamplerConfig, acceptance_ratio, calibrate_m, run_rejection

__all__ = [
    "Chord",
    "Key",
    "Mode",
    "ParseError",
    "PitchClass",
    "Progression",
    "SamplerConfig",
    "acceptance_ratio",
    "calibrate_m",
    "canonicalize",
    "parse_chord",
    "parse_key",
    "parse_mode",
    "parse_progression",
    "render_chord",
    "render_progression",
    "run_rejection",
    "transpose_progression",
]
