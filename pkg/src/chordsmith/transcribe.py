"""Pluggable audio-to-chords transcription boundary.

The actual transcription is an external service; this module defines the
provider interface, key conversion of provider output, and a deterministic
mock backed by a JSON fixture so the rest of the system can be exercised
offline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Protocol

from .chords import (
    Key,
    Mode,
    PitchClass,
    chromatic_interval,
    letter_steps,
    parse_chord,
    parse_mode,
    parse_pitch_class,
    render_chord,
    transpose_chord,
)

__all__ = [
    "TranscriptionError",
    "TimedChord",
    "TranscriptionResult",
    "TranscriptionProvider",
    "MockTranscriptionProvider",
    "convert_to_key",
    "MAX_SEGMENT_SECONDS",
]

MAX_SEGMENT_SECONDS = 30.0


class TranscriptionError(RuntimeError):
    """The transcription provider failed or returned unusable output."""


@dataclass(frozen=True)
class TimedChord:
    symbol: str
    start_s: float
    end_s: float


@dataclass(frozen=True)
class TranscriptionResult:
    # Detected keys come from an external model and may use spellings outside
    # the twelve supported key roots (e.g. Gb), so this is a plain pitch class.
    detected_root: PitchClass
    detected_mode: Mode
    chords: tuple[TimedChord, ...]


class TranscriptionProvider(Protocol):
    def transcribe(self, audio_ref: str, start_s: float, end_s: float) -> TranscriptionResult: ...


class MockTranscriptionProvider:
    """Serves one fixed transcription fixture regardless of the audio input."""

    def __init__(self, fixture_path: str | Path):
        self.fixture_path = Path(fixture_path)

    def transcribe(self, audio_ref: str, start_s: float, end_s: float) -> TranscriptionResult:
        try:
            obj = json.loads(self.fixture_path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as err:
            raise TranscriptionError(f"bad transcription fixture: {err}") from err
        return TranscriptionResult(
            detected_root=parse_pitch_class(obj["detected_key"]),
            detected_mode=parse_mode(obj["detected_mode"]),
            chords=tuple(
                TimedChord(c["symbol"], float(c["start_s"]), float(c["end_s"]))
                for c in obj["chords"]
            ),
        )


def convert_to_key(result: TranscriptionResult, target: Key) -> tuple[TimedChord, ...]:
    """Transpose a transcription's chords from its detected key to ``target``."""
    steps = letter_steps(result.detected_root, target.root)
    semitones = chromatic_interval(result.detected_root, target.root)
    converted = []
    for timed in result.chords:
        chord = transpose_chord(parse_chord(timed.symbol), steps, semitones)
        converted.append(replace(timed, symbol=render_chord(chord)))
    return tuple(converted)
