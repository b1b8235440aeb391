"""Chord symbol grammar: parsing, rendering, pitch arithmetic, transposition.

A chord symbol is made of up to seven components, always in this order:

  root -> quality -> extension -> sus -> added notes -> alterations -> slash bass

e.g. ``C``, ``Am7``, ``Bmaj9``, ``D#dim/C``, ``G7sus4add9b13/F``.

Parsing is lenient about letter case on the root and bass (``dm`` and
``d#dim/C`` are accepted), rendering is strict: canonical output always uses
an uppercase root letter and the minimal quality token.  ``Gmaj`` and
``Cmin`` are rejected: a bare major triad is written ``G`` and a minor
triad ``Cm``; the ``maj`` token only appears fused with an extension
(``Gmaj7``), and ``min`` is never a valid surface token.

All values in this module are immutable and hashable; every function is
pure and thread-safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

__all__ = [
    "ParseError",
    "PitchClass",
    "Key",
    "Mode",
    "MODES",
    "ALLOWED_KEY_ROOTS",
    "Chord",
    "Progression",
    "parse_pitch_class",
    "parse_chord",
    "render_chord",
    "canonicalize",
    "parse_key",
    "parse_progression",
    "render_progression",
    "transpose_chord",
    "transpose_progression",
    "chromatic_interval",
    "letter_steps",
    "scale_pitch_classes",
]


class ParseError(ValueError):
    """Raised for unparseable chord text. Carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (offset {offset})")
        self.message = message
        self.offset = offset


# Natural chromatic index of each letter name (C = 0).
_LETTER_INDEX = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}

# Accidental surface forms and their semitone offsets. "x" is double sharp,
# "bb" double flat. Longest forms first so greedy matching is unambiguous.
_ACCIDENTALS = {"bb": -2, "x": 2, "#": 1, "b": -1, "": 0}
_ACCIDENTAL_ORDER = ("bb", "x", "#", "b", "")

# Sharp-preferring spelling for each chromatic index, used as the fallback
# when letter-preserving transposition would need a triple accidental.
_SHARP_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")

_QUALITIES = ("maj", "min", "aug", "dim")
_PLAIN_EXTENSIONS = ("6/9", "13", "11", "9", "7")
_MAJ_EXTENSIONS = ("maj13", "maj11", "maj9", "maj7")
_SUS_TOKENS = ("sus#2", "sus#4", "sus2", "sus4")
_ADD_TOKENS = ("add2", "add4", "add6", "add9", "add11", "add13")
_ALT_TOKENS = ("b5", "#5", "b9", "#9", "#11", "b13")

# Canonical rendering order for the set-valued components.
_ADD_ORDER = {t: i for i, t in enumerate(_ADD_TOKENS)}
_ALT_ORDER = {t: i for i, t in enumerate(_ALT_TOKENS)}

_QUALITY_SURFACE = {"maj": "", "min": "m", "aug": "aug", "dim": "dim"}


@dataclass(frozen=True, order=True)
class PitchClass:
    """A spelled pitch class: letter name plus accidental."""

    letter: str
    accidental: str = ""

    def __post_init__(self):
        if self.letter not in _LETTER_INDEX:
            raise ValueError(f"bad letter {self.letter!r}")
        if self.accidental not in _ACCIDENTALS:
            raise ValueError(f"bad accidental {self.accidental!r}")

    @property
    def chromatic(self) -> int:
        """Chromatic index 0..11, C natural = 0."""
        return (_LETTER_INDEX[self.letter] + _ACCIDENTALS[self.accidental]) % 12

    def render(self) -> str:
        return self.letter + self.accidental

    @staticmethod
    def from_chromatic(index: int) -> "PitchClass":
        """Sharp-preferring spelling of a chromatic index."""
        name = _SHARP_NAMES[index % 12]
        return PitchClass(name[0], name[1:])


def parse_pitch_class(text: str) -> PitchClass:
    """Parse a standalone pitch class such as ``C``, ``F#``, ``Bb``, ``Dx``."""
    pc, end = _match_pitch_class(text, 0)
    if pc is None or end != len(text):
        raise ParseError(f"invalid pitch class {text!r}", 0)
    return pc


def _match_pitch_class(text: str, pos: int) -> tuple[PitchClass | None, int]:
    """Greedily match a pitch class at ``pos``; letter case-insensitive."""
    if pos >= len(text) or text[pos].upper() not in _LETTER_INDEX:
        return None, pos
    letter = text[pos].upper()
    rest = text[pos + 1:]
    for acc in _ACCIDENTAL_ORDER:
        if rest.startswith(acc):
            return PitchClass(letter, acc), pos + 1 + len(acc)
    return PitchClass(letter), pos + 1


# The twelve key spellings accepted for key roots.
ALLOWED_KEY_ROOTS = tuple(
    parse_pitch_class(s) for s in ("C", "G", "D", "A", "E", "B", "F#", "Db", "Ab", "Eb", "Bb", "F")
)


@dataclass(frozen=True)
class Key:
    """A tonal center, restricted to the twelve supported root spellings."""

    root: PitchClass

    def __post_init__(self):
        if self.root not in ALLOWED_KEY_ROOTS:
            raise ValueError(f"unsupported key root {self.root.render()!r}")

    def render(self) -> str:
        return self.root.render()


def parse_key(text: str) -> Key:
    return Key(parse_pitch_class(text))


@dataclass(frozen=True)
class Mode:
    """A scale type: name plus semitone offsets of its seven degrees."""

    name: str
    intervals: tuple[int, ...]

    def render(self) -> str:
        return self.name


MODES: dict[str, Mode] = {
    m.name: m
    for m in (
        Mode("Maj", (0, 2, 4, 5, 7, 9, 11)),
        Mode("Min", (0, 2, 3, 5, 7, 8, 10)),
        Mode("Dor", (0, 2, 3, 5, 7, 9, 10)),
        Mode("Phr", (0, 1, 3, 5, 7, 8, 10)),
        Mode("Lyd", (0, 2, 4, 6, 7, 9, 11)),
        Mode("Mix", (0, 2, 4, 5, 7, 9, 10)),
        Mode("Loc", (0, 1, 3, 5, 6, 8, 10)),
        Mode("Hmin", (0, 2, 3, 5, 7, 8, 11)),  # harmonic minor
        Mode("Phdm", (0, 1, 4, 5, 7, 8, 10)),  # Phrygian dominant
    )
}


def parse_mode(text: str) -> Mode:
    try:
        return MODES[text]
    except KeyError:
        raise ParseError(f"unknown mode {text!r}; expected one of {sorted(MODES)}", 0) from None


@dataclass(frozen=True)
class Chord:
    """A structured chord symbol.

    ``extension`` carries its own surface form, so the major-seventh family
    is ``"maj7"``/``"maj9"``/... (only valid on a plain major chord) while
    ``"7"`` is the dominant seventh.
    """

    root: PitchClass
    quality: str = "maj"
    extension: str | None = None
    sus: str | None = None
    adds: frozenset[str] = field(default_factory=frozenset)
    alterations: frozenset[str] = field(default_factory=frozenset)
    bass: PitchClass | None = None

    def __post_init__(self):
        object.__setattr__(self, "adds", frozenset(self.adds))
        object.__setattr__(self, "alterations", frozenset(self.alterations))
        if self.quality not in _QUALITIES:
            raise ValueError(f"bad quality {self.quality!r}")
        if self.extension is not None and self.extension not in _PLAIN_EXTENSIONS + _MAJ_EXTENSIONS:
            raise ValueError(f"bad extension {self.extension!r}")
        if self.extension in _MAJ_EXTENSIONS and self.quality != "maj":
            raise ValueError("maj-flavored extensions require major quality")
        if self.sus is not None and self.sus not in _SUS_TOKENS:
            raise ValueError(f"bad sus {self.sus!r}")
        if not self.adds <= set(_ADD_TOKENS):
            raise ValueError(f"bad adds {sorted(self.adds)}")
        if not self.alterations <= set(_ALT_TOKENS):
            raise ValueError(f"bad alterations {sorted(self.alterations)}")
        if self._ambiguous_bare_alteration():
            raise ValueError(
                "a bare triad's leading b9/#9/#11/b13 alteration would fuse with "
                "the root accidental; write the alteration on an extended chord"
            )

    def _ambiguous_bare_alteration(self) -> bool:
        # "C" + "#9" would render "C#9", which reads back as the C# ninth
        # chord: on a bare major chord a leading b9/#9/#11/b13 fuses with
        # the root accidental for natural and flat roots. Transposition can
        # respell any root into that regime, so the structure is rejected
        # uniformly; leading b5/#5 never collide ("5" is not an extension).
        if self.quality != "maj" or self.extension or self.sus or self.adds or not self.alterations:
            return False
        return min(self.alterations, key=_ALT_ORDER.get) in ("b9", "#9", "#11", "b13")

    def render(self) -> str:
        return render_chord(self)

    def chromatic_signature(self) -> tuple:
        """Identity up to enharmonic respelling of root and bass.

        Spelling-sensitive equality is the default (``==`` compares canonical
        structure); this coarser key treats e.g. ``C#m7`` and ``Dbm7`` as the
        same chord for counting purposes.
        """
        return (
            self.root.chromatic,
            self.quality,
            self.extension,
            self.sus,
            tuple(sorted(self.adds, key=_ADD_ORDER.get)),
            tuple(sorted(self.alterations, key=_ALT_ORDER.get)),
            None if self.bass is None else self.bass.chromatic,
        )


def render_chord(c: Chord) -> str:
    """Canonical surface form; inverse of :func:`parse_chord`."""
    parts = [c.root.render(), _QUALITY_SURFACE[c.quality]]
    if c.extension:
        parts.append(c.extension)
    if c.sus:
        parts.append(c.sus)
    parts.extend(sorted(c.adds, key=_ADD_ORDER.get))
    parts.extend(sorted(c.alterations, key=_ALT_ORDER.get))
    if c.bass is not None:
        parts.append("/" + c.bass.render())
    return "".join(parts)


def parse_chord(text: str) -> Chord:
    """Parse a chord symbol string into its components.

    The root letter (and bass letter) are case-insensitive; every other token
    must appear exactly as written in the grammar. A trailing ``/`` with no
    bass note is tolerated and dropped. Raises :class:`ParseError` with the
    byte offset of the first unrecognized token.
    """
    if not text or text != text.strip():
        raise ParseError("empty or untrimmed chord text", 0)
    # The root's accidental run is ambiguous against later tokens ("Bb5" is
    # B + b5, not Bb + 5), so try the longest accidental spelling first and
    # back off until the remainder parses.
    pc, end = _match_pitch_class(text, 0)
    if pc is None:
        raise ParseError(f"expected root letter A-G, got {text[0]!r}", 0)
    last_err: ParseError | None = None
    for acc_len in range(end - 1, -1, -1):
        acc = text[1:1 + acc_len]
        if acc not in _ACCIDENTALS:
            continue
        try:
            return _parse_after_root(text, PitchClass(text[0].upper(), acc), 1 + acc_len)
        except ParseError as err:
            if last_err is None or err.offset >= last_err.offset:
                last_err = err
    assert last_err is not None
    raise last_err


def _parse_after_root(text: str, root: PitchClass, pos: int) -> Chord:
    quality = "maj"
    extension: str | None = None

    if text.startswith("dim", pos):
        quality, pos = "dim", pos + 3
    elif text.startswith("aug", pos):
        quality, pos = "aug", pos + 3
    elif text.startswith("maj", pos) or text.startswith("min", pos):
        # "maj"/"min" are not standalone quality tokens: "Gmaj" and "Cmin"
        # are invalid. "maj" survives only fused with an extension.
        for tok in _MAJ_EXTENSIONS:
            if text.startswith(tok, pos):
                extension, pos = tok, pos + len(tok)
                break
        else:
            raise ParseError(
                f"standalone {text[pos:pos + 3]!r} quality is invalid; "
                "use a bare root for major or 'm' for minor",
                pos,
            )
    elif text.startswith("m", pos):
        quality, pos = "min", pos + 1

    if extension is None:
        for tok in _PLAIN_EXTENSIONS:
            if text.startswith(tok, pos):
                extension, pos = tok, pos + len(tok)
                break

    sus = None
    for tok in _SUS_TOKENS:
        if text.startswith(tok, pos):
            sus, pos = tok, pos + len(tok)
            break

    adds: set[str] = set()
    while True:
        for tok in sorted(_ADD_TOKENS, key=len, reverse=True):
            if text.startswith(tok, pos):
                if tok in adds:
                    raise ParseError(f"duplicate {tok!r}", pos)
                adds.add(tok)
                pos += len(tok)
                break
        else:
            break

    alterations: set[str] = set()
    while True:
        for tok in sorted(_ALT_TOKENS, key=len, reverse=True):
            if text.startswith(tok, pos):
                if tok in alterations:
                    raise ParseError(f"duplicate {tok!r}", pos)
                alterations.add(tok)
                pos += len(tok)
                break
        else:
            break

    bass = None
    if pos < len(text) and text[pos] == "/":
        pos += 1
        if pos < len(text):
            bass, pos = _match_pitch_class(text, pos)
            if bass is None:
                raise ParseError(f"expected bass note after '/', got {text[pos]!r}", pos)
        # else: dangling slash, tolerated as no bass

    if pos != len(text):
        raise ParseError(f"unrecognized token {text[pos:]!r}", pos)

    try:
        return Chord(
            root=root,
            quality=quality,
            extension=extension,
            sus=sus,
            adds=frozenset(adds),
            alterations=frozenset(alterations),
            bass=bass,
        )
    except ValueError as err:
        raise ParseError(str(err), 0) from None


def canonicalize(text: str) -> str:
    """Canonical rendering of a chord symbol string. Idempotent."""
    return render_chord(parse_chord(text))


@dataclass(frozen=True)
class Progression:
    """An ordered chord sequence with key and mode context, one chord per bar."""

    chords: tuple[Chord, ...]
    key: Key
    mode: Mode

    def __post_init__(self):
        if not self.chords:
            raise ValueError("progression needs at least one chord")

    @property
    def bars(self) -> int:
        return len(self.chords)

    def tokens(self) -> tuple[str, ...]:
        """Canonical chord token strings, the shared identity for models and metrics."""
        return tuple(render_chord(c) for c in self.chords)

    def render(self) -> str:
        return render_progression(self)


def parse_progression(line: str, key: Key, mode: Mode) -> Progression:
    """Parse one space-separated progression line."""
    tokens = line.split()
    if not tokens:
        raise ParseError("empty progression line", 0)
    chords = []
    for i, tok in enumerate(tokens):
        try:
            chords.append(parse_chord(tok))
        except ParseError as err:
            raise ParseError(f"chord {i} ({tok!r}): {err.message}", err.offset) from None
    return Progression(tuple(chords), key, mode)


def render_progression(p: Progression) -> str:
    return " ".join(p.tokens())


def _as_pitch(value: Key | PitchClass) -> PitchClass:
    return value.root if isinstance(value, Key) else value


def chromatic_interval(source: Key | PitchClass, target: Key | PitchClass) -> int:
    """Semitones (0..11) from ``source`` root up to ``target`` root."""
    return (_as_pitch(target).chromatic - _as_pitch(source).chromatic) % 12


def letter_steps(source: Key | PitchClass, target: Key | PitchClass) -> int:
    """Letter-name steps (0..6) from ``source`` root to ``target`` root."""
    order = "CDEFGAB"
    return (order.index(_as_pitch(target).letter) - order.index(_as_pitch(source).letter)) % 7


def _shift_pitch(pc: PitchClass, steps: int, semitones: int) -> PitchClass:
    """Shift by ``steps`` letter names and ``semitones``, preserving spelling.

    The letter moves by the key's letter distance and the accidental absorbs
    the difference; if that would need a triple accidental, fall back to the
    sharp-preferring spelling of the target chromatic index.
    """
    order = "CDEFGAB"
    new_letter = order[(order.index(pc.letter) + steps) % 7]
    target = (pc.chromatic + semitones) % 12
    offset = ((target - _LETTER_INDEX[new_letter] + 6) % 12) - 6
    for surface, value in _ACCIDENTALS.items():
        if value == offset:
            return PitchClass(new_letter, surface)
    return PitchClass.from_chromatic(target)


def transpose_chord(c: Chord, steps: int, semitones: int) -> Chord:
    return replace(
        c,
        root=_shift_pitch(c.root, steps, semitones),
        bass=None if c.bass is None else _shift_pitch(c.bass, steps, semitones),
    )


def transpose_progression(p: Progression, target: Key) -> Progression:
    """Move a progression to ``target``, shifting every root and bass.

    The mode is unchanged and transposing to the progression's own key is the
    identity.
    """
    steps = letter_steps(p.key, target)
    semitones = chromatic_interval(p.key, target)
    if steps == 0 and semitones == 0 and p.key == target:
        return p
    return Progression(
        tuple(transpose_chord(c, steps, semitones) for c in p.chords),
        key=target,
        mode=p.mode,
    )


def scale_pitch_classes(key: Key, mode: Mode) -> tuple[int, ...]:
    """Chromatic indices of the seven scale degrees of ``key``/``mode``."""
    root = key.root.chromatic
    return tuple((root + step) % 12 for step in mode.intervals)
