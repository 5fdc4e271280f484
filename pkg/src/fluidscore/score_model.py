"""Core domain types: spelled pitches, dynamics, note events and scores.

Pitches live in a chromatic "flow field" whose integer coordinate puts C3 at 0,
so octaves 1 and 2 come out negative. Dynamics map onto pressure magnitudes
1..18, from nine p's up to seven f's.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

LETTERS = ("C", "D", "E", "F", "G", "A", "B")
_NATURAL_SEMITONE = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}
_ACCIDENTAL_SHIFT = {"flat": -1, "natural": 0, "sharp": 1}
_ACCIDENTAL_TEXT = {"flat": "b", "natural": "", "sharp": "#"}

MIN_OCTAVE = 0
MAX_OCTAVE = 9
Y_MIN = -36
Y_MAX = 59

# Ordered from softest to loudest; index + 1 is the pressure value.
DYNAMICS = tuple("p" * n for n in range(9, 0, -1)) + ("mp", "mf") + tuple("f" * n for n in range(1, 8))
_PRESSURE = {marking: i + 1 for i, marking in enumerate(DYNAMICS)}

# Spelling used when turning a pitch class back into a PitchSpec: natural, else flat.
_CANONICAL_SPELLING = (
    ("C", "natural"), ("D", "flat"), ("D", "natural"), ("E", "flat"),
    ("E", "natural"), ("F", "natural"), ("G", "flat"), ("G", "natural"),
    ("A", "flat"), ("A", "natural"), ("B", "flat"), ("B", "natural"),
)


@dataclass(frozen=True, order=True)
class PitchSpec:
    letter: str
    accidental: str = "natural"
    octave: int = 4

    def __post_init__(self):
        if self.letter not in _NATURAL_SEMITONE:
            raise ValueError(f"invalid pitch letter {self.letter!r}")
        if self.accidental not in _ACCIDENTAL_SHIFT:
            raise ValueError(f"invalid accidental {self.accidental!r}")
        if not MIN_OCTAVE <= self.octave <= MAX_OCTAVE:
            raise ValueError(f"octave {self.octave} outside [{MIN_OCTAVE}, {MAX_OCTAVE}]")

    @property
    def y(self) -> int:
        return pitch_to_y(self)

    def spelling(self) -> str:
        """Compact text form used by the score grammar and CSV output, e.g. ``Ab3``."""
        return f"{self.letter}{_ACCIDENTAL_TEXT[self.accidental]}{self.octave}"


@dataclass(frozen=True)
class Dynamic:
    level: str

    def __post_init__(self):
        if self.level not in _PRESSURE:
            raise ValueError(f"unknown dynamic {self.level!r}")

    @property
    def pressure(self) -> int:
        return _PRESSURE[self.level]


def pitch_to_y(p: PitchSpec) -> int:
    return 12 * (p.octave - 3) + _NATURAL_SEMITONE[p.letter] + _ACCIDENTAL_SHIFT[p.accidental]


def y_to_pitch(y: int) -> PitchSpec:
    if not Y_MIN <= y <= Y_MAX:
        raise ValueError(f"flow-field coordinate {y} outside [{Y_MIN}, {Y_MAX}]")
    octave, pc = divmod(y, 12)
    letter, accidental = _CANONICAL_SPELLING[pc]
    return PitchSpec(letter, accidental, octave + 3)


def dynamic_to_pressure(d: Dynamic | str) -> int:
    if isinstance(d, str):
        d = Dynamic(d)
    return d.pressure


def pressure_to_dynamic(pressure: int) -> Dynamic:
    if not 1 <= pressure <= len(DYNAMICS):
        raise ValueError(f"pressure {pressure} outside [1, {len(DYNAMICS)}]")
    return Dynamic(DYNAMICS[pressure - 1])


@dataclass(frozen=True)
class NoteEvent:
    onset: int
    pitch: PitchSpec
    pressure: int
    voice_hint: Optional[int] = None

    def __post_init__(self):
        if self.onset < 0:
            raise ValueError("onset must be non-negative")
        if not 1 <= self.pressure <= len(DYNAMICS):
            raise ValueError(f"pressure {self.pressure} outside [1, {len(DYNAMICS)}]")

    @property
    def y(self) -> int:
        return pitch_to_y(self.pitch)

    def sort_key(self):
        voice = (0, 0) if self.voice_hint is None else (1, self.voice_hint)
        return (self.onset, -self.y, voice, self.pitch, self.pressure)


@dataclass(frozen=True)
class Score:
    """A parsed piece or excerpt.

    ``start`` is the timeline index of the first column, so excerpts keep the
    numbering of the full piece; the timeline covers ``[start, start + tick_count)``.
    Columns inside that range with no events are listed in ``rests``.
    """

    events: tuple[NoteEvent, ...] = ()
    tick_count: int = 0
    start: int = 0
    rests: frozenset[int] = frozenset()
    title: str = ""
    source: str = field(default="", compare=False)

    def __post_init__(self):
        ordered = tuple(sorted(self.events, key=NoteEvent.sort_key))
        object.__setattr__(self, "events", ordered)
        object.__setattr__(self, "rests", frozenset(self.rests))
        if self.tick_count < 0 or self.start < 0:
            raise ValueError("tick_count and start must be non-negative")
        end = self.end
        for ev in ordered:
            if not self.start <= ev.onset < end:
                raise ValueError(f"event onset {ev.onset} outside timeline [{self.start}, {end})")
        sounding = {ev.onset for ev in ordered}
        for t in range(self.start, end):
            if t not in sounding and t not in self.rests:
                raise ValueError(f"timeline index {t} has neither events nor a rest")

    @property
    def end(self) -> int:
        return self.start + self.tick_count

    def ticks(self) -> range:
        return range(self.start, self.end)

    def events_at(self, t: int) -> list[NoteEvent]:
        return [ev for ev in self.events if ev.onset == t]
