"""Reader and writer for the plain-text score format.

One onset column per line::

    #title: Etude 9, mm. 1-5
    #offset: 0
    0: 1=B4@pp
    1: 1=Bb4
    |
    8: 1=Eb4 2=B4@pp
    9: -
    !cresc 200..215 mp voice=2,3

``#key: value`` lines are headers (other ``#`` lines are comments), ``|`` is a
zero-width bar separator, ``-`` marks an empty column, and ``!cresc`` /
``!decresc`` lines declare gradual dynamics over an inclusive column span.
Dynamics are scoped per voice and persist until the next marking.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .score_model import DYNAMICS, Dynamic, NoteEvent, PitchSpec, Score, pressure_to_dynamic

_HEADER_RE = re.compile(r"#\s*([A-Za-z_][\w-]*)\s*:\s*(.*)$")
_COLUMN_RE = re.compile(r"(\d+)\s*:")
_ENTRY_RE = re.compile(r"(?:(\d+)=)?([^@=\s]+)(?:@(\S+))?$")
_PITCH_RE = re.compile(r"([A-G])([b#]?)(\d)$")
_SPAN_RE = re.compile(r"(\d+)\.\.(\d+)$")
_ACCIDENTALS = {"": "natural", "b": "flat", "#": "sharp"}


class ScoreError(Exception):
    """Any problem turning a document into a Score."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class ScoreSyntaxError(ScoreError):
    pass


class DynamicsError(ScoreError):
    pass


@dataclass(frozen=True)
class Entry:
    voice: Optional[int]
    pitch: PitchSpec
    dynamic: Optional[Dynamic]
    line: int = 0
    column: int = 0


@dataclass
class Column:
    t: int
    entries: list[Entry]
    line: int = 0


@dataclass(frozen=True)
class GradualDirective:
    kind: str  # "cresc" or "decresc"
    start: int
    end: int
    target: Optional[Dynamic] = None
    voices: Optional[tuple[int, ...]] = None  # None: every voice in the document
    line: int = 0

    def applies_to(self, voice: Optional[int]) -> bool:
        return self.voices is None or voice in self.voices


@dataclass
class ScoreDocument:
    header: dict[str, str] = field(default_factory=dict)
    columns: list[Column] = field(default_factory=list)
    directives: list[GradualDirective] = field(default_factory=list)

    @property
    def offset(self) -> int:
        return int(self.header.get("offset", 0))


def _parse_dynamic(token: str, line: int, col: int) -> Dynamic:
    if token not in DYNAMICS:
        raise ScoreSyntaxError(f"unknown dynamic token {token!r}", line, col)
    return Dynamic(token)


def _parse_pitch(token: str, line: int, col: int) -> PitchSpec:
    m = _PITCH_RE.match(token)
    if not m:
        raise ScoreSyntaxError(f"unknown pitch token {token!r}", line, col)
    return PitchSpec(m.group(1), _ACCIDENTALS[m.group(2)], int(m.group(3)))


def _parse_entry(token: str, line: int, col: int) -> Entry:
    m = _ENTRY_RE.match(token)
    if not m:
        raise ScoreSyntaxError(f"malformed entry {token!r}", line, col)
    voice = int(m.group(1)) if m.group(1) is not None else None
    pitch_col = col + (len(m.group(1)) + 1 if m.group(1) is not None else 0)
    pitch = _parse_pitch(m.group(2), line, pitch_col)
    dynamic = None
    if m.group(3) is not None:
        dynamic = _parse_dynamic(m.group(3), line, pitch_col + len(m.group(2)) + 1)
    return Entry(voice, pitch, dynamic, line, col)


def _parse_directive(body: str, lineno: int) -> GradualDirective:
    tokens = [(m.group(), m.start() + 2) for m in re.finditer(r"\S+", body)]
    if not tokens or tokens[0][0] not in ("cresc", "decresc"):
        word = tokens[0][0] if tokens else ""
        raise ScoreSyntaxError(f"unknown directive {word!r}", lineno, 2)
    if len(tokens) < 2:
        raise ScoreSyntaxError("directive needs a column span", lineno, len(body) + 2)
    kind = tokens[0][0]
    span_tok, span_col = tokens[1]
    m = _SPAN_RE.match(span_tok)
    if not m:
        raise ScoreSyntaxError(f"malformed span {span_tok!r}", lineno, span_col)
    start, end = int(m.group(1)), int(m.group(2))
    if end < start:
        raise ScoreSyntaxError(f"empty span {span_tok!r}", lineno, span_col)
    target = None
    voices = None
    for tok, col in tokens[2:]:
        if tok.startswith("voice="):
            try:
                voices = tuple(int(v) for v in tok[len("voice="):].split(","))
            except ValueError:
                raise ScoreSyntaxError(f"malformed voice list {tok!r}", lineno, col) from None
        elif target is None:
            target = _parse_dynamic(tok, lineno, col)
        else:
            raise ScoreSyntaxError(f"unexpected token {tok!r}", lineno, col)
    return GradualDirective(kind, start, end, target, voices, lineno)


def parse_document(text: str) -> ScoreDocument:
    """Tokenize ``text`` into header, columns and directives; no dynamics resolution."""
    doc = ScoreDocument()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line == "|":
            continue
        if line.startswith("#"):
            m = _HEADER_RE.match(line)
            if m:
                doc.header[m.group(1).lower()] = m.group(2).strip()
            continue
        if line.startswith("!"):
            doc.directives.append(_parse_directive(line[1:], lineno))
            continue
        indent = len(raw) - len(raw.lstrip())
        m = _COLUMN_RE.match(line)
        if not m:
            raise ScoreSyntaxError(f"expected '<t>:' column line, got {line.split()[0]!r}", lineno, indent + 1)
        entries: list[Entry] = []
        body = line[m.end():]
        tokens = [(tm.group(), indent + m.end() + tm.start() + 1) for tm in re.finditer(r"\S+", body)]
        if len(tokens) == 1 and tokens[0][0] == "-":
            tokens = []
        elif not tokens:
            raise ScoreSyntaxError("column has no entries (use '-' for a rest)", lineno, indent + m.end() + 1)
        seen = set()
        for tok, col in tokens:
            entry = _parse_entry(tok, lineno, col)
            if (entry.voice, entry.pitch) in seen:
                raise ScoreSyntaxError(f"duplicate entry {tok!r}", lineno, col)
            seen.add((entry.voice, entry.pitch))
            entries.append(entry)
        doc.columns.append(Column(int(m.group(1)), entries, lineno))

    offset = doc.header.get("offset", "0")
    if not offset.isdigit():
        raise ScoreSyntaxError(f"offset header must be a non-negative integer, got {offset!r}")
    expected = doc.offset
    for column in doc.columns:
        if column.t != expected:
            raise ScoreSyntaxError(
                f"non-contiguous column numbering: expected {expected}, got {column.t}", column.line, 1
            )
        expected += 1
    end = expected
    for d in doc.directives:
        if d.start < doc.offset or d.end >= end:
            raise ScoreSyntaxError(
                f"directive span {d.start}..{d.end} references missing columns "
                f"(score covers {doc.offset}..{end - 1})",
                d.line,
            )
    return doc


def _step_schedule(start: int, end: int, frm: int, to: int) -> dict[int, int]:
    """Pressure at each column of ``[start, end]`` stepping evenly from ``frm`` to ``to``.

    Step ``k`` of ``n`` lands on column ``start + floor(k * (end - start) / n)``.
    """
    n = abs(to - frm)
    sign = 1 if to > frm else -1
    span = end - start
    landing = [start + (k * span) // n for k in range(1, n + 1)]
    return {t: frm + sign * sum(1 for c in landing if c <= t) for t in range(start, end + 1)}


def resolve_dynamics(doc: ScoreDocument) -> dict[tuple[int, int], int]:
    """Map ``(column t, entry index)`` to the pressure governing that entry."""
    voices = sorted({e.voice for c in doc.columns for e in c.entries}, key=lambda v: (v is not None, v or 0))
    markings: dict[tuple[Optional[int], int], tuple[Dynamic, Entry]] = {}
    for column in doc.columns:
        for entry in column.entries:
            if entry.dynamic is None:
                continue
            key = (entry.voice, column.t)
            if key in markings and markings[key][0] != entry.dynamic:
                raise DynamicsError(
                    f"conflicting dynamics for voice {entry.voice} at t={column.t}", entry.line, entry.column
                )
            markings[key] = (entry.dynamic, entry)

    first_onset: dict[Optional[int], Column] = {}
    for column in doc.columns:
        for entry in column.entries:
            first_onset.setdefault(entry.voice, column)

    levels: dict[tuple[Optional[int], int], Optional[int]] = {}
    for voice in voices:
        directives = sorted((d for d in doc.directives if d.applies_to(voice)), key=lambda d: d.start)
        for a, b in zip(directives, directives[1:]):
            if b.start <= a.end:
                raise DynamicsError(f"overlapping gradual dynamics for voice {voice}", b.line)
        pending = {d.start: d for d in directives}
        prevailing: Optional[int] = None
        schedule: dict[int, int] = {}
        active: Optional[GradualDirective] = None
        for column in doc.columns:
            t = column.t
            if active is not None and t > active.end:
                active = None
            mark = markings.get((voice, t))
            if mark is not None:
                if active is not None and t > active.start:
                    raise DynamicsError(
                        f"dynamic marking inside {active.kind} span {active.start}..{active.end}",
                        mark[1].line,
                        mark[1].column,
                    )
                prevailing = mark[0].pressure
            d = pending.get(t)
            if d is not None:
                if prevailing is None:
                    raise DynamicsError(f"voice {voice} has no dynamic before {d.kind} at t={t}", d.line)
                if d.target is None:
                    target = prevailing + (1 if d.kind == "cresc" else -1)
                    if not 1 <= target <= len(DYNAMICS):
                        raise DynamicsError(f"{d.kind} from pressure {prevailing} leaves the dynamic range", d.line)
                else:
                    target = d.target.pressure
                    if (d.kind == "cresc" and target <= prevailing) or (d.kind == "decresc" and target >= prevailing):
                        raise DynamicsError(
                            f"{d.kind} target {d.target.level} does not move away from pressure {prevailing}", d.line
                        )
                schedule = _step_schedule(d.start, d.end, prevailing, target)
                active = d
            if active is not None:
                prevailing = schedule[t]
            levels[(voice, t)] = prevailing

    pressures: dict[tuple[int, int], int] = {}
    for column in doc.columns:
        for i, entry in enumerate(column.entries):
            level = levels[(entry.voice, column.t)]
            if level is None:
                raise DynamicsError(
                    f"voice {entry.voice} has no initial dynamic (first event at t={first_onset[entry.voice].t})",
                    entry.line,
                    entry.column,
                )
            pressures[(column.t, i)] = level
    return pressures


def parse_score(text: str, source: str = "") -> Score:
    doc = parse_document(text)
    pressures = resolve_dynamics(doc)
    events = [
        NoteEvent(column.t, entry.pitch, pressures[(column.t, i)], entry.voice)
        for column in doc.columns
        for i, entry in enumerate(column.entries)
    ]
    rests = {column.t for column in doc.columns if not column.entries}
    return Score(
        events=tuple(events),
        tick_count=len(doc.columns),
        start=doc.offset,
        rests=frozenset(rests),
        title=doc.header.get("title", ""),
        source=source,
    )


def load_score(path: str | Path) -> Score:
    path = Path(path)
    return parse_score(path.read_text(encoding="utf-8"), source=str(path))


def serialize_score(score: Score) -> str:
    """Canonical text form; ``parse_score(serialize_score(s)) == s``."""
    lines = []
    if score.title:
        lines.append(f"#title: {score.title}")
    if score.start:
        lines.append(f"#offset: {score.start}")
    last_pressure: dict[Optional[int], int] = {}
    by_onset: dict[int, list[NoteEvent]] = {}
    for ev in score.events:
        by_onset.setdefault(ev.onset, []).append(ev)
    for t in score.ticks():
        tokens = []
        for ev in by_onset.get(t, []):
            tok = ev.pitch.spelling() if ev.voice_hint is None else f"{ev.voice_hint}={ev.pitch.spelling()}"
            if last_pressure.get(ev.voice_hint) != ev.pressure:
                tok += "@" + pressure_to_dynamic(ev.pressure).level
                last_pressure[ev.voice_hint] = ev.pressure
            tokens.append(tok)
        lines.append(f"{t}: " + (" ".join(tokens) if tokens else "-"))
    return "\n".join(lines) + "\n"


def export_csv(score: Score) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "y", "pitch", "pressure", "voice"])
    for ev in score.events:
        writer.writerow([ev.onset, ev.y, ev.pitch.spelling(), ev.pressure, "" if ev.voice_hint is None else ev.voice_hint])
    return buf.getvalue().encode("utf-8")
