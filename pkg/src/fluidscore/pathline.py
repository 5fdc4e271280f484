"""Segmentation of a score into chromatic-descent layers (pathlines).

Columns are processed left to right. Every pathline that sounded in the
previous column may claim one event of the current column, in order of
preference: a semitone below its last pitch, the same pitch, a semitone above.
The latter two keep the layer intact but count as deviations. Competing claims
are settled best-first by (step kind, longer current run, lower id); events
nobody claims start new pathlines. When events carry voice hints a pathline only
claims events of its own voice.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .score_model import NoteEvent, Score

# Continuation preference by pitch step; anything else closes the pathline.
STEP_RANK = {-1: 0, 0: 1, 1: 2}


class UndefinedVelocity(ValueError):
    """Raised for a pathline too short to have a velocity."""


@dataclass(frozen=True)
class Pathline:
    id: int
    events: tuple[NoteEvent, ...]

    @property
    def start(self) -> int:
        return self.events[0].onset

    @property
    def end(self) -> int:
        """Last onset, inclusive."""
        return self.events[-1].onset

    @property
    def voice(self) -> Optional[int]:
        return self.events[0].voice_hint

    @property
    def ys(self) -> list[int]:
        return [ev.y for ev in self.events]

    def __len__(self) -> int:
        return len(self.events)

    def active_at(self, t: int) -> bool:
        return self.start <= t <= self.end

    def event_at(self, t: int) -> Optional[NoteEvent]:
        for ev in self.events:
            if ev.onset == t:
                return ev
        return None

    def steps(self) -> list[tuple[int, int]]:
        """``(onset, delta_y)`` for every consecutive pair, keyed by the later onset."""
        return [(b.onset, b.y - a.y) for a, b in zip(self.events, self.events[1:])]

    def deviations(self) -> list[tuple[int, int]]:
        return [(t, dy) for t, dy in self.steps() if dy != -1]


@dataclass(frozen=True)
class AdjacencyRecord:
    t: int
    pairs: tuple[tuple[int, int, int], ...]


def _by_onset(events: Iterable[NoteEvent]) -> dict[int, list[tuple[int, NoteEvent]]]:
    grouped: dict[int, list[tuple[int, NoteEvent]]] = {}
    for i, ev in enumerate(events):
        grouped.setdefault(ev.onset, []).append((i, ev))
    return grouped


def extract_pathlines(score: Score) -> list[Pathline]:
    columns = _by_onset(score.events)
    chains: list[list[NoteEvent]] = []
    open_ids: list[int] = []
    for t in score.ticks():
        column = columns.get(t, [])
        edges = []
        for cid in open_ids:
            chain = chains[cid]
            last = chain[-1]
            for i, ev in column:
                if ev.voice_hint != chain[0].voice_hint:
                    continue
                rank = STEP_RANK.get(ev.y - last.y)
                if rank is not None:
                    edges.append((rank, -len(chain), cid, i))
        edges.sort()
        claims: dict[int, int] = {}
        used: set[int] = set()
        for _, _, cid, i in edges:
            if cid in claims or i in used:
                continue
            claims[cid] = i
            used.add(i)
        by_index = dict(column)
        extended = sorted(claims)
        for cid in extended:
            chains[cid].append(by_index[claims[cid]])
        new_ids = []
        for i, ev in column:
            if i not in used:
                chains.append([ev])
                new_ids.append(len(chains) - 1)
        open_ids = extended + new_ids
    return [Pathline(cid + 1, tuple(chain)) for cid, chain in enumerate(chains)]


def adjacency_at(pathlines: Sequence[Pathline], t: int) -> AdjacencyRecord:
    sounding = []
    for p in pathlines:
        ev = p.event_at(t)
        if ev is not None:
            sounding.append((p.id, ev.y))
    sounding.sort()
    pairs = tuple((a, b, abs(ya - yb)) for (a, ya), (b, yb) in combinations(sounding, 2))
    return AdjacencyRecord(t, pairs)


def density_series(pathlines: Sequence[Pathline], tick_count: int, start: int = 0) -> list[int]:
    """Number of pathlines sounding at each index of ``[start, start + tick_count)``."""
    series = [0] * tick_count
    for p in pathlines:
        for ev in p.events:
            if start <= ev.onset < start + tick_count:
                series[ev.onset - start] += 1
    return series


def velocity_profile(p: Pathline) -> Fraction:
    """Semitones descended per timeline step, measured over descending steps only.

    Repeats and upward steps are deviations and do not enter the rate; a pathline
    with no descending step has no flow and returns 0.
    """
    if len(p) < 2:
        raise UndefinedVelocity(f"pathline {p.id} has a single event")
    semitones = 0
    ticks = 0
    for a, b in zip(p.events, p.events[1:]):
        if b.y < a.y:
            semitones += a.y - b.y
            ticks += b.onset - a.onset
    if ticks == 0:
        return Fraction(0)
    return Fraction(semitones, ticks)
