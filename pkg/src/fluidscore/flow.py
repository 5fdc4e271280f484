"""Laminar / transitional / turbulent classification over pathlines.

The timeline is cut into consecutive windows of ``window`` ticks starting at the
score's first column (the last window may be shorter). Each window gets one
label and equal neighbours are merged into segments:

* ``Sparse``: fewer than two layers sound in the window.
* ``Laminar``: the laminar check holds (parallel motion, one shared pressure
  per tick, identical onsets) and the window holds no spot and no pressure change.
* ``Turbulent``: at least ``min_spot_layers`` distinct layers have spots in the
  window and concurrent layers disagree on pressure somewhere in it.
* ``Transitional``: anything else.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .pathline import (
    Pathline,
    UndefinedVelocity,
    density_series,
    extract_pathlines,
    velocity_profile,
)
from .score_model import Score

LAMINAR = "Laminar"
TRANSITIONAL = "Transitional"
TURBULENT = "Turbulent"
SPARSE = "Sparse"
LABELS = (LAMINAR, TRANSITIONAL, TURBULENT, SPARSE)


@dataclass(frozen=True)
class FlowConfig:
    window: int = 8
    min_spot_layers: int = 2

    def __post_init__(self):
        if self.window < 2:
            raise ValueError(f"window must be >= 2, got {self.window}")
        if self.min_spot_layers < 2:
            raise ValueError(f"min_spot_layers must be >= 2, got {self.min_spot_layers}")


@dataclass(frozen=True)
class SpotEvent:
    pathline: int
    t: int
    kind: str  # "reversal" or "halt"
    detail: tuple[int, int]  # (previous delta_y, current delta_y)


@dataclass(frozen=True)
class PressureChange:
    pathline: int
    t: int
    frm: int
    to: int

    @property
    def delta(self) -> int:
        return self.to - self.frm


@dataclass(frozen=True)
class LCheck:
    start: int
    end: int  # inclusive
    holds: bool
    a_parallel: bool
    b_same_pressure: bool
    c_same_rhythm: bool
    active_layer_count: int


@dataclass(frozen=True)
class PhaseSegment:
    start: int
    end: int  # exclusive
    label: str

    def __contains__(self, t: int) -> bool:
        return self.start <= t < self.end


@dataclass(frozen=True)
class VelocityReport:
    constant: bool
    profile: Optional[Fraction]
    layers: tuple[tuple[int, Optional[Fraction]], ...] = ()


def _active(pathlines: Sequence[Pathline], a: int, b: int) -> list[Pathline]:
    return [p for p in pathlines if any(a <= ev.onset <= b for ev in p.events)]


def check_laminar(pathlines: Sequence[Pathline], window: tuple[int, int]) -> LCheck:
    """Test parallel motion, shared pressure and shared rhythm over an inclusive window."""
    a, b = window
    if b < a:
        raise ValueError(f"empty window {a}..{b}")
    active = _active(pathlines, a, b)
    ys = [{ev.onset: ev.y for ev in p.events} for p in active]
    pressures = [{ev.onset: ev.pressure for ev in p.events} for p in active]

    parallel = True
    for t in range(a + 1, b + 1):
        deltas = {y[t] - y[t - 1] for y in ys if t in y and t - 1 in y}
        if len(deltas) > 1:
            parallel = False
            break

    same_pressure = all(len({pr[t] for pr in pressures if t in pr}) <= 1 for t in range(a, b + 1))

    onsets = [frozenset(t for t in y if a <= t <= b) for y in ys]
    same_rhythm = len(set(onsets)) <= 1

    count = len(active)
    return LCheck(a, b, count >= 2 and parallel and same_pressure and same_rhythm,
                  parallel, same_pressure, same_rhythm, count)


def detect_spots(pathlines: Sequence[Pathline]) -> list[SpotEvent]:
    spots = []
    for p in pathlines:
        steps = p.steps()
        for (_, prev), (t, cur) in zip(steps, steps[1:]):
            if prev != -1:
                continue
            if cur == 1:
                spots.append(SpotEvent(p.id, t, "reversal", (prev, cur)))
            elif cur == 0:
                spots.append(SpotEvent(p.id, t, "halt", (prev, cur)))
    spots.sort(key=lambda s: (s.t, s.pathline))
    return spots


def detect_pressure_changes(pathlines: Sequence[Pathline]) -> list[PressureChange]:
    changes = [
        PressureChange(p.id, b.onset, a.pressure, b.pressure)
        for p in pathlines
        for a, b in zip(p.events, p.events[1:])
        if a.pressure != b.pressure
    ]
    changes.sort(key=lambda c: (c.t, c.pathline))
    return changes


def windows(tick_count: int, size: int, start: int = 0) -> list[tuple[int, int]]:
    """Half-open ``(start, end)`` windows tiling ``[start, start + tick_count)``."""
    end = start + tick_count
    return [(a, min(a + size, end)) for a in range(start, end, size)]


def label_window(
    pathlines: Sequence[Pathline],
    a: int,
    b: int,
    config: FlowConfig,
    spots: Sequence[SpotEvent],
    changes: Sequence[PressureChange],
) -> str:
    """Label the half-open window ``[a, b)``."""
    check = check_laminar(pathlines, (a, b - 1))
    if check.active_layer_count < 2:
        return SPARSE
    window_spots = [s for s in spots if a <= s.t < b]
    has_change = any(a <= c.t < b for c in changes)
    if check.holds and not window_spots and not has_change:
        return LAMINAR
    if len({s.pathline for s in window_spots}) >= config.min_spot_layers and not check.b_same_pressure:
        return TURBULENT
    return TRANSITIONAL


def window_labels(
    pathlines: Sequence[Pathline], tick_count: int, config: FlowConfig = FlowConfig(), start: int = 0
) -> list[tuple[int, int, str]]:
    spots = detect_spots(pathlines)
    changes = detect_pressure_changes(pathlines)
    return [
        (a, b, label_window(pathlines, a, b, config, spots, changes))
        for a, b in windows(tick_count, config.window, start)
    ]


def classify_phases(
    pathlines: Sequence[Pathline], tick_count: int, config: FlowConfig = FlowConfig(), start: int = 0
) -> list[PhaseSegment]:
    segments: list[PhaseSegment] = []
    for a, b, label in window_labels(pathlines, tick_count, config, start):
        if segments and segments[-1].label == label:
            segments[-1] = PhaseSegment(segments[-1].start, b, label)
        else:
            segments.append(PhaseSegment(a, b, label))
    return segments


def velocity_constancy(pathlines: Sequence[Pathline]) -> VelocityReport:
    """Whether every pathline moves at the same rate (a plug flow).

    Single-event pathlines have no rate; they are listed with ``None`` and ignored.
    """
    layers = []
    for p in pathlines:
        try:
            layers.append((p.id, velocity_profile(p)))
        except UndefinedVelocity:
            layers.append((p.id, None))
    rates = {v for _, v in layers if v is not None}
    if len(rates) > 1:
        return VelocityReport(False, None, tuple(layers))
    return VelocityReport(True, next(iter(rates), None), tuple(layers))


def segment_pressures(pathlines: Sequence[Pathline], segment: PhaseSegment) -> list[int]:
    return sorted({ev.pressure for p in pathlines for ev in p.events if ev.onset in segment})


@dataclass
class FlowAnalysis:
    score: Score
    config: FlowConfig
    pathlines: list[Pathline]
    spots: list[SpotEvent]
    pressure_changes: list[PressureChange]
    density: list[int]
    velocity: VelocityReport
    phases: list[PhaseSegment] = field(default_factory=list)

    def phase_at(self, t: int) -> Optional[str]:
        for seg in self.phases:
            if t in seg:
                return seg.label
        return None


def analyze(score: Score, config: FlowConfig = FlowConfig()) -> FlowAnalysis:
    pathlines = extract_pathlines(score)
    return FlowAnalysis(
        score=score,
        config=config,
        pathlines=pathlines,
        spots=detect_spots(pathlines),
        pressure_changes=detect_pressure_changes(pathlines),
        density=density_series(pathlines, score.tick_count, score.start),
        velocity=velocity_constancy(pathlines),
        phases=classify_phases(pathlines, score.tick_count, config, score.start),
    )
