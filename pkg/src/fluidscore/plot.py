"""Scatter plots of pathlines: timeline on x, flow-field coordinate on y.

The SVG and CSV writers are pure string builders and produce identical bytes
for identical input. ``render_png`` draws the same figure with matplotlib.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

from .flow import FlowAnalysis, PhaseSegment
from .pathline import Pathline
from .score_model import Score

# Red, blue, green, purple first: the usual colours for the first four layers.
PALETTE = (
    "#d62728",  # red
    "#1f77b4",  # blue
    "#2ca02c",  # green
    "#9467bd",  # purple
    "#ff7f0e",  # orange
    "#17becf",  # teal
    "#8c564b",  # brown
    "#7f7f7f",  # grey
)

PHASE_COLORS = {
    "Laminar": "#e3f0fb",
    "Transitional": "#fdf3d7",
    "Turbulent": "#fbe0e0",
    "Sparse": "#f2f2f2",
}

TABLE6_RANGE = (-24, 47)


def layer_color(pathline_id: int) -> str:
    return PALETTE[(pathline_id - 1) % len(PALETTE)]


@dataclass(frozen=True)
class PlotSpec:
    width: int = 960
    height: int = 540
    radius: float = 3.0
    y_mode: str = "auto"  # "auto" (data extent +/- 2) or "table6"
    x_tick: int = 8
    y_tick: int = 12
    palette: tuple[str, ...] = PALETTE
    phase_colors: dict = field(default_factory=lambda: dict(PHASE_COLORS))
    margin: tuple[int, int, int, int] = (30, 20, 50, 60)  # top, right, bottom, left

    def __post_init__(self):
        if self.y_mode not in ("auto", "table6"):
            raise ValueError(f"y_mode must be 'auto' or 'table6', got {self.y_mode!r}")


def y_range(ys: Sequence[int], mode: str = "auto") -> tuple[int, int]:
    if mode == "table6":
        lo, hi = TABLE6_RANGE
        if ys:
            lo, hi = min(lo, min(ys)), max(hi, max(ys))
        return lo, hi
    if not ys:
        return -2, 14
    return min(ys) - 2, max(ys) + 2


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Frame:
    def __init__(self, spec: PlotSpec, start: int, ticks: int, lo: int, hi: int):
        top, right, bottom, left = spec.margin
        self.left, self.top = left, top
        self.w = spec.width - left - right
        self.h = spec.height - top - bottom
        self.start, self.ticks = start, max(ticks, 1)
        self.lo, self.hi = lo, hi

    def x_edge(self, t: int) -> float:
        return self.left + (t - self.start) * self.w / self.ticks

    def x(self, t: int) -> float:
        return self.x_edge(t) + 0.5 * self.w / self.ticks

    def y(self, value: int) -> float:
        return self.top + (self.hi - value) * self.h / (self.hi - self.lo)


def emit_scatter_svg(
    score: Score, pathlines: Sequence[Pathline], phases: Sequence[PhaseSegment], spec: PlotSpec = PlotSpec()
) -> bytes:
    lo, hi = y_range([ev.y for ev in score.events], spec.y_mode)
    fr = _Frame(spec, score.start, score.tick_count, lo, hi)
    bottom = fr.top + fr.h
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{spec.width}" '
        f'height="{spec.height}" viewBox="0 0 {spec.width} {spec.height}">',
        f'<rect x="0" y="0" width="{spec.width}" height="{spec.height}" fill="#ffffff"/>',
    ]
    for seg in phases:
        x0, x1 = fr.x_edge(seg.start), fr.x_edge(seg.end)
        out.append(
            f'<rect class="phase phase-{seg.label}" x="{_fmt(x0)}" y="{_fmt(fr.top)}" '
            f'width="{_fmt(x1 - x0)}" height="{_fmt(fr.h)}" fill="{spec.phase_colors[seg.label]}"/>'
        )

    first_tick = lo + (-lo) % spec.y_tick
    for value in range(first_tick, hi + 1, spec.y_tick):
        yy = _fmt(fr.y(value))
        stroke, width = ("#000000", "1.5") if value == 0 else ("#cccccc", "0.5")
        out.append(f'<line class="grid-y" x1="{fr.left}" y1="{yy}" x2="{fr.left + fr.w}" y2="{yy}" '
                   f'stroke="{stroke}" stroke-width="{width}"/>')
        out.append(f'<text x="{fr.left - 6}" y="{yy}" font-size="10" text-anchor="end" '
                   f'dominant-baseline="middle">{value}</text>')
    first_t = score.start + (-score.start) % spec.x_tick
    for t in range(first_t, score.end, spec.x_tick):
        xx = _fmt(fr.x(t))
        out.append(f'<line class="grid-x" x1="{xx}" y1="{bottom}" x2="{xx}" y2="{bottom + 4}" '
                   f'stroke="#000000" stroke-width="0.5"/>')
        out.append(f'<text x="{xx}" y="{bottom + 16}" font-size="10" text-anchor="middle">{t}</text>')

    out.append(f'<line class="axis" x1="{fr.left}" y1="{bottom}" x2="{fr.left + fr.w}" y2="{bottom}" '
               f'stroke="#000000" stroke-width="1"/>')
    out.append(f'<line class="axis" x1="{fr.left}" y1="{fr.top}" x2="{fr.left}" y2="{bottom}" '
               f'stroke="#000000" stroke-width="1"/>')
    out.append(f'<text x="{_fmt(fr.left + fr.w / 2)}" y="{spec.height - 10}" font-size="12" '
               f'text-anchor="middle">timeline t</text>')
    out.append(f'<text x="14" y="{_fmt(fr.top + fr.h / 2)}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 14 {_fmt(fr.top + fr.h / 2)})">pitch y (C3 = 0)</text>')
    if score.title:
        out.append(f'<text x="{fr.left}" y="{fr.top - 10}" font-size="13">{escape(score.title)}</text>')

    for p in pathlines:
        color = spec.palette[(p.id - 1) % len(spec.palette)]
        for ev in p.events:
            out.append(f'<circle class="pathline-{p.id}" cx="{_fmt(fr.x(ev.onset))}" cy="{_fmt(fr.y(ev.y))}" '
                       f'r="{_fmt(spec.radius)}" fill="{color}"/>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def _label_at(phases: Sequence[PhaseSegment], t: int) -> str:
    for seg in phases:
        if t in seg:
            return seg.label
    return ""


def emit_scatter_csv(score: Score, pathlines: Sequence[Pathline], phases: Sequence[PhaseSegment]) -> bytes:
    rows = sorted(
        ((ev.onset, ev.y, p.id, ev.pressure, _label_at(phases, ev.onset)) for p in pathlines for ev in p.events),
        key=lambda r: (r[0], -r[1], r[2]),
    )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "y", "pathline_id", "pressure", "phase_label"])
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def render_png(analysis: FlowAnalysis, path: str | Path, spec: PlotSpec = PlotSpec(), dpi: int = 100) -> Path:
    """Draw the scatter plot with matplotlib and write it to ``path`` as PNG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    score = analysis.score
    lo, hi = y_range([ev.y for ev in score.events], spec.y_mode)
    fig, ax = plt.subplots(figsize=(spec.width / dpi, spec.height / dpi), dpi=dpi)
    try:
        for seg in analysis.phases:
            ax.axvspan(seg.start - 0.5, seg.end - 0.5, color=spec.phase_colors[seg.label], lw=0, zorder=0)
        ax.axhline(0, color="black", lw=1.0, zorder=1)
        for p in analysis.pathlines:
            ax.scatter([ev.onset for ev in p.events], p.ys, s=(2 * spec.radius) ** 2,
                       color=spec.palette[(p.id - 1) % len(spec.palette)], zorder=2)
        ax.set_xlim(score.start - 0.5, max(score.end, score.start + 1) - 0.5)
        ax.set_ylim(lo, hi)
        ax.set_yticks(range(lo + (-lo) % spec.y_tick, hi + 1, spec.y_tick))
        ax.set_xlabel("timeline t")
        ax.set_ylabel("pitch y (C3 = 0)")
        if score.title:
            ax.set_title(score.title, loc="left", fontsize=11)
        fig.tight_layout()
        path = Path(path)
        fig.savefig(path, format="png", metadata={"Software": None})
    finally:
        plt.close(fig)
    return path
