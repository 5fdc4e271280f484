"""Machine-readable analysis report (JSON with a fixed key order)."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Optional

from .flow import FlowAnalysis, segment_pressures


def _rate(value: Optional[Fraction]) -> Optional[str]:
    return None if value is None else str(value)


def report_dict(analysis: FlowAnalysis, extra_config: Optional[dict[str, Any]] = None) -> dict[str, Any]:
    score = analysis.score
    config = {"window_size": analysis.config.window,
              "turbulence_min_layers_with_spots": analysis.config.min_spot_layers}
    config.update(extra_config or {})
    return {
        "score": {
            "title": score.title,
            "start": score.start,
            "tick_count": score.tick_count,
            "event_count": len(score.events),
        },
        "config": config,
        "pathlines": [
            {
                "id": p.id,
                "voice": p.voice,
                "start": p.start,
                "end": p.end,
                "y": p.ys,
                "pitches": [ev.pitch.spelling() for ev in p.events],
                "pressures": [ev.pressure for ev in p.events],
            }
            for p in analysis.pathlines
        ],
        "spots": [
            {"pathline": s.pathline, "t": s.t, "kind": s.kind, "detail": list(s.detail)}
            for s in analysis.spots
        ],
        "pressure_changes": [
            {"pathline": c.pathline, "t": c.t, "from": c.frm, "to": c.to, "delta": c.delta}
            for c in analysis.pressure_changes
        ],
        "density": analysis.density,
        "velocity": {
            "constant": analysis.velocity.constant,
            "profile": _rate(analysis.velocity.profile),
            "layers": [{"pathline": pid, "profile": _rate(v)} for pid, v in analysis.velocity.layers],
        },
        "phases": [
            {
                "start": seg.start,
                "end": seg.end,
                "label": seg.label,
                "pressures": segment_pressures(analysis.pathlines, seg),
            }
            for seg in analysis.phases
        ],
    }


def render_report(analysis: FlowAnalysis, extra_config: Optional[dict[str, Any]] = None) -> str:
    return json.dumps(report_dict(analysis, extra_config), indent=2, ensure_ascii=False) + "\n"
