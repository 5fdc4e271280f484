"""Fluid-flow analysis of chromatic layers in symbolic scores."""

from .flow import FlowAnalysis, FlowConfig, analyze, classify_phases, check_laminar, detect_spots
from .ingest import ScoreError, export_csv, load_score, parse_score, serialize_score
from .pathline import Pathline, extract_pathlines
from .score_model import Dynamic, NoteEvent, PitchSpec, Score, dynamic_to_pressure, pitch_to_y, y_to_pitch

__all__ = [
    "Dynamic", "FlowAnalysis", "FlowConfig", "NoteEvent", "Pathline", "PitchSpec", "Score", "ScoreError",
    "analyze", "check_laminar", "classify_phases", "detect_spots", "dynamic_to_pressure", "export_csv",
    "extract_pathlines", "load_score", "parse_score", "pitch_to_y", "serialize_score", "y_to_pitch",
]
