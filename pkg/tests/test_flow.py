import random

import pytest

from fluidscore import flow
from fluidscore.flow import (
    FlowConfig,
    PhaseSegment,
    check_laminar,
    classify_phases,
    detect_pressure_changes,
    detect_spots,
    velocity_constancy,
    window_labels,
    windows,
)
from fluidscore.ingest import parse_score
from fluidscore.pathline import Pathline, extract_pathlines
from fluidscore.score_model import NoteEvent, Score, y_to_pitch
from oracles import brute_force_labels, layered_score, random_flow_score


def ev(t, y, pressure=9, voice=None):
    return NoteEvent(t, y_to_pitch(y), pressure, voice)


def paths_for(lines, pressures=None):
    events = []
    for v, ys in enumerate(lines):
        for t, y in enumerate(ys):
            if y is None:
                continue
            p = pressures[v] if pressures else 9
            events.append(NoteEvent(t, y_to_pitch(y), p, v + 1))
    ticks = max(len(ys) for ys in lines)
    sounding = {e.onset for e in events}
    score = Score(tuple(events), ticks, rests=frozenset(set(range(ticks)) - sounding))
    return score, extract_pathlines(score)


# --- laminar check ------------------------------------------------------------

def test_opening_window_is_laminar(opening):
    check = check_laminar(opening.pathlines, (8, 15))
    assert check.holds
    assert (check.a_parallel, check.b_same_pressure, check.c_same_rhythm) == (True, True, True)
    assert check.active_layer_count == 2


def test_single_layer_never_laminar(opening):
    check = check_laminar(opening.pathlines, (0, 7))
    assert not check.holds
    assert check.active_layer_count == 1


def test_different_dynamics_break_condition_b():
    _, paths = paths_for([[20, 19, 18, 17], [10, 9, 8, 7]], pressures=[9, 12])
    check = check_laminar(paths, (0, 3))
    assert check.a_parallel and check.c_same_rhythm
    assert not check.b_same_pressure and not check.holds


def test_contrary_motion_breaks_condition_a():
    _, paths = paths_for([[20, 19, 18, 17], [10, 9, 10, 9]])
    assert not check_laminar(paths, (0, 3)).a_parallel


def test_staggered_entry_breaks_condition_c():
    _, paths = paths_for([[20, 19, 18, 17], [None, 9, 8, 7]])
    check = check_laminar(paths, (0, 3))
    assert check.a_parallel and check.b_same_pressure and not check.c_same_rhythm


def test_harmonic_interval_may_change():
    # parallel motion is about equal steps, not equal intervals between layers
    _, paths = paths_for([[20, 19, 18, 17], [10, 9, 8, 7], [3, 2, 1, 0]])
    assert check_laminar(paths, (0, 3)).holds


def test_empty_window_rejected(opening):
    with pytest.raises(ValueError):
        check_laminar(opening.pathlines, (5, 4))


# --- spots and pressure changes ---------------------------------------------------

def test_transition_spots(transition):
    spots = transition.spots
    assert [(s.t, s.kind) for s in spots] == [(206, "halt"), (213, "halt")]
    bass = min(transition.pathlines, key=lambda p: p.ys[0])
    assert {s.pathline for s in spots} == {bass.id}


def test_pure_descent_has_no_spots(opening):
    assert detect_spots(opening.pathlines) == []


def test_halt_on_final_step():
    (p,) = extract_pathlines(Score((ev(0, 5), ev(1, 4), ev(2, 3), ev(3, 3)), 4))
    (spot,) = detect_spots([p])
    assert (spot.t, spot.kind, spot.detail) == (3, "halt", (-1, 0))


def test_reversal_detected():
    (p,) = extract_pathlines(Score((ev(0, 5), ev(1, 4), ev(2, 5), ev(3, 4)), 4))
    (spot,) = detect_spots([p])
    assert (spot.t, spot.kind, spot.detail) == (2, "reversal", (-1, 1))


def test_repeat_without_prior_descent_is_not_a_spot():
    (p,) = extract_pathlines(Score((ev(0, 5), ev(1, 5), ev(2, 4)), 3))
    assert detect_spots([p]) == []


def test_transition_pressure_change(transition):
    bass = min(transition.pathlines, key=lambda p: p.ys[0])
    changes = [c for c in transition.pressure_changes if c.pathline == bass.id]
    assert [(c.t, c.frm, c.to, c.delta) for c in changes] == [(198, 6, 9, 3)]


def test_constant_dynamic_has_no_changes(opening):
    assert detect_pressure_changes(opening.pathlines) == []


def test_return_fixture_decrescendo_sums_to_minus_six(returning):
    layer = returning.pathlines[0]
    assert (layer.start, layer.end) == (489, 504)
    changes = [c for c in returning.pressure_changes if c.pathline == layer.id]
    assert changes[0].t == 497
    assert sum(c.delta for c in changes) == -6
    assert (changes[0].frm, changes[-1].to) == (13, 7)


# --- phases -------------------------------------------------------------------

def test_windows_tile_the_timeline():
    assert windows(20, 8) == [(0, 8), (8, 16), (16, 20)]
    assert windows(0, 8) == []
    assert windows(5, 8, start=100) == [(100, 105)]


def test_opening_phases(opening):
    assert opening.phases == [PhaseSegment(0, 8, "Sparse"), PhaseSegment(8, 40, "Laminar")]


def test_transition_phases(transition):
    assert transition.phases == [PhaseSegment(192, 216, "Transitional")]


def test_turbulent_phases(turbulent):
    assert turbulent.phases == [PhaseSegment(406, 433, "Turbulent")]
    assert flow.segment_pressures(turbulent.pathlines, turbulent.phases[0]) == [10, 11, 12, 13]


def test_return_to_laminar(returning):
    assert [(s.start, s.end, s.label) for s in returning.phases] == [
        (489, 497, "Laminar"), (497, 505, "Transitional"), (505, 513, "Laminar"),
    ]


def test_empty_segmentation():
    assert classify_phases([], 0) == []


def test_config_validation():
    with pytest.raises(ValueError):
        FlowConfig(window=1)
    with pytest.raises(ValueError):
        FlowConfig(min_spot_layers=1)


def test_raising_spot_threshold_demotes_turbulence(turbulent):
    strict = classify_phases(turbulent.pathlines, 27, FlowConfig(min_spot_layers=3), start=406)
    assert {s.label for s in strict} == {"Transitional"}


def test_segments_partition_and_alternate():
    rng = random.Random(3)
    for _ in range(100):
        score = random_flow_score(rng)
        config = FlowConfig(window=rng.randint(2, 6))
        paths = extract_pathlines(score)
        segs = classify_phases(paths, score.tick_count, config, score.start)
        assert segs[0].start == score.start and segs[-1].end == score.end
        assert all(a.end == b.start and a.label != b.label for a, b in zip(segs, segs[1:]))
        assert classify_phases(paths, score.tick_count, config, score.start) == segs


def test_label_soundness():
    rng = random.Random(4)
    for _ in range(100):
        score = random_flow_score(rng)
        config = FlowConfig(window=rng.randint(2, 6))
        paths = extract_pathlines(score)
        spots = detect_spots(paths)
        changes = detect_pressure_changes(paths)
        for a, b, label in window_labels(paths, score.tick_count, config, score.start):
            inside_spots = [s for s in spots if a <= s.t < b]
            if label == "Laminar":
                assert check_laminar(paths, (a, b - 1)).holds
                assert not inside_spots and not any(a <= c.t < b for c in changes)
            if label == "Turbulent":
                assert len({s.pathline for s in inside_spots}) >= 2


@pytest.mark.parametrize("seed", range(40))
def test_window_labels_match_brute_force(seed):
    rng = random.Random(1000 + seed)
    score = random_flow_score(rng)
    config = FlowConfig(window=rng.randint(2, 6), min_spot_layers=rng.choice((2, 2, 3)))
    paths = extract_pathlines(score)
    raw = [[(e.onset, e.y, e.pressure) for e in p.events] for p in paths]
    expected = brute_force_labels(raw, score.start, score.tick_count, config.window, config.min_spot_layers)
    assert window_labels(paths, score.tick_count, config, score.start) == expected


# --- velocity -----------------------------------------------------------------

def test_plug_flow_in_fixtures(opening, transition, turbulent):
    for analysis in (opening, transition, turbulent):
        report = velocity_constancy(analysis.pathlines)
        assert report.constant and report.profile == 1


def test_mixed_speeds_not_constant():
    fast = Pathline(1, tuple(ev(t, 20 - t) for t in range(5)))
    slow = Pathline(2, tuple(ev(t, 10 - t // 2) for t in range(0, 5, 2)))
    report = velocity_constancy([fast, slow])
    assert not report.constant and report.profile is None


def test_empty_is_vacuously_constant():
    report = velocity_constancy([])
    assert report.constant and report.profile is None


def test_single_event_layers_are_ignored():
    score = parse_score("0: 1=C4@p 2=C5@p\n1: 1=B3\n2: 1=Bb3\n")
    paths = extract_pathlines(score)
    report = velocity_constancy(paths)
    assert report.constant and report.profile == 1
    lone = next(p for p in paths if len(p) == 1)
    assert dict(report.layers)[lone.id] is None
