"""Format tests: annotation parsing and resampling, PGM quantization,
trace CSV, and report JSON key sets."""

import numpy as np
import pytest

from elasticlane.dataio import (
    AnnotationParseError,
    evolution_report,
    format_culane_lines,
    metrics_report,
    parse_culane_lines,
    polyline_from_points,
    read_field_pgm,
    tusimple_report,
    write_field_pgm,
    write_report_json,
    write_trace_csv,
)
from elasticlane.evolve import EvolutionTrace
from elasticlane.field import Field2D
from elasticlane.metrics import DetectionMetrics


def test_parse_single_lane():
    lanes = parse_culane_lines("1 10 5 20 9 30\n")
    assert len(lanes) == 1
    assert np.array_equal(lanes[0], [[1, 10], [5, 20], [9, 30]])


def test_parse_skips_blank_lines():
    lanes = parse_culane_lines("\n1 10 5 20\n\n7 10 9 20\n")
    assert len(lanes) == 2


def test_parse_empty_text():
    assert parse_culane_lines("") == []


def test_parse_odd_token_count_names_line_one():
    with pytest.raises(AnnotationParseError, match="line 1"):
        parse_culane_lines("1 10 5")


def test_parse_errors_carry_the_failing_line_number():
    with pytest.raises(AnnotationParseError, match="line 2"):
        parse_culane_lines("1 10 5 20\nfoo bar")
    with pytest.raises(AnnotationParseError, match="line 3"):
        parse_culane_lines("1 10 5 20\n\n1 nan")


def test_polyline_resamples_onto_rows():
    rows = np.arange(36)
    lane = polyline_from_points(np.array([[1, 10], [5, 20], [9, 30]]), rows)
    assert np.array_equal(lane.valid_rows(), np.arange(10, 31))
    assert lane.xs[10] == 1.0 and lane.xs[20] == 5.0 and lane.xs[30] == 9.0
    assert lane.xs[15] == pytest.approx(3.0)
    assert not lane.valid[:10].any() and not lane.valid[31:].any()


def test_polyline_drops_negative_x_markers():
    rows = np.arange(36)
    lane = polyline_from_points(
        np.array([[1, 10], [-2, 15], [5, 20]]), rows
    )
    assert lane.xs[15] == pytest.approx(3.0)  # interpolated, not -2


def test_polyline_duplicate_y_keeps_first():
    rows = np.arange(36)
    lane = polyline_from_points(np.array([[5, 20], [7, 20], [9, 30]]), rows)
    assert lane.xs[20] == 5.0


def test_polyline_sorts_unordered_points():
    rows = np.arange(36)
    lane = polyline_from_points(np.array([[9, 30], [1, 10]]), rows)
    assert lane.xs[10] == 1.0 and lane.xs[30] == 9.0


def test_polyline_needs_two_usable_points():
    rows = np.arange(36)
    for pts in ([[5, 20]], [[5, 20], [-1, 25]]):
        lane = polyline_from_points(np.array(pts, dtype=float), rows)
        assert lane.n_valid == 0


def test_format_round_trip_within_tolerance():
    rows = np.arange(36)
    xs = 20.0 + 7.0 * np.sin(rows / 5.0)
    lane = polyline_from_points(np.c_[xs, rows], rows)
    text = format_culane_lines([lane])
    back = polyline_from_points(parse_culane_lines(text)[0], rows)
    assert np.array_equal(back.valid, lane.valid)
    assert np.max(np.abs(back.valid_xs() - lane.valid_xs())) < 1e-6


def test_format_empty_lane_list():
    assert format_culane_lines([]) == ""


def pgm_field():
    values = np.zeros((4, 4))
    values[0, 0] = -0.5
    values[0, 1] = 0.5
    return Field2D(values)


def test_pgm_endpoint_and_midgray_bytes():
    data = write_field_pgm(pgm_field())
    assert data.startswith(b"P5\n4 4\n255\n")
    pixels = data[len(b"P5\n4 4\n255\n"):]
    assert pixels[0] == 0      # -0.5
    assert pixels[1] == 255    # +0.5
    assert pixels[2] == 128    # 0, rounded half-up from 127.5


def test_pgm_round_trip_is_exact_on_quantized_values():
    rng = np.random.default_rng(3)
    f = Field2D(rng.uniform(-0.5, 0.5, size=(6, 5)))
    first = write_field_pgm(f)
    back = read_field_pgm(first)
    assert write_field_pgm(back) == first
    assert np.max(np.abs(back.values - f.values)) <= 0.5 / 255.0 + 1e-12


def test_pgm_reader_rejects_other_formats():
    with pytest.raises(ValueError):
        read_field_pgm(b"P2\n4 4\n255\n" + bytes(16))
    with pytest.raises(ValueError):
        read_field_pgm(b"P5\n4 4\n255\n" + bytes(3))
    with pytest.raises(ValueError):
        write_field_pgm(pgm_field(), vmin=0.5, vmax=0.5)


def empty_trace():
    return EvolutionTrace(
        step_indices=np.array([], dtype=np.int64),
        energies=np.array([]),
        lane_errors=np.array([]),
        converged=False,
    )


def test_trace_csv_header_only_when_empty():
    assert write_trace_csv(empty_trace()) == b"step,energy,lane_error\n"


def test_trace_csv_line_count_and_reparse():
    t = EvolutionTrace(
        step_indices=np.array([0, 1, 2]),
        energies=np.array([1.234567890123e-3, 8.7654321e-4, 5.5e-4]),
        lane_errors=np.array([2.0, 1.5, 0.25]),
        converged=True,
    )
    text = write_trace_csv(t).decode("ascii")
    lines = text.strip().split("\n")
    assert len(lines) == 4
    assert lines[0] == "step,energy,lane_error"
    parsed = np.array([line.split(",") for line in lines[1:]], dtype=float)
    assert np.allclose(parsed[:, 1], t.energies, rtol=1e-9)
    assert np.allclose(parsed[:, 2], t.lane_errors, rtol=1e-9)


def test_report_json_layout():
    data = write_report_json({"b": 1, "a": [1, 2]})
    assert data == b'{\n  "a": [\n    1,\n    2\n  ],\n  "b": 1\n}\n'


def test_metrics_report_golden_keys():
    m = DetectionMetrics.from_counts(tp=3, fp=0, fn=0)
    report = metrics_report(m)
    assert report == {
        "f1": 1.0, "precision": 1.0, "recall": 1.0, "tp": 3, "fp": 0, "fn": 0
    }
    zeros = metrics_report(DetectionMetrics.from_counts(0, 0, 0))
    assert zeros == {
        "f1": 0.0, "precision": 0.0, "recall": 0.0, "tp": 0, "fp": 0, "fn": 0
    }


def test_tusimple_report_extends_metric_keys():
    m = DetectionMetrics.from_counts(tp=1, fp=0, fn=0)
    report = tusimple_report(m, acc=1.0, fp_rate=0.0, fn_rate=0.0)
    assert set(report) == {
        "f1", "precision", "recall", "tp", "fp", "fn",
        "acc", "fp_rate", "fn_rate",
    }


def test_evolution_report_keys_and_nonfinite_error():
    t = EvolutionTrace(
        step_indices=np.array([0, 5]),
        energies=np.array([2.0, 1.0]),
        lane_errors=np.array([np.inf, np.inf]),
        converged=False,
    )
    report = evolution_report(t)
    assert report == {
        "final_energy": 1.0,
        "final_lane_error": None,
        "steps": 5,
        "converged": False,
    }
