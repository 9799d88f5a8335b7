"""Annotation parsing and on-disk formats.

Annotations use the line-per-lane text format: whitespace-separated
alternating x y coordinates, one lane per nonempty line, with x < 0
marking points to skip. Fields serialize as binary PGM (P5), traces as
CSV with a fixed header, reports as JSON objects with fixed key sets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .elm import LanePolyline
from .evolve import EvolutionTrace
from .field import Field2D
from .metrics import DetectionMetrics


class AnnotationParseError(ValueError):
    """Malformed annotation line; message carries the 1-based line number."""


@dataclass(frozen=True)
class AnnotationRecord:
    image_id: str
    lanes: list


def parse_culane_lines(text: str) -> list:
    """Parse one coordinate sequence per nonempty line.

    Returns a list of (k, 2) float arrays of raw (x, y) points; points
    with x < 0 are kept here and dropped at polyline conversion.
    """
    lanes = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) % 2 != 0:
            raise AnnotationParseError(
                f"line {lineno}: odd token count {len(tokens)}"
            )
        try:
            values = np.array([float(t) for t in tokens])
        except ValueError as exc:
            raise AnnotationParseError(f"line {lineno}: {exc}") from None
        if not np.all(np.isfinite(values)):
            raise AnnotationParseError(f"line {lineno}: non-finite coordinate")
        lanes.append(values.reshape(-1, 2))
    return lanes


def polyline_from_points(points: np.ndarray, rows: np.ndarray) -> LanePolyline:
    """Resample raw (x, y) points onto the given row grid.

    x < 0 points are dropped; x(y) is linearly interpolated over the
    remaining points; rows outside the lane's y-extent are invalid. Fewer
    than 2 usable points yields an all-invalid polyline.
    """
    rows = np.asarray(rows, dtype=np.int64)
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    pts = pts[pts[:, 0] >= 0]
    xs = np.full(rows.size, np.nan)
    valid = np.zeros(rows.size, dtype=bool)
    if pts.shape[0] >= 2:
        order = np.argsort(pts[:, 1], kind="stable")
        ys, first = np.unique(pts[order, 1], return_index=True)
        lane_xs = pts[order, 0][first]
        valid = (rows >= ys[0]) & (rows <= ys[-1])
        xs[valid] = np.interp(rows[valid], ys, lane_xs)
    return LanePolyline(rows=rows, xs=xs, valid=valid)


def format_culane_lines(lanes: list) -> str:
    """Inverse of parse_culane_lines for valid polyline samples.

    Each lane becomes one "x y x y ..." line; 6 decimal places keep the
    round trip within 1e-6.
    """
    lines = []
    for lane in lanes:
        pairs = [
            f"{x:.6f} {r:.6f}" for r, x in zip(lane.valid_rows(), lane.valid_xs())
        ]
        lines.append(" ".join(pairs))
    return "\n".join(lines) + ("\n" if lines else "")


def write_field_pgm(f: Field2D, vmin: float = -0.5, vmax: float = 0.5) -> bytes:
    """Binary PGM (P5, maxval 255) with half-up quantization.

    The default window maps the Heaviside range, so -0.5 -> 0, 0 -> 128,
    +0.5 -> 255.
    """
    if not vmax > vmin:
        raise ValueError("vmax must exceed vmin")
    scaled = (f.values - vmin) / (vmax - vmin) * 255.0
    pixels = np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)
    header = f"P5\n{f.shape.width} {f.shape.height}\n255\n".encode("ascii")
    return header + pixels.tobytes()


def read_field_pgm(data: bytes, vmin: float = -0.5, vmax: float = 0.5) -> Field2D:
    """Read back a P5 PGM produced by write_field_pgm."""
    parts = data.split(b"\n", 3)
    if len(parts) < 4 or parts[0] != b"P5" or parts[2] != b"255":
        raise ValueError("not a maxval-255 binary PGM")
    width, height = (int(t) for t in parts[1].split())
    pixels = np.frombuffer(parts[3][: width * height], dtype=np.uint8)
    if pixels.size != width * height:
        raise ValueError("truncated PGM pixel data")
    values = pixels.reshape(height, width) / 255.0 * (vmax - vmin) + vmin
    return Field2D(values)


def write_trace_csv(t: EvolutionTrace) -> bytes:
    lines = ["step,energy,lane_error"]
    for step, energy, error in zip(t.step_indices, t.energies, t.lane_errors):
        lines.append(f"{step},{energy:.12g},{error:.12g}")
    return ("\n".join(lines) + "\n").encode("ascii")


def write_report_json(report: dict) -> bytes:
    return (json.dumps(report, sort_keys=True, indent=2) + "\n").encode("ascii")


def metrics_report(m: DetectionMetrics) -> dict:
    return {
        "f1": m.f1,
        "precision": m.precision,
        "recall": m.recall,
        "tp": m.tp,
        "fp": m.fp,
        "fn": m.fn,
    }


def tusimple_report(
    m: DetectionMetrics, acc: float, fp_rate: float, fn_rate: float
) -> dict:
    report = metrics_report(m)
    report.update({"acc": acc, "fp_rate": fp_rate, "fn_rate": fn_rate})
    return report


def evolution_report(t: EvolutionTrace) -> dict:
    error = t.final_lane_error
    return {
        "final_energy": t.final_energy,
        "final_lane_error": error if math.isfinite(error) else None,
        "steps": t.total_steps,
        "converged": t.converged,
    }
