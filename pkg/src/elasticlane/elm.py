"""Implicit lane maps: encoding row-sampled lanes into smooth fields and
decoding them back from zero contours.

A lane is a row-sampled polyline (one x per valid row). Its level-set
field ``phi`` holds the per-row signed horizontal distance to the curve,
negative on the left. Pushing ``phi`` through the smoothed Heaviside ramp
and recentering gives the lane map ``psi = H_sigma(phi) - 0.5``, which is
-0.5 far left of the lane, +0.5 far right, and exactly 0 on it. Decoding
walks each in-range row and finds the sub-pixel zero crossing.

Grid rows are indexed 0..height-1; a lane's first stored valid row is its
anchor end, which ordering and departure filtering both key on.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .field import Field2D, GridShape

logger = logging.getLogger(__name__)

# Per-row lane validity, one bool per grid row.
RangeMask = np.ndarray


class DegenerateLaneError(ValueError):
    """Lane has fewer than 2 valid rows inside the grid."""


class CapacityError(ValueError):
    """More lanes than the stack has slots."""


@dataclass(frozen=True)
class LanePolyline:
    """Row-sampled lane: strictly increasing row indices, one x per row.

    ``valid`` flags which rows carry a real sample; xs at invalid rows are
    ignored (and may be NaN).
    """

    rows: np.ndarray
    xs: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        xs = np.asarray(self.xs, dtype=np.float64)
        valid = np.asarray(self.valid, dtype=bool)
        if not (rows.shape == xs.shape == valid.shape) or rows.ndim != 1:
            raise ValueError("rows, xs and valid must be 1D arrays of equal length")
        if rows.size > 1 and np.any(np.diff(rows) <= 0):
            raise ValueError("rows must be strictly increasing")
        if not np.all(np.isfinite(xs[valid])):
            raise ValueError("xs must be finite on valid rows")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "valid", valid)

    @property
    def n_valid(self) -> int:
        return int(np.count_nonzero(self.valid))

    def valid_rows(self) -> np.ndarray:
        return self.rows[self.valid]

    def valid_xs(self) -> np.ndarray:
        return self.xs[self.valid]


@dataclass(frozen=True)
class HeavisideParams:
    """Half-width ``sigma`` (pixels) of the Heaviside smoothing band."""

    sigma: float = 3.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class ElmStack:
    """Fixed-capacity stack of per-lane maps with existence and range flags.

    Existing slots always form a prefix; empty slots hold zero fields and
    all-false range masks.
    """

    capacity: int
    fields: list
    exists: np.ndarray
    ranges: list

    def __post_init__(self):
        exists = np.asarray(self.exists, dtype=bool)
        if not (len(self.fields) == exists.size == len(self.ranges) == self.capacity):
            raise ValueError("stack slots must all have length == capacity")
        n = int(np.count_nonzero(exists))
        if not np.all(exists[:n]) or np.any(exists[n:]):
            raise ValueError("existing slots must precede non-existing slots")
        for f, present in zip(self.fields, exists):
            if present and np.max(np.abs(f.values)) > 0.5:
                raise ValueError("encoded lane maps must stay within [-0.5, 0.5]")
        object.__setattr__(self, "exists", exists)

    @property
    def n_lanes(self) -> int:
        return int(np.count_nonzero(self.exists))


def _inrange_valid(lane: LanePolyline, shape: GridShape):
    keep = lane.valid & (lane.rows >= 0) & (lane.rows < shape.height)
    return lane.rows[keep], lane.xs[keep]


def build_level_set(lane: LanePolyline, shape: GridShape) -> Field2D:
    """Per-row signed horizontal distance field phi(x, row) = x - x_row.

    Rows without a sample inherit x from the nearest valid row (constant
    extension; ties go to the lower row index), which keeps the field
    smooth for the periodic transform while the range mask records the
    true lane extent.
    """
    v_rows, v_xs = _inrange_valid(lane, shape)
    if v_rows.size < 2:
        raise DegenerateLaneError(
            f"lane needs at least 2 valid rows inside the grid, has {v_rows.size}"
        )
    grid_rows = np.arange(shape.height)
    right = np.searchsorted(v_rows, grid_rows)
    left = np.clip(right - 1, 0, v_rows.size - 1)
    right = np.clip(right, 0, v_rows.size - 1)
    use_left = np.abs(grid_rows - v_rows[left]) <= np.abs(v_rows[right] - grid_rows)
    x_per_row = np.where(use_left, v_xs[left], v_xs[right])
    phi = np.arange(shape.width)[np.newaxis, :] - x_per_row[:, np.newaxis]
    return Field2D(phi)


def smoothed_heaviside(phi: Field2D, p: HeavisideParams) -> Field2D:
    """Piecewise-linear step: 0 below -sigma, ramp (1 + phi/sigma)/2 inside, 1 above."""
    ramp = 0.5 * (1.0 + phi.values / p.sigma)
    return Field2D(np.clip(ramp, 0.0, 1.0))


def heaviside_slope(phi: Field2D, p: HeavisideParams) -> Field2D:
    """Derivative of the smoothed Heaviside: 1/(2*sigma) strictly inside the band, else 0."""
    inside = np.abs(phi.values) < p.sigma
    return Field2D(np.where(inside, 1.0 / (2.0 * p.sigma), 0.0))


def encode_lane(lane: LanePolyline, shape: GridShape, p: HeavisideParams):
    """Encode a lane as the map psi = H_sigma(phi) - 0.5 plus its range mask.

    psi is in [-0.5, 0.5], exactly 0 on the lane; the mask is true exactly
    on rows carrying a valid sample.
    """
    v_rows, v_xs = _inrange_valid(lane, shape)
    if v_rows.size >= 2:
        slopes = np.abs(np.diff(v_xs) / np.diff(v_rows))
        if np.any(slopes > 2.0 * p.sigma):
            # Row-wise decoding is ill-posed beyond the band width.
            logger.warning(
                "near-horizontal lane segment: max |dx/drow| = %.1f exceeds band width %.1f",
                float(np.max(slopes)),
                2.0 * p.sigma,
            )
    phi = build_level_set(lane, shape)
    psi = Field2D(smoothed_heaviside(phi, p).values - 0.5)
    mask = np.zeros(shape.height, dtype=bool)
    mask[v_rows] = True
    return psi, mask


def decode_lane(psi: Field2D, mask: RangeMask) -> LanePolyline:
    """Extract the sub-pixel zero crossing of psi per masked row.

    A crossing is a pixel pair with psi <= 0 on the left and > 0 on the
    right, located by linear interpolation. With several crossings the one
    nearest the previously decoded x wins (largest jump wins on the first
    decoded row). Rows without a crossing are marked invalid.
    """
    if np.max(np.abs(psi.values)) > 0.5 + 1e-6:
        raise ValueError("psi values outside the Heaviside range [-0.5, 0.5]")
    mask = np.asarray(mask, dtype=bool)
    if mask.size != psi.shape.height:
        raise ValueError("range mask length must equal grid height")
    rows = np.flatnonzero(mask)
    xs = np.full(rows.size, np.nan)
    valid = np.zeros(rows.size, dtype=bool)
    prev_x = None
    for i, r in enumerate(rows):
        vals = psi.values[r]
        bracket = np.flatnonzero((vals[:-1] <= 0.0) & (vals[1:] > 0.0))
        if bracket.size == 0:
            continue
        jumps = vals[bracket + 1] - vals[bracket]
        cand = bracket + (-vals[bracket]) / jumps
        if prev_x is None:
            pick = int(np.argmax(jumps))
        else:
            pick = int(np.argmin(np.abs(cand - prev_x)))
        xs[i] = cand[pick]
        valid[i] = True
        prev_x = xs[i]
    return LanePolyline(rows=rows, xs=xs, valid=valid)


def order_and_pad(
    lanes: list, capacity: int, shape: GridShape, p: HeavisideParams
) -> ElmStack:
    """Encode lanes into a stack sorted left-to-right, empty slots at the end.

    The sort key is x at each lane's anchor (first valid) row; ties break
    on x at the last valid row, then on input order.
    """
    if len(lanes) > capacity:
        raise CapacityError(f"{len(lanes)} lanes exceed capacity {capacity}")

    def sort_key(item):
        idx, lane = item
        v_rows, v_xs = _inrange_valid(lane, shape)
        if v_rows.size == 0:
            raise DegenerateLaneError("cannot order a lane with no valid rows in the grid")
        return (v_xs[0], v_xs[-1], idx)

    ordered = [lane for _, lane in sorted(enumerate(lanes), key=sort_key)]
    fields = []
    ranges = []
    for lane in ordered:
        psi, mask = encode_lane(lane, shape, p)
        fields.append(psi)
        ranges.append(mask)
    for _ in range(capacity - len(ordered)):
        fields.append(Field2D.zeros(shape))
        ranges.append(np.zeros(shape.height, dtype=bool))
    exists = np.arange(capacity) < len(ordered)
    return ElmStack(capacity=capacity, fields=fields, exists=exists, ranges=ranges)


def filter_departure_points(lane: LanePolyline, threshold: float = 50.0) -> LanePolyline:
    """Invalidate rows whose x jumps more than ``threshold`` px from the
    previously kept row, scanning from the anchor end. The first valid row
    is always kept."""
    valid = lane.valid.copy()
    prev_x = None
    for i in np.flatnonzero(lane.valid):
        if prev_x is not None and abs(lane.xs[i] - prev_x) > threshold:
            valid[i] = False
        else:
            prev_x = lane.xs[i]
    return LanePolyline(rows=lane.rows.copy(), xs=lane.xs.copy(), valid=valid)
