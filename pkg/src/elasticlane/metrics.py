"""Lane-detection scoring: stroke-rasterized IoU matching with F1 counts,
and point-threshold accuracy with lane-level FP/FN rates.

Lanes are matched one-to-one by the Hungarian method (scipy's
linear_sum_assignment), so scores are deterministic and independent of
input order. All denominators follow zero conventions: a ratio whose
denominator vanishes is 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .elm import LanePolyline
from .field import GridShape


@dataclass(frozen=True)
class LaneSet:
    """Lanes of one image, with the pixel size the masks are drawn at."""

    image_shape: GridShape
    lanes: list

    @property
    def n_lanes(self) -> int:
        return len(self.lanes)


@dataclass(frozen=True)
class DetectionMetrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "DetectionMetrics":
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        denom = precision + recall
        f1 = 2.0 * precision * recall / denom if denom > 0 else 0.0
        return cls(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1)


def rasterize_lane(
    lane: LanePolyline, image_shape: GridShape, width_px: int = 30
) -> np.ndarray:
    """Draw the polyline as a stroke of ``width_px`` pixels per row.

    x is linearly interpolated between valid rows; rows outside the valid
    extent stay blank. Returns a boolean mask, clipped to the image.
    """
    if width_px < 1:
        raise ValueError("width_px must be at least 1")
    mask = np.zeros((image_shape.height, image_shape.width), dtype=bool)
    v_rows = lane.valid_rows()
    v_xs = lane.valid_xs()
    if v_rows.size == 0:
        return mask
    r_lo = max(int(v_rows[0]), 0)
    r_hi = min(int(v_rows[-1]), image_shape.height - 1)
    if r_hi < r_lo:
        return mask
    rows = np.arange(r_lo, r_hi + 1)
    centers = np.interp(rows, v_rows, v_xs)
    starts = np.floor(centers + 0.5).astype(np.int64) - (width_px - 1) // 2
    for r, s in zip(rows, starts):
        lo = max(int(s), 0)
        hi = min(int(s) + width_px, image_shape.width)
        if hi > lo:
            mask[r, lo:hi] = True
    return mask


def lane_iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two masks; 0 when both are empty."""
    if a.shape != b.shape:
        raise ValueError(f"mask shapes differ: {a.shape} vs {b.shape}")
    union = np.count_nonzero(a | b)
    if union == 0:
        return 0.0
    return np.count_nonzero(a & b) / union


def match_and_score(
    preds: LaneSet, gts: LaneSet, iou_thresh: float = 0.5, width_px: int = 30
) -> DetectionMetrics:
    """One-to-one IoU matching; pairs at or above the threshold are true
    positives, leftovers are false positives / negatives."""
    if preds.image_shape != gts.image_shape:
        raise ValueError("prediction and ground-truth image shapes differ")
    pred_masks = [rasterize_lane(l, preds.image_shape, width_px) for l in preds.lanes]
    gt_masks = [rasterize_lane(l, gts.image_shape, width_px) for l in gts.lanes]
    tp = 0
    if pred_masks and gt_masks:
        iou = np.array([[lane_iou(p, g) for g in gt_masks] for p in pred_masks])
        rows, cols = linear_sum_assignment(-iou)
        tp = int(np.count_nonzero(iou[rows, cols] >= iou_thresh))
    fp = len(pred_masks) - tp
    fn = len(gt_masks) - tp
    return DetectionMetrics.from_counts(tp=tp, fp=fp, fn=fn)


def _shared_rows(preds: LaneSet, gts: LaneSet) -> None:
    rows = None
    for lane in list(preds.lanes) + list(gts.lanes):
        if rows is None:
            rows = lane.rows
        elif not np.array_equal(lane.rows, rows):
            raise ValueError("all lanes must be sampled on the same row set")


def tusimple_tally(
    preds: LaneSet, gts: LaneSet, x_thresh: float = 20.0, match_frac: float = 0.85
):
    """Raw point-threshold tallies for one image: (correct points, total gt
    points, matched lanes, false-positive lanes, false-negative lanes).
    Summable across images."""
    _shared_rows(preds, gts)
    n_pred, n_gt = preds.n_lanes, gts.n_lanes
    total_gt_points = sum(l.n_valid for l in gts.lanes)
    correct = np.zeros((n_pred, n_gt))
    for i, p in enumerate(preds.lanes):
        for j, g in enumerate(gts.lanes):
            both = p.valid & g.valid
            correct[i, j] = np.count_nonzero(
                np.abs(p.xs[both] - g.xs[both]) < x_thresh
            )
    correct_points = 0
    lane_tp = 0
    if n_pred and n_gt:
        rows, cols = linear_sum_assignment(-correct)
        for i, j in zip(rows, cols):
            correct_points += int(correct[i, j])
            gt_points = gts.lanes[j].n_valid
            frac = correct[i, j] / gt_points if gt_points > 0 else 0.0
            if frac >= match_frac:
                lane_tp += 1
    return correct_points, total_gt_points, lane_tp, n_pred - lane_tp, n_gt - lane_tp


def tusimple_score(
    preds: LaneSet, gts: LaneSet, x_thresh: float = 20.0, match_frac: float = 0.85
):
    """Point accuracy plus lane-level false-positive/negative rates.

    A point is correct when |x_pred - x_gt| < x_thresh under the lane
    assignment maximizing correct points. A predicted lane with fewer than
    ``match_frac`` of its ground truth's points correct is a false
    positive; a ground truth without a qualifying prediction is a false
    negative. Returns (acc, fp_rate, fn_rate).
    """
    correct_points, total_gt, _, fp, fn = tusimple_tally(
        preds, gts, x_thresh, match_frac
    )
    acc = correct_points / total_gt if total_gt > 0 else 0.0
    fp_rate = fp / preds.n_lanes if preds.n_lanes > 0 else 0.0
    fn_rate = fn / gts.n_lanes if gts.n_lanes > 0 else 0.0
    return acc, fp_rate, fn_rate


def tusimple_counts(
    preds: LaneSet, gts: LaneSet, x_thresh: float = 20.0, match_frac: float = 0.85
) -> DetectionMetrics:
    """Lane-level detection counts under the point-threshold matching."""
    _, _, tp, fp, fn = tusimple_tally(preds, gts, x_thresh, match_frac)
    return DetectionMetrics.from_counts(tp=tp, fp=fp, fn=fn)
