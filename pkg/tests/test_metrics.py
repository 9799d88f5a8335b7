"""Scoring tests: stroke rasterization, IoU, one-to-one matching with F1
counts, and the point-threshold accuracy suite."""

import numpy as np
import pytest

from elasticlane.elm import LanePolyline
from elasticlane.field import GridShape
from elasticlane.metrics import (
    DetectionMetrics,
    LaneSet,
    lane_iou,
    match_and_score,
    rasterize_lane,
    tusimple_counts,
    tusimple_score,
    tusimple_tally,
)


def vlane(x, height, valid=None):
    rows = np.arange(height)
    if valid is None:
        valid = np.ones(height, bool)
    return LanePolyline(rows=rows, xs=np.full(height, float(x)), valid=valid)


SHAPE = GridShape(100, 100)


def lane_set(*lanes, shape=SHAPE):
    return LaneSet(image_shape=shape, lanes=list(lanes))


def test_rasterize_vertical_stroke_area():
    mask = rasterize_lane(vlane(50, 100), SHAPE, width_px=30)
    assert mask.sum() == 3000
    row = np.flatnonzero(mask[0])
    assert row[0] == 36 and row[-1] == 65


def test_rasterize_width_one_follows_rounding():
    mask = rasterize_lane(vlane(12.4, 100), SHAPE, width_px=1)
    assert np.array_equal(np.flatnonzero(mask.any(axis=0)), [12])
    mask = rasterize_lane(vlane(12.6, 100), SHAPE, width_px=1)
    assert np.array_equal(np.flatnonzero(mask.any(axis=0)), [13])


def test_rasterize_interpolates_between_valid_rows():
    valid = np.zeros(10, bool)
    valid[0] = valid[9] = True
    xs = np.full(10, np.nan)
    xs[0], xs[9] = 10.0, 19.0
    lane = LanePolyline(rows=np.arange(10), xs=xs, valid=valid)
    mask = rasterize_lane(lane, GridShape(40, 10), width_px=1)
    for r in range(10):
        assert np.array_equal(np.flatnonzero(mask[r]), [10 + r])


def test_rasterize_blank_outside_valid_extent():
    valid = np.zeros(100, bool)
    valid[20:30] = True
    mask = rasterize_lane(vlane(50, 100, valid), SHAPE, width_px=5)
    assert mask[:20].sum() == 0 and mask[30:].sum() == 0
    assert mask[20:30].sum() == 10 * 5


def test_rasterize_empty_lane_and_clipping():
    assert rasterize_lane(vlane(50, 100, np.zeros(100, bool)), SHAPE).sum() == 0
    near_edge = rasterize_lane(vlane(2, 100), SHAPE, width_px=30)
    assert near_edge[0].sum() == 18  # stroke truncated at the left border
    with pytest.raises(ValueError):
        rasterize_lane(vlane(50, 100), SHAPE, width_px=0)


def test_lane_iou_cases():
    a = rasterize_lane(vlane(50, 100), SHAPE, width_px=30)
    b = rasterize_lane(vlane(80, 100), SHAPE, width_px=20)
    empty = np.zeros_like(a)
    assert lane_iou(a, a) == 1.0
    assert lane_iou(a, b) == 0.0
    assert lane_iou(empty, empty) == 0.0
    with pytest.raises(ValueError):
        lane_iou(a, np.zeros((5, 5), bool))


def test_half_overlap_iou_is_one_third():
    a = rasterize_lane(vlane(40, 100), SHAPE, width_px=30)
    b = rasterize_lane(vlane(55, 100), SHAPE, width_px=30)
    assert lane_iou(a, b) == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_self_match_is_perfect():
    lanes = lane_set(vlane(30, 100), vlane(70, 100))
    m = match_and_score(lanes, lanes)
    assert (m.tp, m.fp, m.fn) == (2, 0, 0)
    assert m.f1 == 1.0


def test_one_tp_one_fp_gives_two_thirds_f1():
    preds = lane_set(vlane(30, 100), vlane(75, 100))
    gts = lane_set(vlane(30, 100))
    m = match_and_score(preds, gts)
    assert (m.tp, m.fp, m.fn) == (1, 1, 0)
    assert m.f1 == 2.0 / 3.0


def test_missed_lane_counts_as_false_negative():
    preds = lane_set(vlane(30, 100))
    gts = lane_set(vlane(30, 100), vlane(75, 100))
    m = match_and_score(preds, gts)
    assert (m.tp, m.fp, m.fn) == (1, 0, 1)
    assert m.recall == 0.5 and m.precision == 1.0


def test_empty_sets_follow_zero_conventions():
    some = lane_set(vlane(30, 100))
    none = lane_set()
    m = match_and_score(none, some)
    assert (m.tp, m.fp, m.fn) == (0, 0, 1)
    assert m.precision == 0.0 and m.f1 == 0.0
    m = match_and_score(some, none)
    assert (m.tp, m.fp, m.fn) == (0, 1, 0)
    m = match_and_score(none, none)
    assert (m.tp, m.fp, m.fn) == (0, 0, 0) and m.f1 == 0.0


def test_iou_threshold_gates_the_match():
    preds = lane_set(vlane(55, 100))
    gts = lane_set(vlane(40, 100))  # half-overlap, IoU 1/3
    assert match_and_score(preds, gts, iou_thresh=0.5).tp == 0
    assert match_and_score(preds, gts, iou_thresh=0.25).tp == 1


def test_matching_is_one_to_one():
    # two predictions near one ground truth: only one can claim it
    preds = lane_set(vlane(40, 100), vlane(41, 100))
    gts = lane_set(vlane(40, 100))
    m = match_and_score(preds, gts)
    assert (m.tp, m.fp, m.fn) == (1, 1, 0)


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        match_and_score(lane_set(vlane(30, 100)),
                        lane_set(vlane(30, 50), shape=GridShape(100, 50)))


def test_point_accuracy_perfect_case():
    lanes = lane_set(vlane(30, 40), vlane(70, 40), shape=GridShape(200, 40))
    acc, fp_rate, fn_rate = tusimple_score(lanes, lanes)
    assert acc == 1.0 and fp_rate == 0.0 and fn_rate == 0.0


def test_point_accuracy_offset_beyond_threshold():
    preds = lane_set(vlane(70, 40), shape=GridShape(200, 40))
    gts = lane_set(vlane(30, 40), shape=GridShape(200, 40))
    acc, fp_rate, fn_rate = tusimple_score(preds, gts)
    assert acc == 0.0 and fp_rate == 1.0 and fn_rate == 1.0


def test_point_accuracy_threshold_is_strict():
    preds = lane_set(vlane(50, 40), shape=GridShape(200, 40))
    gts = lane_set(vlane(30, 40), shape=GridShape(200, 40))
    acc, _, _ = tusimple_score(preds, gts, x_thresh=20.0)
    assert acc == 0.0
    acc, _, _ = tusimple_score(preds, gts, x_thresh=20.0 + 1e-9)
    assert acc == 1.0


def test_partial_lane_counts_points_but_not_the_lane():
    # 30 of 36 points inside the threshold: below the 85% bar, so the
    # lane is simultaneously a false positive and a false negative,
    # yet the correct points still count toward accuracy.
    xs = np.full(36, 30.0)
    xs[:6] = 90.0
    pred = LanePolyline(rows=np.arange(36), xs=xs, valid=np.ones(36, bool))
    preds = lane_set(pred, shape=GridShape(200, 36))
    gts = lane_set(vlane(30, 36), shape=GridShape(200, 36))
    acc, fp_rate, fn_rate = tusimple_score(preds, gts)
    assert acc == pytest.approx(30.0 / 36.0)
    assert fp_rate == 1.0 and fn_rate == 1.0


def test_match_frac_boundary_inclusive():
    xs = np.full(20, 30.0)
    xs[:3] = 90.0  # 17/20 = 0.85 exactly
    pred = LanePolyline(rows=np.arange(20), xs=xs, valid=np.ones(20, bool))
    preds = lane_set(pred, shape=GridShape(200, 20))
    gts = lane_set(vlane(30, 20), shape=GridShape(200, 20))
    _, _, tp, fp, fn = tusimple_tally(preds, gts, match_frac=0.85)
    assert (tp, fp, fn) == (1, 0, 0)


def test_tally_sums_across_images():
    shape = GridShape(200, 40)
    a = tusimple_tally(lane_set(vlane(30, 40), shape=shape),
                       lane_set(vlane(30, 40), shape=shape))
    b = tusimple_tally(lane_set(vlane(70, 40), shape=shape),
                       lane_set(vlane(130, 40), shape=shape))
    total = [x + y for x, y in zip(a, b)]
    assert total == [40, 80, 1, 1, 1]


def test_shared_row_validation():
    shape = GridShape(200, 40)
    other_rows = LanePolyline(rows=np.arange(1, 41),
                              xs=np.full(40, 30.0),
                              valid=np.ones(40, bool))
    with pytest.raises(ValueError):
        tusimple_score(lane_set(vlane(30, 40), shape=shape),
                       lane_set(other_rows, shape=shape))


def test_tusimple_counts_wraps_tally():
    shape = GridShape(200, 40)
    lanes = lane_set(vlane(30, 40), shape=shape)
    m = tusimple_counts(lanes, lanes)
    assert isinstance(m, DetectionMetrics)
    assert (m.tp, m.fp, m.fn, m.f1) == (1, 0, 0, 1.0)


def test_from_counts_zero_conventions():
    z = DetectionMetrics.from_counts(0, 0, 0)
    assert z.precision == 0.0 and z.recall == 0.0 and z.f1 == 0.0
