import math
from dataclasses import dataclass

import numpy as np
import pytest

from mmb.assignment import center_distances
from mmb.boxes import centers, intersection_areas
from mmb.metrics import (
    average_precision,
    clear_mot,
    evaluate_detections,
    f1_score,
    match_detections,
    mean_average_precision,
    pr_curve_and_ap,
    sot_rates,
)
from oracles import best_partial_matching


@dataclass(frozen=True)
class Box:
    frame: int
    bbox: tuple
    score: float = 1.0
    track_id: int = -1


def random_frame_sets(rng, n_frames=3):
    dets, gts = [], []
    for f in range(n_frames):
        for _ in range(rng.integers(0, 5)):
            gts.append(Box(f, (*rng.integers(0, 20, 2).astype(float), 3.0, 3.0)))
        for _ in range(rng.integers(0, 5)):
            dets.append(Box(f, (*rng.integers(0, 20, 2).astype(float), 3.0, 3.0), float(rng.integers(1, 6)) / 5))
    return dets, gts


def test_perfect_detections():
    gts = [Box(f, (2.0 * f, 3.0, 3.0, 3.0)) for f in range(5)]
    res = pr_curve_and_ap(gts, gts)
    assert (res.precision, res.recall, res.f1, res.ap) == (1.0, 1.0, 1.0, 1.0)


def test_empty_cases():
    assert evaluate_detections([], []).f1 == 0.0
    res = pr_curve_and_ap([Box(0, (0, 0, 2, 2))], [])
    assert res.ap == 0.0 and res.pr_points == [] and res.fp == 1
    res = pr_curve_and_ap([], [Box(0, (0, 0, 2, 2))])
    assert res.ap == 0.0 and res.fn == 1


def test_any_overlap_counts_as_a_hit():
    g = [Box(0, (0.0, 0.0, 4.0, 4.0))]
    assert match_detections([Box(0, (3.0, 3.0, 4.0, 4.0))], g)[0] == 1
    assert match_detections([Box(0, (4.0, 0.0, 4.0, 4.0))], g)[0] == 0  # edges touch, no area


def test_matching_equals_exhaustive_optimum(rng):
    for _ in range(100):
        dets, gts = random_frame_sets(rng, n_frames=1)
        tp, fp, fn, pairs = match_detections(dets, gts)
        assert tp + fp == len(dets) and tp + fn == len(gts)
        if not dets or not gts:
            continue
        db, gb = [d.bbox for d in dets], [g.bbox for g in gts]
        cost = center_distances(centers(db), centers(gb))
        card, total = best_partial_matching(cost, intersection_areas(db, gb) > 0)
        assert tp == card
        assert sum(cost[i, j] for i, j in pairs) == pytest.approx(total)


def test_hand_computed_pr_sweep():
    gts = [Box(0, (0.0, 0.0, 3.0, 3.0)), Box(1, (10.0, 10.0, 3.0, 3.0))]
    dets = [
        Box(0, (0.0, 0.0, 3.0, 3.0), 0.9),    # hit
        Box(0, (20.0, 20.0, 3.0, 3.0), 0.8),  # miss
        Box(1, (10.0, 10.0, 3.0, 3.0), 0.5),  # hit
    ]
    res = pr_curve_and_ap(dets, gts)
    assert res.pr_points == [(0.5, 1.0), (0.5, 0.5), (1.0, 2 / 3)]
    # envelope 1, 2/3, 2/3 over recall 0, .5, .5, 1 with the anchor at recall 0
    assert res.ap == pytest.approx(0.5 * 1.0 + 0.5 * (2 / 3))
    assert (res.tp, res.fp, res.fn) == (2, 1, 0)


def _ap_oracle(points):
    env, out = 0.0, []
    for r, p in reversed(points):
        env = max(env, p)
        out.append((r, env))
    out.reverse()
    area, prev_r, prev_p = 0.0, 0.0, out[0][1]
    for r, p in out:
        area += (r - prev_r) * (p + prev_p) / 2
        prev_r, prev_p = r, p
    return area


def test_metric_invariants_on_random_sets(rng):
    for _ in range(300):
        dets, gts = random_frame_sets(rng)
        res = pr_curve_and_ap(dets, gts)
        flat = evaluate_detections(dets, gts)
        assert (res.tp, res.fp, res.fn) == (flat.tp, flat.fp, flat.fn)
        assert res.tp + res.fp == len(dets)
        assert res.tp + res.fn == len(gts)
        for v in (res.precision, res.recall, res.f1, res.ap):
            assert 0.0 <= v <= 1.0
        assert res.f1 == pytest.approx(f1_score(res.precision, res.recall))
        if not gts:
            continue
        recalls = [r for r, _ in res.pr_points]
        assert recalls == sorted(recalls)
        # each sweep point equals a from-scratch evaluation at that threshold
        for t, (r, p) in zip(sorted({d.score for d in dets}, reverse=True), res.pr_points):
            at = evaluate_detections([d for d in dets if d.score >= t], gts)
            assert (r, p) == pytest.approx((at.recall, at.precision))
        assert res.ap == pytest.approx(_ap_oracle(res.pr_points) if res.pr_points else 0.0)
        assert res.ap <= (recalls[-1] if recalls else 0.0) + 1e-12


def test_average_precision_and_map():
    assert average_precision([]) == 0.0
    assert average_precision([(1.0, 1.0)]) == 1.0
    assert mean_average_precision([0.5, 1.0]) == 0.75
    assert mean_average_precision([]) == 0.0


def tracks(rows):
    return [Box(f, b, 1.0, tid) for f, tid, b in rows]


def test_perfect_tracking():
    gt = tracks([(f, i, (float(5 * f), float(10 * i), 3.0, 3.0)) for f in range(6) for i in range(2)])
    res = clear_mot(gt, gt)
    assert (res.mota, res.motp, res.ids, res.fp, res.fn, res.mt, res.ml, res.fm) == (1.0, 0.0, 0, 0, 0, 2, 0, 0)


def test_crossing_tracks_give_two_switches():
    a = [(float(x), 10.0, 4.0, 4.0) for x in (0, 4, 8, 12, 16, 20)]
    b = a[::-1]
    gt = tracks([(f, 0, a[f]) for f in range(6)] + [(f, 1, b[f]) for f in range(6)])
    hyp = tracks([(f, 1, a[f] if f < 3 else b[f]) for f in range(6)]
                 + [(f, 2, b[f] if f < 3 else a[f]) for f in range(6)])
    res = clear_mot(hyp, gt)
    assert res.ids == 2
    assert res.fp == res.fn == 0
    assert res.mota == pytest.approx(1 - 2 / 12)


def test_misses_fragmentation_and_coverage_classes():
    gt = tracks([(f, 0, (0.0, 0.0, 3.0, 3.0)) for f in range(10)]
                + [(f, 1, (20.0, 20.0, 3.0, 3.0)) for f in range(10)]
                + [(f, 2, (40.0, 40.0, 3.0, 3.0)) for f in range(10)])
    hits_0 = [f for f in range(10) if f not in (3, 4)]   # 80%: partially tracked, one fragment
    hits_1 = [0]                                           # 10%: mostly lost
    hyp = tracks([(f, 7, (0.0, 0.0, 3.0, 3.0)) for f in hits_0]
                 + [(f, 8, (20.0, 20.0, 3.0, 3.0)) for f in hits_1]
                 + [(f, 9, (40.0, 40.0, 3.0, 3.0)) for f in range(10)]
                 + [(0, 5, (90.0, 90.0, 3.0, 3.0))])
    res = clear_mot(hyp, gt)
    assert (res.mt, res.pt, res.ml) == (1, 1, 1)
    assert res.fm == 1
    assert (res.fn, res.fp, res.ids) == (2 + 9, 1, 0)
    assert res.mota == pytest.approx(1 - 12 / 30)


def test_nan_conventions_and_duplicates():
    res = clear_mot(tracks([(0, 1, (0.0, 0.0, 2.0, 2.0))]), [])
    assert math.isnan(res.mota) and math.isnan(res.motp) and res.fp == 1
    with pytest.raises(ValueError):
        clear_mot(tracks([(0, 1, (0.0, 0.0, 2.0, 2.0)), (0, 1, (5.0, 5.0, 2.0, 2.0))]), [])


def test_overlap_gate_restricts_matches():
    gt = tracks([(0, 0, (0.0, 0.0, 4.0, 4.0))])
    hyp = tracks([(0, 1, (3.0, 3.0, 4.0, 4.0))])
    assert clear_mot(hyp, gt).num_matches == 1
    assert clear_mot(hyp, gt, overlap_gate=0.5).num_matches == 0


def test_motp_is_mean_center_distance():
    gt = tracks([(0, 0, (0.0, 0.0, 4.0, 4.0)), (1, 0, (0.0, 0.0, 4.0, 4.0))])
    hyp = tracks([(0, 1, (3.0, 0.0, 4.0, 4.0)), (1, 1, (0.0, 1.0, 4.0, 4.0))])
    assert clear_mot(hyp, gt).motp == pytest.approx(2.0)


def test_sot_rates():
    gt = [(0.0, 0.0, 4.0, 4.0)] * 4
    pred = [(0.0, 0.0, 4.0, 4.0), (4.9, 0.0, 4.0, 4.0), (5.0, 0.0, 4.0, 4.0), (1.0, 0.0, 4.0, 4.0)]
    res = sot_rates(pred, gt)
    assert res.dpr_at_alpha == pytest.approx(0.75)   # errors 0, 4.9, 5, 1 against alpha 5
    assert res.osr_at_beta == pytest.approx(0.5)     # IoU 1, ~0, 0, 0.6 against beta 0.5
    with pytest.raises(ValueError):
        sot_rates(pred, gt[:2])
