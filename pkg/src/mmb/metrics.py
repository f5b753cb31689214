"""Detection, multi-object tracking and single-object tracking metrics.

Tiny targets make IoU thresholds unstable, so a detection counts as a hit
when its box overlaps a ground-truth box at all; ambiguous overlaps are
resolved by a one-to-one matching on center distance.

Inputs are duck-typed: anything with ``frame`` and ``bbox`` attributes works
(plus ``score`` for ranking and ``track_id`` for tracking).
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .assignment import center_distances, gated_assignment
from .boxes import centers, intersection_areas, iou_matrix


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def f1_score(precision: float, recall: float) -> float:
    return _ratio(2.0 * precision * recall, precision + recall)


@dataclass
class DetEvalResult:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    pr_points: list = field(default_factory=list)  # (recall, precision), recall non-decreasing
    ap: float = 0.0

    def as_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "fn": self.fn,
            "precision": self.precision, "recall": self.recall, "f1": self.f1, "ap": self.ap,
        }


@dataclass
class MotEvalResult:
    mota: float
    motp: float
    mt: int
    pt: int
    ml: int
    fp: int
    fn: int
    ids: int
    fm: int
    num_matches: int = 0
    num_gt: int = 0

    def as_dict(self) -> dict:
        return {
            "mota": self.mota, "motp": self.motp, "mt": self.mt, "pt": self.pt, "ml": self.ml,
            "fp": self.fp, "fn": self.fn, "ids": self.ids, "fm": self.fm,
        }


@dataclass
class SotEvalResult:
    dpr_at_alpha: float
    osr_at_beta: float
    alpha: float = 5.0
    beta: float = 0.5


def _pair_tables(det_boxes, gt_boxes):
    overlap = intersection_areas(det_boxes, gt_boxes) > 0
    cost = center_distances(centers(det_boxes), centers(gt_boxes))
    return cost, overlap


def match_detections(dets, gts) -> tuple[int, int, int, list[tuple[int, int]]]:
    """Match one frame: ``(tp, fp, fn, [(det_index, gt_index), ...])``."""
    if not dets or not gts:
        return 0, len(dets), len(gts), []
    cost, overlap = _pair_tables([d.bbox for d in dets], [g.bbox for g in gts])
    pairs = gated_assignment(cost, overlap)
    tp = len(pairs)
    return tp, len(dets) - tp, len(gts) - tp, pairs


def _group(records) -> dict[int, list]:
    by_frame: dict[int, list] = defaultdict(list)
    for r in records:
        by_frame[r.frame].append(r)
    return by_frame


def evaluate_detections(dets, gts) -> DetEvalResult:
    """Aggregate P/R/F1 over all frames, every detection counted at face value."""
    det_f, gt_f = _group(dets), _group(gts)
    tp = fp = fn = 0
    for frame in set(det_f) | set(gt_f):
        a, b, c, _ = match_detections(det_f.get(frame, []), gt_f.get(frame, []))
        tp, fp, fn = tp + a, fp + b, fn + c
    p, r = _ratio(tp, tp + fp), _ratio(tp, tp + fn)
    return DetEvalResult(tp, fp, fn, p, r, f1_score(p, r))


def average_precision(pr_points) -> float:
    """Trapezoidal area under the precision envelope, anchored at recall 0."""
    if not pr_points:
        return 0.0
    rec = np.array([r for r, _ in pr_points], dtype=np.float64)
    prec = np.array([p for _, p in pr_points], dtype=np.float64)
    env = np.maximum.accumulate(prec[::-1])[::-1]
    rec = np.concatenate([[0.0], rec])
    env = np.concatenate([[env[0]], env])
    return float(np.sum(np.diff(rec) * (env[1:] + env[:-1]) / 2.0))


def pr_curve_and_ap(dets, gts) -> DetEvalResult:
    """Sweep score thresholds from high to low and integrate the PR curve.

    The counts and P/R/F1 in the result are those with every detection kept.
    """
    gts = list(gts)
    dets = list(dets)
    det_f, gt_f = _group(dets), _group(gts)
    n_gt = len(gts)
    if n_gt == 0:
        return DetEvalResult(0, len(dets), 0, 0.0, 0.0, 0.0, [], 0.0)

    thresholds = sorted({d.score for d in dets}, reverse=True)
    frames_at: dict[float, set] = defaultdict(set)
    count_at: dict[float, int] = defaultdict(int)
    for d in dets:
        frames_at[d.score].add(d.frame)
        count_at[d.score] += 1
    tp_frame: dict[int, int] = {}
    kept = 0
    points = []
    for t in thresholds:
        for frame in frames_at[t]:
            live = [d for d in det_f[frame] if d.score >= t]
            tp_frame[frame], _, _, _ = match_detections(live, gt_f.get(frame, []))
        kept += count_at[t]
        tp = sum(tp_frame.values())
        points.append((tp / n_gt, tp / kept))

    tp = sum(tp_frame.values())
    p, r = _ratio(tp, len(dets)), tp / n_gt
    return DetEvalResult(tp, len(dets) - tp, n_gt - tp, p, r, f1_score(p, r), points, average_precision(points))


def mean_average_precision(results) -> float:
    """Arithmetic mean of per-sequence AP."""
    aps = [r.ap if isinstance(r, DetEvalResult) else float(r) for r in results]
    return float(np.mean(aps)) if aps else 0.0


def _flatten_tracks(items):
    """Accept flat records or tracklets; yield ``(frame, track_id, bbox)``."""
    for it in items:
        if hasattr(it, "boxes"):
            for frame, bbox in it.boxes:
                yield int(frame), int(it.track_id), tuple(bbox)
        else:
            yield int(it.frame), int(it.track_id), tuple(it.bbox)


def _index_tracks(items, side: str) -> dict[int, dict[int, tuple]]:
    by_frame: dict[int, dict[int, tuple]] = defaultdict(dict)
    for frame, tid, bbox in _flatten_tracks(items):
        if tid in by_frame[frame]:
            raise ValueError(f"duplicate {side} entry for frame {frame}, id {tid}")
        by_frame[frame][tid] = bbox
    return by_frame


def clear_mot(hypotheses, ground_truth, overlap_gate: float = 0.0) -> MotEvalResult:
    """CLEAR-MOT accounting with overlap admissibility and center-distance MOTP.

    A pair is admissible when the boxes intersect with positive area and their
    IoU is at least ``overlap_gate``. Correspondences from the previous frame
    are kept while admissible; the rest are solved by gated assignment. MOTA
    is a fraction (1.0 is perfect) and MOTP is in pixels.
    """
    hyp_f = _index_tracks(hypotheses, "hypothesis")
    gt_f = _index_tracks(ground_truth, "ground-truth")

    def admissible(a, b):
        inter = intersection_areas(a, b) > 0
        if overlap_gate > 0:
            inter &= iou_matrix(a, b) >= overlap_gate
        return inter

    prev: dict[int, int] = {}
    last_seen: dict[int, int] = {}
    tracked: dict[int, list[bool]] = defaultdict(list)
    fp = fn = ids = matches = n_gt = 0
    dist_sum = 0.0

    for frame in sorted(set(hyp_f) | set(gt_f)):
        G, H = gt_f.get(frame, {}), hyp_f.get(frame, {})
        cur: dict[int, int] = {}
        for g, h in prev.items():
            if g in G and h in H and admissible([G[g]], [H[h]])[0, 0]:
                cur[g] = h
        free_g = [g for g in G if g not in cur]
        used = set(cur.values())
        free_h = [h for h in H if h not in used]
        if free_g and free_h:
            gb = [G[g] for g in free_g]
            hb = [H[h] for h in free_h]
            cost = center_distances(centers(gb), centers(hb))
            for i, j in gated_assignment(cost, admissible(gb, hb)):
                g, h = free_g[i], free_h[j]
                if g in last_seen and last_seen[g] != h:
                    ids += 1
                cur[g] = h
        for g, h in cur.items():
            (gx, gy), (hx, hy) = centers([G[g], H[h]])
            dist_sum += math.hypot(gx - hx, gy - hy)
        for g in G:
            tracked[g].append(g in cur)
        matches += len(cur)
        n_gt += len(G)
        fn += len(G) - len(cur)
        fp += len(H) - len(cur)
        last_seen.update(cur)
        prev = cur

    mt = pt = ml = fm = 0
    for flags in tracked.values():
        cover = sum(flags) / len(flags)
        if cover > 0.8:
            mt += 1
        elif cover < 0.2:
            ml += 1
        else:
            pt += 1
        hits = [i for i, f in enumerate(flags) if f]
        if hits:
            span = flags[hits[0]:hits[-1] + 1]
            fm += sum(1 for a, b in zip(span, span[1:]) if a and not b)

    mota = 1.0 - (fn + fp + ids) / n_gt if n_gt else float("nan")
    motp = dist_sum / matches if matches else float("nan")
    return MotEvalResult(mota, motp, mt, pt, ml, fp, fn, ids, fm, matches, n_gt)


def sot_rates(predicted, ground_truth, alpha: float = 5.0, beta: float = 0.5) -> SotEvalResult:
    """Fraction of frames with center error < alpha and with IoU > beta."""
    predicted, ground_truth = list(predicted), list(ground_truth)
    if len(predicted) != len(ground_truth):
        raise ValueError(f"length mismatch: {len(predicted)} predictions vs {len(ground_truth)} ground-truth boxes")
    if not predicted:
        return SotEvalResult(0.0, 0.0, alpha, beta)
    cp, cg = centers(predicted), centers(ground_truth)
    err = np.hypot(cp[:, 0] - cg[:, 0], cp[:, 1] - cg[:, 1])
    overlap = np.array([iou_matrix([p], [g])[0, 0] for p, g in zip(predicted, ground_truth)])
    return SotEvalResult(float(np.mean(err < alpha)), float(np.mean(overlap > beta)), alpha, beta)
