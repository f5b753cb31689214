"""Trajectory-based false-alarm filter.

A window of ``window_len`` frames starts at every ``stride``-th frame.  Each
detection of the window's first frame seeds a candidate; the candidates are
carried forward frame by frame with a gated Hungarian assignment on center
distance.  A frame without an admissible match is skipped and the candidate
keeps its last position.  Candidates seen in at least ``confirm_h`` frames
are kept, their interior gaps are filled by linear interpolation, and chains
that share a detection across windows are stitched under one track id.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .assignment import center_distances, gated_assignment
from .blobs import Detection, Source


@dataclass(frozen=True)
class PfParams:
    window_len: int = 5
    gate: float = 7.0
    confirm_h: int = 3
    stride: int = 1
    reject_static: bool = True

    def __post_init__(self):
        if not 1 <= self.confirm_h <= self.window_len:
            raise ValueError("need 1 <= confirm_h <= window_len")
        if self.gate < 1:
            raise ValueError("gate must be >= 1")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")


@dataclass(frozen=True)
class Candidate:
    positions: dict  # frame -> index into that frame's detections
    confirmed: bool

    @property
    def h(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class Tracklet:
    track_id: int
    boxes: tuple  # ((frame, bbox), ...) with strictly increasing frames


def associate(frame_a_dets, frame_b_dets, gate: float = 7.0, reject_static: bool = False) -> list[tuple[int, int]]:
    """Cheapest one-to-one pairing whose centers differ by less than ``gate`` on both axes.

    With ``reject_static`` a pair must also have moved (nonzero center
    distance), so a box repeated in place never counts as a trajectory.
    """
    if not frame_a_dets or not frame_b_dets:
        return []
    ca = np.array([d.center for d in frame_a_dets])
    cb = np.array([d.center for d in frame_b_dets])
    dx = np.abs(ca[:, None, 0] - cb[None, :, 0])
    dy = np.abs(ca[:, None, 1] - cb[None, :, 1])
    dist = center_distances(ca, cb)
    ok = (dx < gate) & (dy < gate)
    if reject_static:
        ok &= dist > 0
    pairs = gated_assignment(dist, ok)
    assert len({a for a, _ in pairs}) == len({b for _, b in pairs}) == len(pairs)
    return pairs


def run_window(per_frame_dets, start: int, params: PfParams) -> list[Candidate]:
    """Candidates seeded at ``start`` and followed through one window."""
    end = min(start + params.window_len, len(per_frame_dets))
    seeds = per_frame_dets[start]
    chains = [{start: j} for j in range(len(seeds))]
    current = list(seeds)
    for f in range(start + 1, end):
        for a, b in associate(current, per_frame_dets[f], params.gate, params.reject_static):
            chains[a][f] = b
            current[a] = per_frame_dets[f][b]
    return [Candidate(c, len(c) >= params.confirm_h) for c in chains]


def _interpolate(d0: Detection, d1: Detection, frame: int) -> Detection:
    a = (frame - d0.frame) / (d1.frame - d0.frame)
    (cx0, cy0), (cx1, cy1) = d0.center, d1.center
    w = d0.bbox[2] + a * (d1.bbox[2] - d0.bbox[2])
    h = d0.bbox[3] + a * (d1.bbox[3] - d0.bbox[3])
    cx = cx0 + a * (cx1 - cx0)
    cy = cy0 + a * (cy1 - cy0)
    score = d0.score + a * (d1.score - d0.score)
    return Detection(frame, (cx - w / 2.0, cy - h / 2.0, w, h), score, Source.INTERPOLATED)


def run_pipeline_filter(per_frame_dets, params: PfParams = PfParams()):
    """Filter per-frame detections; returns ``(per-frame detections, tracklets)``.

    Every returned detection carries a track id.  Interpolated detections are
    only produced between two confirmed positions of the same chain.
    """
    per_frame_dets = [list(d) for d in per_frame_dets]
    M = len(per_frame_dets)
    ids: dict[tuple[int, int], int] = {}
    track_frames: dict[int, set[int]] = {}
    fills: dict[tuple[int, int], Detection] = {}
    next_id = 0

    for start in range(0, M, params.stride):
        for cand in run_window(per_frame_dets, start, params):
            if not cand.confirmed:
                continue
            members = sorted(cand.positions.items())
            unassigned = [(f, j) for f, j in members if (f, j) not in ids]
            known = [ids[(f, j)] for f, j in reversed(members) if (f, j) in ids]
            tid = known[0] if known else None
            if tid is not None and any(f in track_frames[tid] for f, _ in unassigned):
                tid = None
            if tid is None:
                tid = next_id
                next_id += 1
                track_frames[tid] = set()
            for f, j in unassigned:
                ids[(f, j)] = tid
                track_frames[tid].add(f)
            for (f0, j0), (f1, j1) in zip(members, members[1:]):
                owner = ids[(f1, j1)]
                if ids[(f0, j0)] != owner:
                    continue
                for f in range(f0 + 1, f1):
                    fills.setdefault((owner, f), _interpolate(
                        per_frame_dets[f0][j0], per_frame_dets[f1][j1], f))

    out: list[list[Detection]] = [[] for _ in range(M)]
    for (f, j), tid in ids.items():
        out[f].append(replace(per_frame_dets[f][j], track_id=tid))
    for (tid, f), det in fills.items():
        if f not in track_frames[tid]:
            out[f].append(replace(det, track_id=tid))
            track_frames[tid].add(f)
    for dets in out:
        dets.sort(key=lambda d: (d.track_id, d.bbox))

    by_track: dict[int, list] = {}
    for f, dets in enumerate(out):
        for d in dets:
            by_track.setdefault(d.track_id, []).append((f, d.bbox))
    tracklets = [Tracklet(tid, tuple(boxes)) for tid, boxes in sorted(by_track.items())]
    return out, tracklets
