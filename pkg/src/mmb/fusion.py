"""Merge the differencing and background-subtraction candidates of one frame."""

from __future__ import annotations

from .blobs import Detection, Source
from .boxes import intersection_areas, iomin_matrix, iou_matrix, union_box

OVERLAP_MEASURES = {"iou": iou_matrix, "iomin": iomin_matrix}


def _components(n: int, edges) -> list[list[int]]:
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _sort_key(d: Detection):
    return (d.bbox[1], d.bbox[0], d.bbox[3], d.bbox[2], -d.score, d.source.value)


def merge_cross_overlaps(
    amfd_dets: list[Detection],
    lrmc_dets: list[Detection],
    threshold: float,
    measure: str = "iomin",
) -> list[Detection]:
    """Merge each connected group of cross-branch overlaps into one union box.

    Only differencing/background pairs whose overlap reaches ``threshold``
    are linked; boxes from the same branch are distinct components already
    and are never merged with each other directly.  ``measure`` is ``"iou"``
    or ``"iomin"`` (intersection over the smaller box, which also catches a
    small box sitting inside a motion smear).
    """
    a = sorted(amfd_dets, key=_sort_key)
    b = sorted(lrmc_dets, key=_sort_key)
    if not a or not b:
        return a + b if a else b
    ov = OVERLAP_MEASURES[measure]([d.bbox for d in a], [d.bbox for d in b])
    edges = [(i, len(a) + j) for i, j in zip(*((ov >= threshold).nonzero()))]
    dets = a + b
    merged = []
    for group in _components(len(dets), edges):
        if len(group) == 1:
            merged.append(dets[group[0]])
            continue
        members = [dets[i] for i in group]
        merged.append(Detection(
            members[0].frame,
            union_box([m.bbox for m in members]),
            max(m.score for m in members),
            Source.FUSED,
        ))
    return sorted(merged, key=_sort_key)


def fuse(
    amfd_dets: list[Detection],
    lrmc_dets: list[Detection],
    roi_gating: bool = False,
    merge_overlap_threshold: float = 0.3,
    measure: str = "iomin",
) -> list[Detection]:
    """Union of both candidate sets with overlapping boxes merged.

    With ``roi_gating`` the background-subtraction candidates must touch some
    differencing box to be kept.
    """
    if measure not in OVERLAP_MEASURES:
        raise ValueError(f"unknown overlap measure {measure!r}")
    frames = {d.frame for d in amfd_dets} | {d.frame for d in lrmc_dets}
    if len(frames) > 1:
        raise ValueError(f"fuse called with detections from several frames: {sorted(frames)}")
    if roi_gating and lrmc_dets:
        if amfd_dets:
            touch = intersection_areas([d.bbox for d in lrmc_dets], [d.bbox for d in amfd_dets]) > 0
            lrmc_dets = [d for d, hit in zip(lrmc_dets, touch.any(axis=1)) if hit]
        else:
            lrmc_dets = []
    return merge_cross_overlaps(list(amfd_dets), list(lrmc_dets), merge_overlap_threshold, measure)
