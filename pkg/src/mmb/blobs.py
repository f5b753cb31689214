"""Connected components of binary masks and the size/aspect-ratio gate."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .frameio import Box

_STRUCTURES = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


class Source(str, enum.Enum):
    AMFD = "amfd"
    LRMC = "lrmc"
    FUSED = "fused"
    INTERPOLATED = "interpolated"


@dataclass(frozen=True, eq=False)
class Blob:
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        if len(self.xs) < 1 or len(self.xs) != len(self.ys):
            raise ValueError("a blob needs at least one pixel")

    @property
    def pixels(self) -> frozenset[tuple[int, int]]:
        return frozenset(zip(self.xs.tolist(), self.ys.tolist()))

    @property
    def area(self) -> int:
        return len(self.xs)

    @property
    def bbox(self) -> tuple[int, int, int, int]:
        x0, y0 = int(self.xs.min()), int(self.ys.min())
        return (x0, y0, int(self.xs.max()) - x0 + 1, int(self.ys.max()) - y0 + 1)

    @property
    def aspect_ratio(self) -> float:
        _, _, w, h = self.bbox
        return max(w, h) / min(w, h)


@dataclass(frozen=True)
class Detection:
    frame: int
    bbox: Box
    score: float = 1.0
    source: Source = Source.AMFD
    track_id: int = -1

    def __post_init__(self):
        if self.bbox[2] < 1 or self.bbox[3] < 1:
            raise ValueError(f"detection box must be at least 1x1, got {self.bbox}")
        if not np.isfinite(self.score):
            raise ValueError("detection score must be finite")

    @property
    def center(self) -> tuple[float, float]:
        x, y, w, h = self.bbox
        return (x + w / 2.0, y + h / 2.0)


def connected_components(mask: np.ndarray, connectivity: int = 8) -> list[Blob]:
    """Maximal connected foreground sets, ordered by bbox top-left (row, then column)."""
    if connectivity not in _STRUCTURES:
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    labels, n = ndimage.label(np.asarray(mask, dtype=bool), structure=_STRUCTURES[connectivity])
    if n == 0:
        return []
    ys, xs = np.nonzero(labels)
    lab = labels[ys, xs]
    order = np.argsort(lab, kind="stable")
    ys, xs, lab = ys[order], xs[order], lab[order]
    splits = np.flatnonzero(np.diff(lab)) + 1
    blobs = [Blob(bx, by) for bx, by in zip(np.split(xs, splits), np.split(ys, splits))]
    blobs.sort(key=lambda b: (b.bbox[1], b.bbox[0], b.bbox[3], b.bbox[2]))
    return blobs


def gate_blobs(
    blobs: list[Blob],
    area_min: float = 5,
    area_max: float = 80,
    ar_min: float = 1.0,
    ar_max: float = 6.0,
) -> list[Blob]:
    """Keep blobs whose area and aspect ratio fall inside the closed bounds."""
    if area_min > area_max or ar_min > ar_max:
        raise ValueError("gate bounds are inverted")
    return [
        b for b in blobs
        if area_min <= b.area <= area_max and ar_min <= b.aspect_ratio <= ar_max
    ]


def blobs_to_detections(
    blobs: list[Blob], frame_index: int, response: np.ndarray, source: Source = Source.AMFD
) -> list[Detection]:
    """Score each blob by its mean response relative to the grid maximum."""
    peak = float(np.max(response)) if np.size(response) else 0.0
    dets = []
    for b in blobs:
        score = float(np.mean(response[b.ys, b.xs])) / peak if peak > 0 else 0.0
        dets.append(Detection(frame_index, tuple(float(v) for v in b.bbox), min(1.0, score), source))
    return dets
