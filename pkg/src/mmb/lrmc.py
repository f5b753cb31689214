"""Low-rank background recovery over temporal sub-groups of frames.

Each sub-group of ``L * f`` frames is stacked column-wise into an observation
matrix ``V``; the background ``B`` is its best rank-``r`` approximation and the
foreground ``F = V - B`` is thresholded frame by frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .amfd import adaptive_threshold
from .frameio import Sequence
from .morphology import close_open

ROUNDOFF_TOL = 1e-9


@dataclass(frozen=True)
class LrmcParams:
    L: float = 4.0
    rank_r: int = 1
    k: float = 4.0
    morph_kernel: int = 3

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if self.rank_r < 1:
            raise ValueError(f"rank_r must be >= 1, got {self.rank_r}")
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.morph_kernel < 1 or self.morph_kernel % 2 == 0:
            raise ValueError(f"morph_kernel must be odd and >= 1, got {self.morph_kernel}")


@dataclass(frozen=True, eq=False)
class ObservationMatrix:
    columns: np.ndarray  # (height * width, n_frames)
    frame_indices: tuple[int, ...]
    frame_shape: tuple[int, int]

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=np.float64)
        if cols.ndim != 2 or cols.shape[1] < 1:
            raise ValueError("observation matrix needs at least one column")
        if cols.shape[0] != self.frame_shape[0] * self.frame_shape[1]:
            raise ValueError("column length does not match frame shape")
        idx = tuple(self.frame_indices)
        if len(idx) != cols.shape[1] or any(b != a + 1 for a, b in zip(idx, idx[1:])):
            raise ValueError("frame_indices must be contiguous and match the column count")
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "frame_indices", idx)

    @classmethod
    def from_sequence(cls, seq: Sequence, frames: range) -> "ObservationMatrix":
        cols = np.stack([seq[i].pixels.ravel() for i in frames], axis=1)
        return cls(cols, tuple(frames), seq.shape)


def subgroup_count(M: int, L: float, f: float) -> int:
    if M < 1 or not L > 0 or not f > 0:
        raise ValueError(f"need M >= 1, L > 0, f > 0 (got M={M}, L={L}, f={f})")
    return math.ceil(M / (L * f))


def subgroups(M: int, L: float, f: float) -> list[range]:
    """Contiguous partition of ``range(M)`` into ``subgroup_count`` pieces.

    Every piece spans ``L * f`` frames except possibly a shorter tail.
    """
    n = subgroup_count(M, L, f)
    span = L * f
    if span < 1:
        raise ValueError(f"L * f = {span} is shorter than one frame")
    bounds = [min(M, math.floor(i * span)) for i in range(n)] + [M]
    return [range(a, b) for a, b in zip(bounds, bounds[1:])]


def recover_background(V: ObservationMatrix, rank_r: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Truncated-SVD split ``V = B + F`` with ``rank(B) <= rank_r``."""
    cols = V.columns
    if rank_r > cols.shape[1]:
        raise ValueError(f"rank {rank_r} exceeds the {cols.shape[1]} available columns")
    u, s, vt = np.linalg.svd(cols, full_matrices=False)
    B = (u[:, :rank_r] * s[:rank_r]) @ vt[:rank_r]
    return B, cols - B


def lrmc_maps(seq: Sequence, params: LrmcParams = LrmcParams()) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-frame ``(mask, |foreground|)`` pairs."""
    if len(seq) < 2:
        raise ValueError(f"LRMC needs at least 2 frames, got {len(seq)}")
    out = []
    for group in subgroups(len(seq), params.L, seq.frame_rate_hz):
        V = ObservationMatrix.from_sequence(seq, group)
        # a short tail group may have fewer columns than the requested rank
        _, F = recover_background(V, min(params.rank_r, len(group)))
        fg_all = np.abs(F)
        # SVD round-off on a perfectly static group must not read as motion
        fg_all[fg_all <= ROUNDOFF_TOL * max(1.0, np.abs(V.columns).max())] = 0.0
        for j in range(len(group)):
            fg = fg_all[:, j].reshape(seq.shape)
            mask, _ = adaptive_threshold(fg, params.k)
            out.append((close_open(mask, params.morph_kernel), fg))
    return out


def lrmc_pass(seq: Sequence, params: LrmcParams = LrmcParams()) -> list[np.ndarray]:
    return [mask for mask, _ in lrmc_maps(seq, params)]
