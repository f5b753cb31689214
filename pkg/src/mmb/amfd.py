"""Accumulative multi-frame differencing.

Every frame ``t`` with both neighbours gets a response image
``(|I_t - I_{t-1}| + |I_{t+1} - I_{t-1}| + |I_{t+1} - I_t|) / 3`` that is
binarised at ``mean + k * std`` and cleaned with a close/open pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frameio import Frame, Sequence
from .morphology import close_open


@dataclass(frozen=True)
class AmfdParams:
    k: float = 4.0
    morph_kernel: int = 3

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.morph_kernel < 1 or self.morph_kernel % 2 == 0:
            raise ValueError(f"morph_kernel must be odd and >= 1, got {self.morph_kernel}")


@dataclass(frozen=True, eq=False)
class DiffTriple:
    d_t1: np.ndarray
    d_t2: np.ndarray
    d_t3: np.ndarray


def frame_differences(prev: Frame, cur: Frame, next: Frame) -> DiffTriple:
    if not (prev.pixels.shape == cur.pixels.shape == next.pixels.shape):
        raise ValueError("frame geometry mismatch")
    if not (cur.index == prev.index + 1 and next.index == cur.index + 1):
        raise ValueError(f"frames must be consecutive, got {prev.index}, {cur.index}, {next.index}")
    return DiffTriple(
        np.abs(cur.pixels - prev.pixels),
        np.abs(next.pixels - prev.pixels),
        np.abs(next.pixels - cur.pixels),
    )


def accumulate(diff: DiffTriple) -> np.ndarray:
    return (diff.d_t1 + diff.d_t2 + diff.d_t3) / 3.0


def adaptive_threshold(response: np.ndarray, k: float = 4.0) -> tuple[np.ndarray, float]:
    """Keep pixels with ``response >= mean + k * std`` (population std).

    A constant grid has no spread: it is all foreground when nonzero and all
    background when zero.
    """
    response = np.asarray(response, dtype=np.float64)
    if response.size == 0:
        raise ValueError("empty response grid")
    lo, hi = response.min(), response.max()
    if lo == hi:
        return np.full(response.shape, hi > 0, dtype=bool), float(hi)
    t = float(response.mean() + k * response.std())
    return response >= t, t


def amfd_maps(seq: Sequence, params: AmfdParams = AmfdParams()) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-frame ``(mask, response)``; the first and last frames get empty maps."""
    if len(seq) < 3:
        raise ValueError(f"AMFD needs at least 3 frames, got {len(seq)}")
    empty = (np.zeros(seq.shape, dtype=bool), np.zeros(seq.shape))
    out = [empty]
    for t in range(1, len(seq) - 1):
        response = accumulate(frame_differences(seq[t - 1], seq[t], seq[t + 1]))
        mask, _ = adaptive_threshold(response, params.k)
        out.append((close_open(mask, params.morph_kernel), response))
    out.append(empty)
    return out


def amfd_pass(seq: Sequence, params: AmfdParams = AmfdParams()) -> list[np.ndarray]:
    return [mask for mask, _ in amfd_maps(seq, params)]
