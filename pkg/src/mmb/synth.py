"""Synthetic overhead scenes with exact ground truth.

The background is a smooth random field modulated by a global sinusoidal
gain.  Targets are bright rectangles moving at constant velocity with a
little positional jitter; a target that leaves the frame is replaced by a
fresh one entering from a random edge under a new id.  Optional single-frame
clutter blobs and static occluders add the usual nuisances.  Frames are
quantised to 8-bit so they round-trip through PNG exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .frameio import GroundTruthRecord, Sequence


@dataclass(frozen=True)
class Occluder:
    x: int
    y: int
    w: int
    h: int
    intensity: float | None = None  # None keeps the background beneath


@dataclass(frozen=True)
class SynthConfig:
    width: int = 256
    height: int = 256
    num_frames: int = 100
    frame_rate_hz: float = 10.0
    num_targets: int = 5
    target_size_range: tuple[int, int] = (3, 3)
    target_contrast: float = 40.0
    speed_range: tuple[float, float] = (2.0, 2.0)
    jitter: float = 0.3
    noise_sigma: float = 2.0
    illumination: tuple[float, float] = (0.05, 50.0)  # (relative amplitude, period in frames)
    background_level: float = 100.0
    background_variation: float = 20.0
    background_smoothness: float = 12.0
    clutter_rate: float = 0.0
    occluders: tuple[Occluder, ...] = field(default_factory=tuple)
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.target_size_range
        if self.width < 1 or self.height < 1 or self.num_frames < 1:
            raise ValueError("width, height and num_frames must be positive")
        if self.frame_rate_hz <= 0:
            raise ValueError("frame_rate_hz must be positive")
        if self.num_targets < 0:
            raise ValueError("num_targets must be >= 0")
        if not 2 <= lo <= hi <= 8:
            raise ValueError(f"target_size_range must lie within [2, 8], got {self.target_size_range}")
        if hi > min(self.width, self.height):
            raise ValueError("targets do not fit in the frame")
        s0, s1 = self.speed_range
        if not 0 <= s0 <= s1:
            raise ValueError(f"invalid speed_range {self.speed_range}")
        if self.noise_sigma < 0 or self.jitter < 0 or self.clutter_rate < 0:
            raise ValueError("noise_sigma, jitter and clutter_rate must be >= 0")
        amp, period = self.illumination
        if not 0 <= amp < 1 or period <= 0:
            raise ValueError(f"invalid illumination {self.illumination}")


@dataclass
class _Target:
    track_id: int
    size: tuple[int, int]  # (w, h)
    pos: np.ndarray  # float top-left (x, y)
    vel: np.ndarray


def _background(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    field_ = ndimage.gaussian_filter(rng.standard_normal((cfg.height, cfg.width)), cfg.background_smoothness, mode="wrap")
    span = np.abs(field_).max()
    if span > 0:
        field_ = field_ / span
    return cfg.background_level + cfg.background_variation * field_


def _random_size(cfg, rng):
    lo, hi = cfg.target_size_range
    return (int(rng.integers(lo, hi + 1)), int(rng.integers(lo, hi + 1)))


def _random_velocity(cfg, rng, angle=None):
    speed = rng.uniform(*cfg.speed_range)
    if angle is None:
        angle = rng.uniform(0, 2 * math.pi)
    return np.array([speed * math.cos(angle), speed * math.sin(angle)])


def _spawn_inside(cfg, rng, tid):
    w, h = _random_size(cfg, rng)
    pos = np.array([rng.uniform(0, cfg.width - w), rng.uniform(0, cfg.height - h)])
    return _Target(tid, (w, h), pos, _random_velocity(cfg, rng))


def _spawn_at_edge(cfg, rng, tid):
    w, h = _random_size(cfg, rng)
    edge = int(rng.integers(4))
    spread = rng.uniform(-math.pi / 3, math.pi / 3)
    if edge == 0:    # left, heading right
        pos, angle = np.array([-w + 1.0, rng.uniform(0, cfg.height - h)]), spread
    elif edge == 1:  # right, heading left
        pos, angle = np.array([cfg.width - 1.0, rng.uniform(0, cfg.height - h)]), math.pi + spread
    elif edge == 2:  # top, heading down
        pos, angle = np.array([rng.uniform(0, cfg.width - w), -h + 1.0]), math.pi / 2 + spread
    else:            # bottom, heading up
        pos, angle = np.array([rng.uniform(0, cfg.width - w), cfg.height - 1.0]), -math.pi / 2 + spread
    vel = _random_velocity(cfg, rng, angle)
    if not np.any(vel):
        vel = np.array([math.cos(angle), math.sin(angle)])  # a static target would never enter
    return _Target(tid, (w, h), pos, vel)


def _visible_box(x0, y0, w, h, width, height, occluded):
    """Tight box of the target's unoccluded in-frame pixels, or None."""
    xa, ya = max(x0, 0), max(y0, 0)
    xb, yb = min(x0 + w, width), min(y0 + h, height)
    if xa >= xb or ya >= yb:
        return None
    vis = ~occluded[ya:yb, xa:xb]
    if not vis.any():
        return None
    rows, cols = np.nonzero(vis)
    return (xa + int(cols.min()), ya + int(rows.min()),
            int(cols.max() - cols.min()) + 1, int(rows.max() - rows.min()) + 1), (slice(ya, yb), slice(xa, xb), vis)


def generate(cfg: SynthConfig) -> tuple[Sequence, list[GroundTruthRecord]]:
    rng = np.random.default_rng(cfg.seed)
    bg = _background(cfg, rng)
    occluded = np.zeros((cfg.height, cfg.width), dtype=bool)
    occ_value = np.full_like(bg, np.nan)
    for o in cfg.occluders:
        occluded[max(o.y, 0):o.y + o.h, max(o.x, 0):o.x + o.w] = True
        if o.intensity is not None:
            occ_value[max(o.y, 0):o.y + o.h, max(o.x, 0):o.x + o.w] = o.intensity
    scene = np.where(np.isnan(occ_value), bg, occ_value)

    targets = [_spawn_inside(cfg, rng, i) for i in range(cfg.num_targets)]
    next_id = cfg.num_targets
    amp, period = cfg.illumination
    records: list[GroundTruthRecord] = []
    frames = []
    for t in range(cfg.num_frames):
        gain = 1.0 + amp * math.sin(2 * math.pi * t / period)
        boost = np.zeros_like(bg)
        for tgt in targets:
            jit = rng.uniform(-cfg.jitter, cfg.jitter, size=2) if cfg.jitter > 0 else np.zeros(2)
            x0, y0 = (int(v) for v in np.round(tgt.pos + jit))
            w, h = tgt.size
            vis = _visible_box(x0, y0, w, h, cfg.width, cfg.height, occluded)
            if vis is None:
                continue
            box, (sy, sx, visible) = vis
            region = boost[sy, sx]
            region[visible] = cfg.target_contrast
            records.append(GroundTruthRecord(t, tgt.track_id, *box, class_label="synthetic"))

        n_clutter = rng.poisson(cfg.clutter_rate) if cfg.clutter_rate > 0 else 0
        for _ in range(n_clutter):
            w, h = _random_size(cfg, rng)
            cx, cy = int(rng.integers(0, cfg.width - w + 1)), int(rng.integers(0, cfg.height - h + 1))
            patch = boost[cy:cy + h, cx:cx + w]
            patch[~occluded[cy:cy + h, cx:cx + w]] = cfg.target_contrast

        img = gain * (scene + boost)
        if cfg.noise_sigma > 0:
            img = img + rng.normal(0.0, cfg.noise_sigma, size=img.shape)
        frames.append(np.clip(np.round(img), 0, 255))

        survivors = []
        for tgt in targets:
            tgt.pos = tgt.pos + tgt.vel
            x, y = tgt.pos
            w, h = tgt.size
            if x + w <= -cfg.jitter - 1 or y + h <= -cfg.jitter - 1 or x >= cfg.width + cfg.jitter or y >= cfg.height + cfg.jitter:
                survivors.append(_spawn_at_edge(cfg, rng, next_id))
                next_id += 1
            else:
                survivors.append(tgt)
        targets = survivors

    records.sort(key=lambda r: (r.frame, r.track_id))
    return Sequence.from_arrays(frames, cfg.frame_rate_hz), records
