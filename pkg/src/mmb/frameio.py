"""Frame sequences, ground-truth annotations and their on-disk formats.

Frames live in a directory of 8-bit PNG/PGM images sorted by filename.
Annotations and detections share one CSV layout::

    frame,track_id,x,y,w,h,label[,score]

where ``(x, y)`` is the top-left corner of the box.  Lines starting with
``#`` are treated as a header and skipped.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence as Seq

import numpy as np
from PIL import Image

LUMA_WEIGHTS = (0.299, 0.587, 0.114)
IMAGE_EXTENSIONS = (".png", ".pgm", ".ppm", ".pnm")
CLASS_LABELS = frozenset({"car", "airplane", "ship", "train", "synthetic"})
CSV_HEADER = "# frame,track_id,x,y,w,h,label,score"
META_FILENAME = "sequence.meta"

Box = tuple[float, float, float, float]


class FormatError(ValueError):
    """Raised for unreadable or malformed inputs; message names file and line."""


@dataclass(frozen=True, eq=False)
class Frame:
    index: int
    pixels: np.ndarray

    def __post_init__(self):
        px = np.array(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"frame {self.index}: pixels must be a non-empty 2-D grid")
        if not np.all(np.isfinite(px)) or px.min() < 0 or px.max() > 255:
            raise ValueError(f"frame {self.index}: intensities must be finite and in [0, 255]")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True, eq=False)
class Sequence:
    frames: tuple[Frame, ...]
    frame_rate_hz: float = 10.0

    def __post_init__(self):
        frames = tuple(self.frames)
        object.__setattr__(self, "frames", frames)
        if self.frame_rate_hz <= 0:
            raise ValueError("frame_rate_hz must be positive")
        for i, fr in enumerate(frames):
            if fr.index != i:
                raise ValueError(f"frame indices must be consecutive from 0 (got {fr.index} at {i})")
            if fr.pixels.shape != frames[0].pixels.shape:
                raise ValueError(f"frame {i} has shape {fr.pixels.shape}, expected {frames[0].pixels.shape}")

    def __len__(self) -> int:
        return len(self.frames)

    def __getitem__(self, i: int) -> Frame:
        return self.frames[i]

    @property
    def shape(self) -> tuple[int, int]:
        return self.frames[0].pixels.shape

    @classmethod
    def from_arrays(cls, arrays: Iterable[np.ndarray], frame_rate_hz: float = 10.0) -> "Sequence":
        return cls(tuple(Frame(i, a) for i, a in enumerate(arrays)), frame_rate_hz)


@dataclass(frozen=True)
class GroundTruthRecord:
    frame: int
    track_id: int
    x: float
    y: float
    w: float
    h: float
    class_label: str = "synthetic"

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"box width/height must be >= 1, got ({self.w}, {self.h})")
        if self.track_id < -1:
            raise ValueError(f"track_id must be >= -1, got {self.track_id}")
        if self.class_label not in CLASS_LABELS:
            raise ValueError(f"unknown class label {self.class_label!r}")

    @property
    def bbox(self) -> Box:
        return (self.x, self.y, self.w, self.h)


def to_grayscale(image: np.ndarray) -> np.ndarray:
    """Collapse an RGB(A) image to luma; 2-D input is returned as float."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 2:
        return arr
    if arr.ndim == 3 and arr.shape[2] in (3, 4):
        r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
        return LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b
    if arr.ndim == 3 and arr.shape[2] == 1:
        return arr[..., 0]
    raise ValueError(f"unsupported image shape {arr.shape}")


def center_to_topleft(cx: float, cy: float, w: float, h: float) -> Box:
    return (cx - w / 2.0, cy - h / 2.0, w, h)


def topleft_to_center(x: float, y: float, w: float, h: float) -> Box:
    return (x + w / 2.0, y + h / 2.0, w, h)


def list_image_files(directory: str | os.PathLike) -> list[Path]:
    d = Path(directory)
    if not d.is_dir():
        raise FormatError(f"{d}: no such directory")
    return sorted(p for p in d.iterdir() if p.suffix.lower() in IMAGE_EXTENSIONS)


def read_frame_rate(directory: str | os.PathLike) -> float | None:
    """Frame rate stored next to the frames by :func:`save_sequence`, if any."""
    meta = Path(directory) / META_FILENAME
    if not meta.exists():
        return None
    for line in meta.read_text().splitlines():
        key, _, value = line.partition("=")
        if key.strip() == "frame_rate_hz":
            return float(value)
    return None


def load_sequence(directory: str | os.PathLike, frame_rate_hz: float | None = None) -> Sequence:
    files = list_image_files(directory)
    if not files:
        raise FormatError(f"{directory}: no image files found")
    if frame_rate_hz is None:
        frame_rate_hz = read_frame_rate(directory) or 10.0
    frames = []
    shape = None
    for i, path in enumerate(files):
        try:
            with Image.open(path) as im:
                if im.mode not in ("L", "RGB", "RGBA"):
                    im = im.convert("RGB")
                gray = to_grayscale(np.asarray(im))
        except (OSError, ValueError) as exc:
            raise FormatError(f"{path}: unreadable image ({exc})") from exc
        if shape is None:
            shape = gray.shape
        elif gray.shape != shape:
            raise FormatError(f"{path}: dimensions {gray.shape[::-1]} differ from {shape[::-1]}")
        frames.append(Frame(i, gray))
    return Sequence(tuple(frames), frame_rate_hz)


def save_sequence(seq: Sequence, directory: str | os.PathLike, prefix: str = "frame") -> list[Path]:
    """Write frames as 8-bit grayscale PNGs; intensities must be integral."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    digits = max(6, len(str(len(seq))))
    paths = []
    for fr in seq.frames:
        px = fr.pixels
        if not np.array_equal(px, np.round(px)):
            raise ValueError(f"frame {fr.index}: non-integral intensities cannot be saved losslessly")
        path = d / f"{prefix}_{fr.index:0{digits}d}.png"
        Image.fromarray(px.astype(np.uint8)).save(path)
        paths.append(path)
    (d / META_FILENAME).write_text(f"frame_rate_hz={seq.frame_rate_hz!r}\n")
    return paths


def _format_number(v: float) -> str:
    v = float(v)
    if v.is_integer():
        return str(int(v))
    return repr(v)


def _parse_rows(path: Path):
    with open(path, newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, [c.strip() for c in line.split(",")]


def _parse_box(path, lineno, cells, box_format):
    try:
        frame = int(cells[0])
        track_id = int(cells[1])
        x, y, w, h = (float(c) for c in cells[2:6])
    except ValueError as exc:
        raise FormatError(f"{path}:{lineno}: non-numeric field ({exc})") from exc
    if not all(math.isfinite(v) for v in (x, y, w, h)):
        raise FormatError(f"{path}:{lineno}: non-finite box")
    if box_format == "center":
        x, y, w, h = center_to_topleft(x, y, w, h)
    elif box_format != "topleft":
        raise ValueError(f"unknown box format {box_format!r}")
    return frame, track_id, x, y, w, h


def load_annotations(csv_path: str | os.PathLike, box_format: str = "topleft") -> list[GroundTruthRecord]:
    """Parse a ground-truth CSV.

    ``box_format="center"`` reads ``x, y`` as the box center and converts to
    top-left. Records come back sorted by ``(frame, track_id)``.
    """
    path = Path(csv_path)
    records = []
    seen = set()
    for lineno, cells in _parse_rows(path):
        if len(cells) not in (7, 8):
            raise FormatError(f"{path}:{lineno}: expected 7 or 8 fields, got {len(cells)}")
        frame, track_id, x, y, w, h = _parse_box(path, lineno, cells, box_format)
        if track_id >= 0:
            key = (frame, track_id)
            if key in seen:
                raise FormatError(f"{path}:{lineno}: duplicate (frame, track_id) {key}")
            seen.add(key)
        try:
            records.append(GroundTruthRecord(frame, track_id, x, y, w, h, cells[6]))
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
    records.sort(key=lambda r: (r.frame, r.track_id))
    return records


def save_annotations(records: Seq[GroundTruthRecord], csv_path: str | os.PathLike) -> None:
    lines = [CSV_HEADER]
    for r in sorted(records, key=lambda r: (r.frame, r.track_id)):
        nums = (r.frame, r.track_id, r.x, r.y, r.w, r.h)
        lines.append(",".join(_format_number(v) for v in nums) + f",{r.class_label}")
    Path(csv_path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class DetectionRecord:
    """One CSV row of a detector/tracker output (any label, optional score)."""

    frame: int
    track_id: int
    x: float
    y: float
    w: float
    h: float
    label: str = "object"
    score: float = 1.0

    @property
    def bbox(self) -> Box:
        return (self.x, self.y, self.w, self.h)


def load_detections(csv_path: str | os.PathLike, box_format: str = "topleft") -> list[DetectionRecord]:
    """Read predictions; ground-truth files load too (score defaults to 1)."""
    path = Path(csv_path)
    out = []
    for lineno, cells in _parse_rows(path):
        if len(cells) not in (7, 8):
            raise FormatError(f"{path}:{lineno}: expected 7 or 8 fields, got {len(cells)}")
        frame, track_id, x, y, w, h = _parse_box(path, lineno, cells, box_format)
        score = 1.0
        if len(cells) == 8:
            try:
                score = float(cells[7])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-numeric score") from exc
        out.append(DetectionRecord(frame, track_id, x, y, w, h, cells[6], score))
    return out


def save_detections(records: Iterable, csv_path: str | os.PathLike) -> None:
    """Write anything with frame/track_id/bbox/label-or-source/score attributes."""
    lines = [CSV_HEADER]
    for r in records:
        x, y, w, h = r.bbox
        label = getattr(r, "label", None) or getattr(r, "source", "object")
        label = getattr(label, "value", label)
        nums = (r.frame, r.track_id, x, y, w, h)
        lines.append(",".join(_format_number(v) for v in nums) + f",{label},{_format_number(r.score)}")
    Path(csv_path).write_text("\n".join(lines) + "\n")


def records_by_frame(records: Iterable, num_frames: int | None = None) -> list[list]:
    records = list(records)
    if num_frames is None:
        num_frames = max((r.frame for r in records), default=-1) + 1
    out: list[list] = [[] for _ in range(num_frames)]
    for r in records:
        if 0 <= r.frame < num_frames:
            out[r.frame].append(r)
    return out
