"""Axis-aligned box helpers; boxes are ``(x, y, w, h)`` with top-left origin."""

from __future__ import annotations

import numpy as np


def as_array(boxes) -> np.ndarray:
    return np.asarray(boxes, dtype=np.float64).reshape(-1, 4)


def centers(boxes) -> np.ndarray:
    b = as_array(boxes)
    return b[:, :2] + b[:, 2:] / 2.0


def intersection_areas(a, b) -> np.ndarray:
    a, b = as_array(a), as_array(b)
    x0 = np.maximum(a[:, None, 0], b[None, :, 0])
    y0 = np.maximum(a[:, None, 1], b[None, :, 1])
    x1 = np.minimum(a[:, None, 0] + a[:, None, 2], b[None, :, 0] + b[None, :, 2])
    y1 = np.minimum(a[:, None, 1] + a[:, None, 3], b[None, :, 1] + b[None, :, 3])
    return np.clip(x1 - x0, 0, None) * np.clip(y1 - y0, 0, None)


def iou_matrix(a, b) -> np.ndarray:
    a, b = as_array(a), as_array(b)
    inter = intersection_areas(a, b)
    union = (a[:, 2] * a[:, 3])[:, None] + (b[:, 2] * b[:, 3])[None, :] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(union > 0, inter / union, 0.0)


def iomin_matrix(a, b) -> np.ndarray:
    """Intersection over the smaller of the two box areas."""
    a, b = as_array(a), as_array(b)
    inter = intersection_areas(a, b)
    smaller = np.minimum((a[:, 2] * a[:, 3])[:, None], (b[:, 2] * b[:, 3])[None, :])
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(smaller > 0, inter / smaller, 0.0)


def iou(a, b) -> float:
    return float(iou_matrix([a], [b])[0, 0])


def union_box(boxes) -> tuple[float, float, float, float]:
    b = as_array(boxes)
    x0, y0 = b[:, 0].min(), b[:, 1].min()
    x1, y1 = (b[:, 0] + b[:, 2]).max(), (b[:, 1] + b[:, 3]).max()
    return (float(x0), float(y0), float(x1 - x0), float(y1 - y0))
