"""Binary morphology on finite grids.

Dilation treats pixels outside the grid as background and erosion treats them
as foreground.  With that pairing the two operators form an adjunction on the
grid itself, so opening and closing are idempotent right up to the border.
"""

import numpy as np
from scipy import ndimage


def _structure(size: int) -> np.ndarray:
    if size < 1 or size % 2 == 0:
        raise ValueError(f"structuring element side must be odd and >= 1, got {size}")
    return np.ones((size, size), dtype=bool)


def dilate(mask: np.ndarray, size: int = 3) -> np.ndarray:
    return ndimage.binary_dilation(mask, structure=_structure(size), border_value=0)


def erode(mask: np.ndarray, size: int = 3) -> np.ndarray:
    return ndimage.binary_erosion(mask, structure=_structure(size), border_value=1)


def close_open(mask: np.ndarray, size: int = 3) -> np.ndarray:
    """Closing (fill pinholes, bridge 1-px gaps) followed by opening (drop specks)."""
    mask = np.asarray(mask, dtype=bool)
    if size == 1:
        return mask.copy()
    closed = erode(dilate(mask, size), size)
    return dilate(erode(closed, size), size)
