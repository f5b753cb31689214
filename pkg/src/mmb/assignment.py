"""Gated one-to-one assignment shared by the tracker and the evaluators."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment


def gated_assignment(cost: np.ndarray, admissible: np.ndarray) -> list[tuple[int, int]]:
    """Largest one-to-one matching over admissible pairs, cheapest among those.

    Inadmissible pairs get a penalty larger than any admissible total, so the
    solver first maximises the number of admissible pairs and then minimises
    their summed cost.  Returned pairs are sorted by row.
    """
    cost = np.asarray(cost, dtype=np.float64)
    admissible = np.asarray(admissible, dtype=bool)
    if cost.size == 0 or not admissible.any():
        return []
    finite = cost[admissible]
    penalty = (float(finite.max()) + 1.0) * (min(cost.shape) + 1)
    c = np.where(admissible, cost, penalty)
    rows, cols = linear_sum_assignment(c)
    return [(int(r), int(k)) for r, k in zip(rows, cols) if admissible[r, k]]


def center_distances(a_centers: np.ndarray, b_centers: np.ndarray) -> np.ndarray:
    a = np.asarray(a_centers, dtype=np.float64).reshape(-1, 2)
    b = np.asarray(b_centers, dtype=np.float64).reshape(-1, 2)
    return np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])
