import numpy as np
import pytest

from mmb.assignment import center_distances, gated_assignment
from oracles import best_partial_matching


def test_matches_exhaustive_optimum(rng):
    for _ in range(150):
        n, m = rng.integers(0, 6, size=2)
        cost = rng.uniform(0, 10, (n, m)).round(1)
        adm = rng.random((n, m)) < 0.6
        pairs = gated_assignment(cost, adm)
        assert all(adm[i, j] for i, j in pairs)
        assert len({i for i, _ in pairs}) == len({j for _, j in pairs}) == len(pairs)
        card, total = best_partial_matching(cost, adm)
        assert len(pairs) == card
        assert sum(cost[i, j] for i, j in pairs) == pytest.approx(total, abs=1e-9)


def test_prefers_more_pairs_over_cheaper_ones():
    cost = np.array([[0.0, 1.0], [9.0, 100.0]])
    adm = np.array([[True, True], [True, False]])
    assert gated_assignment(cost, adm) == [(0, 1), (1, 0)]


def test_empty_inputs():
    assert gated_assignment(np.zeros((0, 3)), np.zeros((0, 3), bool)) == []
    assert gated_assignment(np.ones((2, 2)), np.zeros((2, 2), bool)) == []


def test_center_distances():
    d = center_distances([[0, 0], [3, 4]], [[0, 0]])
    np.testing.assert_allclose(d, [[0.0], [5.0]])
