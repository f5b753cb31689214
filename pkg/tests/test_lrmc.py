import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmb.lrmc import (
    LrmcParams,
    ObservationMatrix,
    lrmc_maps,
    lrmc_pass,
    recover_background,
    subgroup_count,
    subgroups,
)
from conftest import make_sequence, moving_square_sequence


def eig_background(V, r):
    """Rank-r projection built from the eigenvectors of V^T V."""
    w, Q = np.linalg.eigh(V.T @ V)
    top = Q[:, np.argsort(w)[::-1][:r]]
    return V @ top @ top.T


def test_background_matches_eigendecomposition_oracle(rng):
    for _ in range(10):
        V = rng.uniform(0, 255, (60, 6))
        obs = ObservationMatrix(V, tuple(range(6)), (6, 10))
        for r in (1, 2, 3):
            B, F = recover_background(obs, r)
            np.testing.assert_allclose(B, eig_background(V, r), atol=1e-7)
            np.testing.assert_allclose(B + F, V, atol=1e-9)


def test_rank_one_background_is_exact_for_scaled_frames(rng):
    base = rng.uniform(50, 200, 40)
    V = np.stack([base * g for g in (0.9, 1.0, 1.1, 1.05)], axis=1)
    B, F = recover_background(ObservationMatrix(V, (0, 1, 2, 3), (5, 8)), 1)
    assert np.abs(F).max() < 1e-9


def test_rank_larger_than_columns_rejected():
    obs = ObservationMatrix(np.ones((4, 2)), (0, 1), (2, 2))
    with pytest.raises(ValueError):
        recover_background(obs, 3)


def test_observation_matrix_validation():
    with pytest.raises(ValueError):
        ObservationMatrix(np.ones((4, 2)), (0, 2), (2, 2))
    with pytest.raises(ValueError):
        ObservationMatrix(np.ones((5, 2)), (0, 1), (2, 2))


def test_subgroup_count_examples():
    assert subgroup_count(100, 4, 10) == 3
    assert subgroup_count(40, 4, 10) == 1
    assert subgroup_count(41, 4, 10) == 2


@given(st.integers(1, 400), st.sampled_from([0.5, 1, 2, 4, 8, 16]), st.sampled_from([2.0, 5.0, 10.0, 25.0]))
def test_subgroups_partition_the_sequence(M, L, f):
    groups = subgroups(M, L, f)
    assert len(groups) == math.ceil(M / (L * f))
    assert [i for g in groups for i in g] == list(range(M))
    assert all(len(g) >= 1 for g in groups)
    assert all(len(g) <= math.ceil(L * f) for g in groups)


def test_subgroup_shorter_than_a_frame_rejected():
    with pytest.raises(ValueError):
        subgroups(10, 0.05, 10)


def test_static_sequence_gives_empty_masks():
    seq = make_sequence([np.full((12, 12), 80.0)] * 6)
    assert all(not m.any() for m in lrmc_pass(seq))


def test_mover_found_in_every_frame():
    seq, boxes = moving_square_sequence(n=10, step=(2, 1))
    maps = lrmc_maps(seq, LrmcParams(L=1.0))  # 10 frames at 10 Hz: one group
    for (mask, fg), (x, y, w, h) in zip(maps, boxes):
        assert mask[y:y + h, x:x + w].all()
        assert mask.sum() == w * h


def test_short_tail_group_is_handled():
    seq, _ = moving_square_sequence(n=11)
    maps = lrmc_maps(seq, LrmcParams(L=0.5, rank_r=2))  # groups of 5, 5, 1
    assert len(maps) == 11


def test_params_validation():
    for kw in ({"L": 0}, {"rank_r": 0}, {"k": -1}, {"morph_kernel": 2}):
        with pytest.raises(ValueError):
            LrmcParams(**kw)
