import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmb.blobs import Blob, Detection, Source, blobs_to_detections, connected_components, gate_blobs
from oracles import flood_fill_components


def _blob_from_pixels(pixels):
    xs, ys = zip(*sorted(pixels))
    return Blob(np.array(xs), np.array(ys))


def test_components_match_flood_fill(rng):
    for _ in range(30):
        mask = rng.random((16, 16)) < 0.4
        for conn in (4, 8):
            got = {b.pixels for b in connected_components(mask, conn)}
            assert got == set(flood_fill_components(mask, conn))


def test_diagonal_pixels_split_under_4_connectivity():
    mask = np.eye(3, dtype=bool)
    assert len(connected_components(mask, 4)) == 3
    assert len(connected_components(mask, 8)) == 1
    with pytest.raises(ValueError):
        connected_components(mask, 6)


def test_blob_geometry():
    b = _blob_from_pixels({(2, 3), (3, 3), (4, 3), (4, 4)})
    assert b.area == 4
    assert b.bbox == (2, 3, 3, 2)
    assert b.aspect_ratio == pytest.approx(1.5)


@given(st.integers(1, 12), st.integers(1, 12))
def test_gate_bounds_are_inclusive(w, h):
    b = _blob_from_pixels({(x, y) for x in range(w) for y in range(h)})
    kept = gate_blobs([b], 5, 80, 1.0, 6.0)
    ar = max(w, h) / min(w, h)
    assert bool(kept) == (5 <= w * h <= 80 and ar <= 6.0)


def test_gate_edge_cases():
    sq5 = _blob_from_pixels({(x, 0) for x in range(5)})  # 5x1, area 5, AR 5
    sq4 = _blob_from_pixels({(x, 0) for x in range(4)})
    assert gate_blobs([sq5, sq4], 5, 80, 1.0, 6.0) == [sq5]
    line7 = _blob_from_pixels({(x, 0) for x in range(7)})  # AR 7
    assert gate_blobs([line7], 5, 80, 1.0, 6.0) == []
    with pytest.raises(ValueError):
        gate_blobs([], 10, 5, 1, 6)


def test_detection_scores_are_relative_to_peak():
    resp = np.zeros((6, 6))
    resp[1:3, 1:3] = 4.0
    resp[5, 5] = 8.0
    b = _blob_from_pixels({(1, 1), (2, 1), (1, 2), (2, 2)})
    (d,) = blobs_to_detections([b], 3, resp, Source.LRMC)
    assert d.frame == 3 and d.score == pytest.approx(0.5) and d.source is Source.LRMC
    assert d.bbox == (1.0, 1.0, 2.0, 2.0)
    (z,) = blobs_to_detections([b], 0, np.zeros((6, 6)))
    assert z.score == 0.0


def test_detection_validation_and_center():
    with pytest.raises(ValueError):
        Detection(0, (0, 0, 0.5, 2))
    with pytest.raises(ValueError):
        Detection(0, (0, 0, 2, 2), score=float("nan"))
    assert Detection(0, (2, 4, 3, 3)).center == (3.5, 5.5)
