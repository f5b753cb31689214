import numpy as np
import pytest

from mmb.frameio import Sequence

_ACCEPTANCE: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, passed: bool, detail: str) -> None:
    line = f"{name}: {'PASS' if passed else 'FAIL'} ({detail})"
    _ACCEPTANCE.append((name, passed, detail))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{name}: {'PASS' if passed else 'FAIL'} ({detail})")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_sequence(frames, fps=10.0) -> Sequence:
    return Sequence.from_arrays([np.asarray(f, dtype=np.float64) for f in frames], fps)


def moving_square_sequence(n=8, size=32, side=3, start=(4, 10), step=(2, 0), level=100.0, contrast=60.0):
    """Flat background with one bright square moving at constant velocity."""
    frames, boxes = [], []
    for t in range(n):
        img = np.full((size, size), level)
        x, y = start[0] + step[0] * t, start[1] + step[1] * t
        img[y:y + side, x:x + side] += contrast
        frames.append(img)
        boxes.append((x, y, side, side))
    return make_sequence(frames), boxes
