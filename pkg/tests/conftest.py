import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sitefusion.field import DetectionField  # noqa: E402


def make_field(xy, scores=None, stride=1.0, cls="c", ids=None):
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    n = len(xy)
    scores = np.ones(n) if scores is None else np.asarray(scores, dtype=float)
    ids = np.arange(n) if ids is None else ids
    return DetectionField(cls, stride, ids=ids, x=xy[:, 0], y=xy[:, 1], scores=scores)


def grid_field(side, stride=1.0, score=1.0, cls="c", origin=(0.0, 0.0)):
    i, j = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    xy = np.column_stack((i.ravel(), j.ravel())) * stride + np.asarray(origin)
    return make_field(xy, np.full(len(xy), score), stride, cls)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def saturated_grid(rp, stride=1.0):
    """Square score-1 grid of side 4R'+1 with ids increasing away from the center.

    Every point at least R from the edge has the same intersected volume, so the
    id tie-break decides the first seed; numbering from the center puts it
    where its whole membership disc has full neighborhoods.
    """
    side = 4 * rp + 1
    f = grid_field(side, stride)
    c = (side - 1) / 2 * stride
    d = np.hypot(f.x - c, f.y - c)
    ids = np.argsort(np.argsort(d, kind="stable"), kind="stable")
    return make_field(np.column_stack((f.x, f.y)), stride=stride, ids=ids)


_ACCEPTANCE: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    number, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    prev = _ACCEPTANCE.get(number)
    ok = rep.passed and (prev is None or prev[1])
    _ACCEPTANCE[number] = (title, ok, detail or (prev[2] if prev else ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[number]
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
