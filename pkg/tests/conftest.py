import numpy as np
import pytest

from foels.flow_io import FlowField
from foels.segmentation import PanopticMap, load_class_table

_acceptance = {}


def radial_field(width, height, cx, cy, scale=0.05, sign=1):
    """Exact expansion (sign=+1) or contraction (sign=-1) about (cx, cy)."""
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    return FlowField(sign * scale * (xs - cx), sign * scale * (ys - cy),
                     np.ones((height, width), dtype=bool))


def uniform_seg(shape, class_id=100):
    return PanopticMap(np.full(shape, class_id), np.zeros(shape, dtype=int))


@pytest.fixture
def small_table():
    return load_class_table("""
    # id prior sky name
    7   0.05 sky  sky
    13  0.9  -    car
    100 0.02 -    road
    0   0.9  -    person
    """)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None and (rep.when == "call" or rep.failed):
        label = marker.args[0]
        ok = rep.passed if rep.when == "call" else False
        prev = _acceptance.get(label, (True, marker.args[1]))
        _acceptance[label] = (prev[0] and ok, marker.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_acceptance, key=lambda s: int(s[1:])):
        ok, title = _acceptance[label]
        terminalreporter.write_line(f"{label:>4} {'PASS' if ok else 'FAIL'}  {title}")
