import os

import numpy as np
import pytest

from impostorkit.synthetic import write_average_face, write_synthetic_dataset

BUNDLED_SEED = 2013


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    """Bundled desk-scale corpus: 40 subjects x 2 sessions, 80 external impostors, 2 poses."""
    root = tmp_path_factory.mktemp("corpus")
    manifest = write_synthetic_dataset(root, n_subjects=40, n_external=80, seed=BUNDLED_SEED,
                                       poses=[("L30", 0.3), ("R30", -0.3)])
    le, re = write_average_face(os.path.join(root, "probe.png"))
    return {"root": str(root), "manifest": manifest, "probe": os.path.join(root, "probe.png"),
            "left_eye": le, "right_eye": re}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance summary -------------------------------------------------------

_acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (report.when != "call" and report.passed):
        return
    number, title = marker.args
    prev = _acceptance.get(number, (title, True))
    _acceptance[number] = (title, prev[1] and report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        title, ok = _acceptance[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}")
