import re
import time
from pathlib import Path

import pytest

from sphfoli.cli import gallery_entries, load_gallery
from sphfoli.oracle import enumerate_surfaces
from sphfoli.surface import parse_surface

DATA = Path(__file__).parent / "data"

_acceptance: dict[int, list[str]] = {}


@pytest.fixture(scope="session")
def gallery():
    return {e.name: parse_surface(e.surface_text) for e in gallery_entries()}


@pytest.fixture
def surface():
    return load_gallery


@pytest.fixture(scope="session")
def small_oracle():
    return enumerate_surfaces(2, 1)


@pytest.fixture(scope="session")
def full_oracle():
    """Every surface with at most 4 bigons and 2 marks per side, with the time it took."""
    t0 = time.perf_counter()
    surfaces = enumerate_surfaces(4, 2)
    return surfaces, time.perf_counter() - t0


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_", report.nodeid)
    if m:
        _acceptance.setdefault(int(m.group(1)), []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_acceptance):
        outcomes = _acceptance[k]
        verdict = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {k}: {verdict}")
