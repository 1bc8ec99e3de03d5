import os

import pytest
from hypothesis import settings

from artifact import ss_engine as sse

settings.register_profile("default", deadline=None, derandomize=True, max_examples=60)
settings.register_profile("thorough", deadline=None, max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def pages3():
    return sse.run_pages(3, 24)


@pytest.fixture(scope="session")
def final3(pages3):
    return pages3[-1]


@pytest.fixture(scope="session")
def engine3(pages3):
    return pages3[0].engine


@pytest.fixture(scope="session")
def su4_report(final3):
    from artifact.su4 import verify_su4

    return verify_su4(final3)


def pytest_configure(config):
    config.acceptance_lines = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    def record(number, passed, elapsed, limit, note=""):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} ({elapsed:.2f}s, limit {limit}s)"
        request.config.acceptance_lines.append(line + (f" {note}" if note else ""))
        return passed and elapsed < limit
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
