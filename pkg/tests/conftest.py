import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from radialeig import integrate, linear  # noqa: E402


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger numba compilation once so timing checks measure solver work only."""
    integrate(linear(), 0.0, 1.0, 0.0, 1.0, 0.0, 1.0)
    integrate(linear(dim=2), 0.0, 1.0, 0.1, 1.0, 0.0, 1.0)


# one pass/fail line per acceptance criterion, collected by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
