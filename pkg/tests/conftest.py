from __future__ import annotations

import pytest

# filled by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240611)
