from __future__ import annotations

import pytest

from sobolev_cascade.genset import construct_paper, construct_search


@pytest.fixture(scope="session")
def set3():
    """Small searched set, N = 3."""
    return construct_search(3, 2, 30, rng_seed=0)


@pytest.fixture(scope="session")
def set4_paper():
    return construct_paper(4, 2, 0)


@pytest.fixture(scope="session")
def set7():
    """N = 7 set from the circle construction with the light relation check."""
    return construct_paper(7, 2, 0, nondeg="light")


# criterion number -> list of (check name, passed, detail)
ACCEPTANCE: dict = {}


def record(criterion: int, check: str, passed: bool, detail: str = "") -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((check, bool(passed), detail))
    return bool(passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[c]
        ok = all(p for _, p, _ in checks)
        tr.write_line(f"{'PASS' if ok else 'FAIL'} criterion {c}: "
                      + "; ".join(f"{name} {'ok' if p else 'FAILED'} ({d})" if d else
                                  f"{name} {'ok' if p else 'FAILED'}" for name, p, d in checks))
