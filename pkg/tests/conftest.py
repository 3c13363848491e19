import numpy as np
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    """Collect one pass/fail line per acceptance criterion for the summary."""
    def record(number, title, ok, detail):
        ACCEPTANCE_LINES.append((number, title, bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {detail}")


def random_simplex(rng, k, floor=0.0):
    p = rng.dirichlet(np.ones(k))
    if floor:
        p = (p + floor) / (1 + k * floor)
    return p / p.sum()
