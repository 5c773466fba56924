import numpy as np
import pytest

from privlqg import paper_example_model, solve_steady_state
from privlqg.intermittent import analyze_period


@pytest.fixture(scope="session")
def model():
    return paper_example_model()


@pytest.fixture(scope="session")
def steady(model):
    return solve_steady_state(model)


@pytest.fixture(scope="session")
def analyses(model, steady):
    return {T: analyze_period(model, T, steady=steady) for T in range(1, 11)}


def random_psd(rng, n, scale=1.0):
    G = rng.standard_normal((n, n + 1)) * scale
    return G @ G.T


def min_eig(X):
    return float(np.linalg.eigvalsh((X + X.T) / 2).min())


_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: call with (number, description, passed, detail)."""

    def record(number, description, passed, detail=""):
        _ACCEPTANCE.append((number, description, bool(passed), detail))
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {description}"
        print(line + (f" ({detail})" if detail else ""))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, description, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        line = f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {description}"
        terminalreporter.write_line(line + (f" -- {detail}" if detail else ""))
