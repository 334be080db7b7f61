import numpy as np
import pytest

from manakov_hbvm import ManakovProblem, build_basis


def _zero(n):
    return lambda x: np.zeros((n, np.size(x)), dtype=complex)


@pytest.fixture
def rng():
    return np.random.default_rng(20190611)


@pytest.fixture
def make_problem():
    """Small random problem factory: n components on [a, b]."""

    def factory(n=2, a=0.0, b=2 * np.pi, beta=None, gamma=None, seed=0, T=1.0, psi0=None):
        r = np.random.default_rng(seed)
        if beta is None:
            beta = 0.5 + r.random(n)
        if gamma is None:
            g = r.standard_normal((n, n))
            gamma = g + g.T
        return ManakovProblem(beta=beta, gamma=gamma, a=a, b=b, T=T, psi0=psi0 or _zero(n))

    return factory


@pytest.fixture
def linear_problem():
    """One component, beta = 1, gamma = 0 on [0, 2 pi]."""
    return ManakovProblem(beta=[1.0], gamma=[[0.0]], a=0.0, b=2 * np.pi, T=1.0, psi0=_zero(1))


@pytest.fixture
def small_basis():
    return build_basis(4, 0.0, 2 * np.pi)


# acceptance report: one line per criterion, printed after the run

_CRITERIA = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        measured = "; ".join(str(v) for k, v in item.user_properties if k == "measured")
        _CRITERIA.append((marker.args[0], marker.args[1], report.passed, measured))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid, text, passed, measured in _CRITERIA:
        line = f"{'PASS' if passed else 'FAIL'}  [{cid}] {text}"
        if measured:
            line += f"  ({measured})"
        terminalreporter.write_line(line)
