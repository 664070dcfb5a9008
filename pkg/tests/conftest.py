import itertools

import numpy as np
import pytest


class ScriptedRng:
    """Stands in for ``numpy.random.Generator.integers`` with preset offsets.

    Each call ``integers(lo, hi)`` returns ``lo + next(offsets)``; lets tests walk
    every branch of a random decision tree.
    """

    def __init__(self, offsets):
        self._offsets = iter(offsets)

    def integers(self, lo, hi=None):
        if hi is None:
            lo, hi = 0, lo
        off = next(self._offsets)
        assert 0 <= off < hi - lo
        return lo + off


def sattolo_choice_paths(n):
    """All offset scripts for the n-1 steps of a forward cyclic shuffle."""
    return itertools.product(*[range(n - 1 - i) for i in range(n - 1)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# acceptance reporting: one PASS/FAIL line per criterion in the terminal summary
_acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if item.module.__name__.endswith("test_acceptance") and item.function.__doc__:
        report.criterion = item.function.__doc__.strip().splitlines()[0]


def pytest_runtest_logreport(report):
    label = getattr(report, "criterion", None)
    if label is None:
        return
    if report.when == "call" or report.failed:
        detail = "; ".join(str(v) for k, v in report.user_properties if k == "detail")
        if label not in _acceptance or report.failed:
            _acceptance[label] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_acceptance, key=lambda s: int(s.split(".")[0])):
        status, detail = _acceptance[label]
        line = f"{status}  {label}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
