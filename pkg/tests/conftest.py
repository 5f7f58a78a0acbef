"""Shared fixtures and the per-criterion acceptance summary."""
from __future__ import annotations

import pytest
from hypothesis import strategies as st

from bclock.exact import RationalPolynomial

ACCEPTANCE_CRITERIA = range(1, 11)
_criterion_of: dict = {}
_outcomes: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): test belongs to acceptance criterion n")


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            _criterion_of[item.nodeid] = marker.args[0]


def pytest_runtest_logreport(report):
    n = _criterion_of.get(report.nodeid)
    if n is None:
        return
    if report.failed:
        _outcomes[n] = "FAIL"
    elif report.when == "call" and report.passed:
        _outcomes.setdefault(n, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _criterion_of:
        return
    terminalreporter.section("acceptance criteria")
    for n in ACCEPTANCE_CRITERIA:
        terminalreporter.write_line(f"ACCEPTANCE criterion {n}: {_outcomes.get(n, 'NOT RUN')}")


small_fractions = st.fractions(min_value=-5, max_value=5, max_denominator=12)
unit_fractions = st.fractions(min_value=0, max_value=1, max_denominator=64)


@st.composite
def rational_polys(draw, max_degree: int = 5):
    coeffs = draw(st.lists(small_fractions, min_size=0, max_size=max_degree + 1))
    return RationalPolynomial(coeffs)
