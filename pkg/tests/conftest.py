from __future__ import annotations

from functools import lru_cache

import pytest

from sodweave.hecke import run_hecke
from sodweave.lattice import derive_params
from sodweave.plain_weave import run_plain_weave
from sodweave.weave import build_sod


@lru_cache(maxsize=None)
def sod_run(g: int, d: int):
    return build_sod(derive_params(g, d))


@lru_cache(maxsize=None)
def plain(g: int):
    return run_plain_weave(g)


@lru_cache(maxsize=None)
def hecke(g: int):
    return run_hecke(g)


@pytest.fixture(scope="session")
def runs():
    return sod_run


@pytest.fixture(scope="session")
def plain_runs():
    return plain


@pytest.fixture(scope="session")
def hecke_runs():
    return hecke


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
