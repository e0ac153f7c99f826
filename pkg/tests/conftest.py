from collections import defaultdict
from pathlib import Path

import pytest

from deplab.treebank import read_conll

DATA = Path(__file__).parent / "data"

_criteria: dict = {}
_outcomes = defaultdict(list)


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def scripts_sent():
    return read_conll(DATA / "scripts.conll")[0]


@pytest.fixture(scope="session")
def nonproj_sent():
    return read_conll(DATA / "nonprojective.conll")[0]


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m is not None:
            num, title = m.args
            _criteria[num] = title


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("acceptance")
    if m is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _outcomes[m.args[0]].append(rep.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        outs = _outcomes.get(num, [])
        if not outs:
            status = "NOT RUN"
        elif any(o == "failed" for o in outs):
            status = "FAIL"
        elif all(o == "skipped" for o in outs):
            status = "SKIP"
        else:
            status = "PASS"
        terminalreporter.write_line(f"criterion {num}: {status}  {_criteria[num]}")
