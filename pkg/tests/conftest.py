import shutil

import pytest

from gibbsqc.bayesnet import load_net
from gibbsqc.data import EXAMPLES, example_folder

_criteria: dict[int, list] = {}


@pytest.fixture
def io_folder(tmp_path):
    """Copy a shipped example folder into a scratch directory."""

    def make(name):
        dst = tmp_path / name
        shutil.copytree(example_folder(name), dst)
        return dst

    return make


@pytest.fixture(scope="session")
def nets():
    return {name: load_net(example_folder(name)) for name in EXAMPLES}


@pytest.fixture(scope="session")
def net3(nets):
    return nets["3nodes"]


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _criteria.setdefault(mark.args[0], [mark.args[1], True])
        _criteria[mark.args[0]][1] &= rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_criteria):
        title, ok = _criteria[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}")
