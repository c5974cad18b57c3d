import random
from fractions import Fraction

import pytest

from fundisc.lattice import HalfIntMatrix, random_lattice

F_HALF = HalfIntMatrix([[1, Fraction(1, 2)], [Fraction(1, 2), 1]])  # 2M = F


def sample_lattices(count, seed=20240, sizes=(1, 2, 3, 4, 5), max_d=500):
    rng = random.Random(seed)
    return [random_lattice(sizes[i % len(sizes)], rng, max_d=max_d) for i in range(count)]


@pytest.fixture(scope="session")
def lattices():
    return sample_lattices(60)


@pytest.fixture
def F():
    return F_HALF


# ---- acceptance report: one line per criterion ----

def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    item.config._criteria[number] = (title, rep.passed, detail)


def pytest_terminal_summary(terminalreporter, config):
    crit = getattr(config, "_criteria", {})
    if not crit:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(crit):
        title, ok, detail = crit[number]
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
