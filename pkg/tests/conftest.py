from fractions import Fraction

import pytest

from gfoddplan import AVG, MAX, If, Var, atom, build
from gfoddplan.model import builtin
from gfoddplan.oracle import build_ground
from gfoddplan.planner import plan
from gfoddplan.reduce import all_focus_states

# acceptance results collected for the terminal summary: number -> (title, passed, detail)
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {k:2d}. {title}: {detail}")


@pytest.fixture(scope="session")
def ic():
    return builtin("ic")


@pytest.fixture(scope="session")
def aic():
    return builtin("aic")


@pytest.fixture(scope="session")
def i2(ic):
    """Two shops, s1 empty, the loaded truck at the depot."""
    return ic.interpretation(2, [("empty", "s1"), ("tin", "t1", "d1"), ("loaded", "t1")])


@pytest.fixture(scope="session")
def f_r():
    y = Var("y", "shop")
    return build([(y, AVG)], If(atom("empty", y), 0, 1))


@pytest.fixture(scope="session")
def f_rex():
    t, s = Var("t", "truck"), Var("s", "shop")
    return build([(t, MAX), (s, AVG)],
                 If(atom("empty", s), If(atom("tin", t, s), Fraction(1, 10), 0), 1))


@pytest.fixture(scope="session")
def ic_mdp2(ic):
    return build_ground(ic, 2)


@pytest.fixture(scope="session")
def ic_plan(ic):
    return plan(ic, 4, all_focus_states(ic, 2))


@pytest.fixture(scope="session")
def aic_plan(aic):
    return plan(aic, 4, all_focus_states(aic, 2))
