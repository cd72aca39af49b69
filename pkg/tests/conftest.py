import math

import pytest

from sgjunction.graph import YJunction, build_mesh
from sgjunction.operators import assemble_free

DESK_L = 40.0
DESK_H = 0.01

Z_SMOOTH = -6.0 / math.pi
Z_AK_SMOOTH = -2.0 / math.pi

# one verdict line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    def log(line: str) -> None:
        ACCEPTANCE_LINES.append(line)
        print(line)

    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def jct111():
    return YJunction((1.0, 1.0, 1.0))


@pytest.fixture(scope="session")
def mesh_desk(jct111):
    return build_mesh(jct111, DESK_L, DESK_H)


@pytest.fixture(scope="session")
def mesh_coarse(jct111):
    return build_mesh(jct111, 30.0, 0.02)


@pytest.fixture(scope="session")
def mesh_quick(jct111):
    return build_mesh(jct111, 20.0, 0.05)


@pytest.fixture(scope="session")
def free_opr_quick(jct111, mesh_quick):
    return assemble_free(mesh_quick, jct111, -1.0)
