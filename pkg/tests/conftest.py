import pytest

from sandtable.analytic import half_open_square
from sandtable.dynamics import SchemeParams, decomposed_run, run_to_equilibrium
from sandtable.geometry import Disk, boundary_arcs, region_decomposition
from sandtable.grid import Grid
from sandtable.sources import ConstantSource

H_DYN = 1 / 64


@pytest.fixture(scope="session")
def square():
    return half_open_square()


@pytest.fixture(scope="session")
def disk():
    dom = Disk(0.0, 0.0, 1.0)
    return dom, boundary_arcs(dom)


@pytest.fixture(scope="session")
def unit():
    return ConstantSource(1.0)


@pytest.fixture(scope="session")
def params64():
    # neg_tol=0: any negative u or v during the run aborts it
    return SchemeParams(h=H_DYN, neg_tol=0.0)


@pytest.fixture(scope="session")
def run64(square, unit, params64):
    dom, gamma = square
    return run_to_equilibrium(unit, params64, dom, gamma)


@pytest.fixture(scope="session")
def decomposed64(square, unit, params64):
    dom, gamma = square
    labels = region_decomposition(Grid.nodes(dom, H_DYN), dom, gamma)
    return decomposed_run(unit, params64, dom, gamma, labels)


# one line per acceptance criterion, repeated at the end of the session
_AC_LINES: dict[str, str] = {}


@pytest.fixture
def ac_report():
    def report(key: str, ok: bool, detail: str) -> None:
        line = f"{key} {'PASS' if ok else 'FAIL'}: {detail}"
        _AC_LINES[key] = line
        print(line)
    return report


def pytest_terminal_summary(terminalreporter):
    if not _AC_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_AC_LINES, key=lambda k: int(k.split("-")[1])):
        terminalreporter.write_line(_AC_LINES[key])
