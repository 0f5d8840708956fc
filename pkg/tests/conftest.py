import numpy as np
import pytest

from platerod.fields import AnalyticPlateField, AnalyticRodField, LimitTriple
from platerod.forces import ForceData
from platerod.geometry import Geometry
from platerod.material import LameParams

# plate ramp: 0 for x1 <= -2, 1 for x1 >= -1 (C2 quintic in between)
RAMP = "Piecewise((0, x1 <= -2), (1, x1 >= -1), (10*(x1+2)**3 - 15*(x1+2)**4 + 6*(x1+2)**5, True))"

ACCEPTANCE_RESULTS = {}


def record(criterion: int, passed: bool, detail: str):
    line = f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_RESULTS[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_RESULTS):
            terminalreporter.write_line(ACCEPTANCE_RESULTS[k])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_geometry():
    return Geometry(1.0, 1.0, 1.0, 1.0, ("left",), 1.0)


@pytest.fixture
def unit_lame():
    return LameParams(1.0, 1.0, 1.0, 1.0)


def study_geometry():
    return Geometry(3.0, 2.0, 1.5, 1.5, ("left",), 2.0)


def study_triple():
    plate = AnalyticPlateField(f"0.3*{RAMP}", f"-0.2*{RAMP}", f"0.4*{RAMP}")
    rod = AnalyticRodField("0.15*x3**2", "-0.09*x3**3", "0.4 + 0.2*x3 - 0.1*x3**2", "0.12*x3")
    return LimitTriple(plate, rod)


def study_lame():
    return LameParams(1.0, 1.0, 1.5, 0.8)


def study_forces():
    return ForceData.build(["0.3", "-0.2", "1 + 0.5*x1"], ["0.2", "0.1", "0.5"],
                           ["0.1", "0.3", "0.2"], ["-0.2", "0.1", "0.3"])
