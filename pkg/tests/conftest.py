import numpy as np
import pytest

from pdcgm.apps.mcnf import Arc, Commodity, Network
from pdcgm.apps.tssp import Scenario, StochasticInstance
from pdcgm.colgen.models import DriverConfig
from pdcgm.colgen.oracle import QuadraticBowls
from pdcgm.lp import LinearProgram, RowKind


@pytest.fixture
def bottleneck_network():
    """Five units from 1 to 3; the cheap route through 2 carries only three"""
    arcs = [
        Arc(1, 2, 1.0, 3.0),
        Arc(2, 3, 1.0, 10.0),
        Arc(1, 3, 3.0, 10.0),
    ]
    return Network(3, arcs, [Commodity(1, 3, 5.0)], name="bottleneck")


@pytest.fixture
def newsvendor():
    """
    min x + E[2 max(0, h - x)] with h = 1 or 3 at probability 1/2;
    every x in [1, 3] is optimal with value 3
    """
    scenarios = [
        Scenario(p=0.5, q=[2.0, 0.0], T=[[1.0]], W=[[1.0, -1.0]], h=[1.0]),
        Scenario(p=0.5, q=[2.0, 0.0], T=[[1.0]], W=[[1.0, -1.0]], h=[3.0]),
    ]
    return StochasticInstance(c=[1.0], A=np.zeros((0, 1)), b=[], scenarios=scenarios, name="newsvendor")


@pytest.fixture
def capped_stochastic():
    """
    max x with x <= 2 from the first stage and x <= h_i from the recourse
    rows, h = 1 or 2; the average scenario admits x = 1.5, which the first
    scenario cannot absorb
    """
    scenarios = [
        Scenario(p=0.5, q=[0.0], T=[[1.0, 0.0]], W=[[1.0]], h=[1.0]),
        Scenario(p=0.5, q=[0.0], T=[[1.0, 0.0]], W=[[1.0]], h=[2.0]),
    ]
    return StochasticInstance(c=[-1.0, 0.0], A=[[1.0, 1.0]], b=[2.0], scenarios=scenarios, name="capped")


@pytest.fixture
def two_bowls():
    """max(S_1, S_2) is S_1 on the box, minimised at alpha = 1 with value -1/2"""
    return QuadraticBowls(a=[[1.0], [1.0]], b=[[1.0], [3.0]], box=5.0)


@pytest.fixture
def le_program():
    """min -x1 - x2 s.t. x1 + 2 x2 <= 4, 3 x1 + x2 <= 6; optimum -2.8 at (1.6, 1.2)"""
    return LinearProgram.from_dense(
        [-1.0, -1.0],
        [[1.0, 2.0], [3.0, 1.0]],
        [4.0, 6.0],
        row_kinds=[RowKind.LESS_EQUAL, RowKind.LESS_EQUAL],
    )


@pytest.fixture
def mcnf_config():
    return DriverConfig(delta=1e-6, degree=10.0)


@pytest.fixture
def tssp_config():
    return DriverConfig(delta=1e-6, degree=5.0)
