"""Shared instances for the test suite.

Two reference instances are built once per session: a 1D interval at p = 2
(cheap, with a dense linear-algebra oracle) and a Heisenberg gauge ball.
"""

import numpy as np
import pytest

from subspec.grid import BOX, GAUGE_BALL, DomainSpec, build_grid
from subspec.groups import GroupConfig
from subspec.kernel import FracParams, assemble


@pytest.fixture(scope="session")
def grid1d():
    spec = DomainSpec(BOX, GroupConfig.abelian(1), lo=[-1.0], hi=[1.0])
    return build_grid(spec, 1.0 / 32.0)


@pytest.fixture(scope="session")
def fp1d():
    return FracParams(s=0.4, p=2.0, Q=1)


@pytest.fixture(scope="session")
def K1d(grid1d, fp1d):
    return assemble(grid1d, fp1d)


@pytest.fixture(scope="session")
def gridH():
    spec = DomainSpec(GAUGE_BALL, GroupConfig.heisenberg(1), radius=1.0)
    return build_grid(spec, 0.2)


@pytest.fixture(scope="session")
def fpH():
    return FracParams(s=0.5, p=2.0, Q=4)


@pytest.fixture(scope="session")
def KH(gridH, fpH):
    return assemble(gridH, fpH)


@pytest.fixture(scope="session")
def tiny_grid():
    spec = DomainSpec(BOX, GroupConfig.abelian(1), lo=[-1.0], hi=[1.0])
    return build_grid(spec, 1.0 / 8.0)


@pytest.fixture(scope="session")
def tiny_K(tiny_grid):
    return assemble(tiny_grid, FracParams(s=0.4, p=2.0, Q=1))


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
