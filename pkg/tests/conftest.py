"""Session-scoped fixtures shared across the test modules.

The calibrated device and the basis tables dominate the suite's runtime, so
they are built once.  Tables come in three sizes: +/-12 uPhi0 for unit
tests, +/-36 uPhi0 for moderate-noise ensembles, and +/-96 uPhi0 covering
six sigma of the largest swept noise amplitude (16 uPhi0).
"""
import pytest

from rfsquid import (FluxGrid, build_basis_table, default_device,
                     prepare_initial_state)


@pytest.fixture(scope="session")
def cal():
    return default_device()


@pytest.fixture(scope="session")
def params(cal):
    return cal.params


@pytest.fixture(scope="session")
def grid():
    return FluxGrid()


@pytest.fixture(scope="session")
def table12(params, grid):
    return build_basis_table(params, grid, half_range_uphi0=12.0)


@pytest.fixture(scope="session")
def table36(params, grid):
    return build_basis_table(params, grid, half_range_uphi0=36.0)


@pytest.fixture(scope="session")
def table96(params, grid):
    return build_basis_table(params, grid, half_range_uphi0=96.0)


@pytest.fixture(scope="session")
def initial12(params, table12):
    return prepare_initial_state(params, table12)


@pytest.fixture(scope="session")
def initial36(params, table36):
    return prepare_initial_state(params, table36)


@pytest.fixture(scope="session")
def initial96(params, table96):
    return prepare_initial_state(params, table96)
