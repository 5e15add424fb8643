import pytest

from kohnlab.basis import BasisSpec
from kohnlab.engine import assemble_elements
from kohnlab.potentials import PotentialSpec, build_grid


@pytest.fixture(scope="session")
def default_potential():
    return PotentialSpec.exponential(-3.0, 1.0)


@pytest.fixture(scope="session")
def default_basis():
    return BasisSpec()


@pytest.fixture(scope="session")
def default_grid(default_potential):
    return build_grid(60.0, 480, default_potential)


@pytest.fixture(scope="session")
def table_k02(default_potential, default_basis, default_grid):
    return assemble_elements(default_potential, default_basis, 0.2, default_grid)


@pytest.fixture(scope="session")
def table_k05(default_potential, default_basis, default_grid):
    return assemble_elements(default_potential, default_basis, 0.5, default_grid)


@pytest.fixture(scope="session")
def zero_potential():
    return PotentialSpec.zero()


@pytest.fixture(scope="session")
def zero_grid(zero_potential):
    return build_grid(60.0, 480, zero_potential)


@pytest.fixture(scope="session")
def zero_table_k05(zero_potential, default_basis, zero_grid):
    return assemble_elements(zero_potential, default_basis, 0.5, zero_grid)
