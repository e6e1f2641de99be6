import numpy as np
import pytest

from wavewell import DomainGrid, assemble_stiffness, make_coefficient_field
from wavewell.functionals import Exponents


@pytest.fixture(scope="session")
def pi_grid():
    return DomainGrid(length=np.pi, n_modes=16)


@pytest.fixture(scope="session")
def unit_coeff():
    """A(x) = 1, mu(t) = 1 on (0, pi)."""
    return make_coefficient_field(length=np.pi)


@pytest.fixture(scope="session")
def relaxing_coeff():
    """A(x) = 1, mu(t) = 1 + exp(-t) on (0, pi)."""
    return make_coefficient_field(
        length=np.pi, mu_family="exp_decay", mu_params=(1.0, 1.0, 1.0)
    )


@pytest.fixture(scope="session")
def pi_stiffness(pi_grid, unit_coeff):
    return assemble_stiffness(pi_grid, unit_coeff)


@pytest.fixture(scope="session")
def cubic_exponents():
    return Exponents(q=3.0, p=0.0)
