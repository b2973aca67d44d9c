"""Unit test level conftest.py"""

# pylint: disable=missing-function-docstring,redefined-outer-name,R0913

import numpy as np
import pytest
from qr_wave.banded import BandedMatrix
from qr_wave.config import validate
from qr_wave.grid import GridGeometry
from qr_wave.hamiltonian import assemble_h, build_cayley
from qr_wave.potential import CorrugationParams, PotentialField, Region

SEED = 20240917
#: Internal hbar of the default nm / ns / helium-3 unit system
HBAR = 21.0490
MASS = 1.0


@pytest.fixture(scope='function')
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture(scope='function')
def random_band(rng):
    """Random complex symmetric, diagonally dominant band matrix"""

    def _random_band(order: int = 40, half_bandwidth: int = 4) -> BandedMatrix:
        data = np.zeros((half_bandwidth + 1, order), dtype=np.complex128)
        for d in range(1, half_bandwidth + 1):
            data[d, : order - d] = rng.normal(size=order - d) + 1j * rng.normal(
                size=order - d
            )
        # dominance with a non-trivial phase on the diagonal
        data[0] = (2.0 * half_bandwidth + 4.0) * np.exp(0.3j) + rng.normal(size=order)
        return BandedMatrix(data)

    return _random_band


@pytest.fixture(scope='function')
def tiny_validated(tiny_config):
    def _tiny_validated(**overrides):
        return validate(tiny_config(**overrides))

    return _tiny_validated


@pytest.fixture(scope='function')
def flat_field():
    """A zero potential on an arbitrary grid"""

    def _flat_field(grid: GridGeometry) -> PotentialField:
        params = CorrugationParams(c3=1.0, A=0.0, L=grid.L, phi=0.0, delta=1.0)
        return PotentialField(
            values=np.zeros(grid.shape),
            region=np.full(grid.shape, Region.FAR, dtype=np.int8),
            params=params,
            geometry=grid,
        )

    return _flat_field


@pytest.fixture(scope='function')
def free_system(flat_field):
    """Cayley system of a free particle on the given grid"""

    def _free_system(grid: GridGeometry, dt: float, mass: float = MASS, hbar: float = HBAR):
        h = assemble_h(grid, flat_field(grid), mass, hbar)
        return build_cayley(h, dt, hbar)

    return _free_system
