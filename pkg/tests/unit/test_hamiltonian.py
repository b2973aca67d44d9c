"""Unit tests for the Hamiltonian and the Cayley system"""

import numpy as np
import pytest
from scipy import linalg  # type: ignore
from qr_wave.banded import BandedMatrix, matvec, solve
from qr_wave.exceptions import GridMismatch
from qr_wave.grid import GridGeometry
from qr_wave.hamiltonian import assemble_h, build_cayley, kinetic_couplings
from qr_wave.potential import PotentialField


@pytest.fixture
def grid():
    return GridGeometry(n_x=8, n_y=4, dx=1.0, dy=1.0, x_min=-4.0, L=4.0)


def free_levels(grid: GridGeometry, mass: float, hbar: float) -> np.ndarray:
    """Dirichlet-in-x, periodic-in-y levels of the discrete Laplacian"""
    j = np.arange(1, grid.n_x + 1)
    m = np.arange(grid.n_y)
    e_x = 2.0 * hbar**2 / (mass * grid.dx**2) * np.sin(np.pi * j / (2 * (grid.n_x + 1))) ** 2
    e_y = 2.0 * hbar**2 / (mass * grid.dy**2) * np.sin(np.pi * m / grid.n_y) ** 2
    return np.sort(np.add.outer(e_x, e_y).ravel())


class TestAssemble:
    """TestAssemble

    Test the banded Hamiltonian
    """

    def test_couplings(self, grid):
        """test_couplings
        Should give -hbar^2 / (2 m d^2) along each axis
        """
        c_x, c_y = kinetic_couplings(grid, mass=2.0, hbar=1.0)
        assert c_x == pytest.approx(-0.25)
        assert c_y == pytest.approx(-0.25)

    def test_free_spectrum(self, grid, flat_field):
        """test_free_spectrum
        Should reproduce the analytic levels of the free particle
        """
        h = assemble_h(grid, flat_field(grid), mass=1.0, hbar=1.0)
        levels = linalg.eigvalsh(h.to_dense().real)
        np.testing.assert_allclose(levels, free_levels(grid, 1.0, 1.0), atol=1e-12)

    def test_constant_shift(self, grid, flat_field):
        """test_constant_shift
        Should shift every level by a constant potential
        """
        flat = flat_field(grid)
        shifted = PotentialField(
            values=np.full(grid.shape, 0.75),
            region=flat.region,
            params=flat.params,
            geometry=grid,
        )
        h0 = linalg.eigvalsh(assemble_h(grid, flat, 1.0, 1.0).to_dense().real)
        h1 = linalg.eigvalsh(assemble_h(grid, shifted, 1.0, 1.0).to_dense().real)
        np.testing.assert_allclose(h1, h0 + 0.75, atol=1e-12)

    def test_stencil_layout(self, grid, flat_field):
        """test_stencil_layout
        Should couple y-neighbours, the y wrap and x-neighbours only
        """
        dense = assemble_h(grid, flat_field(grid), 1.0, 1.0).to_dense().real
        c = -0.5
        k = grid.index(3, 0)
        assert dense[k, grid.index(3, 1)] == c
        assert dense[k, grid.index(3, 3)] == c
        assert dense[k, grid.index(4, 0)] == c
        assert dense[k, grid.index(2, 0)] == c
        assert dense[grid.index(3, 3), grid.index(4, 0)] == 0.0
        assert np.count_nonzero(dense, axis=1).max() <= 5
        assert np.array_equal(dense, dense.T)

    def test_bandwidth(self, grid, flat_field):
        """test_bandwidth
        Should keep the periodic wrap inside a band of n_y
        """
        h = assemble_h(grid, flat_field(grid), 1.0, 1.0)
        assert h.half_bandwidth == grid.n_y
        assert h.data.shape == (grid.n_y + 1, grid.size)

    def test_interior_rows_sum_to_zero(self, grid, flat_field):
        """test_interior_rows_sum_to_zero
        Should annihilate a constant away from the Dirichlet edges
        """
        dense = assemble_h(grid, flat_field(grid), 1.0, 1.0).to_dense().real
        sums = dense.sum(axis=1).reshape(grid.shape)
        np.testing.assert_allclose(sums[1:-1], 0.0, atol=1e-14)

    def test_grid_mismatch(self, grid, flat_field):
        """test_grid_mismatch
        Should raise GridMismatch for a potential sampled elsewhere
        """
        other = GridGeometry(n_x=16, n_y=4, dx=1.0, dy=1.0, x_min=-4.0, L=4.0)
        with pytest.raises(GridMismatch):
            assemble_h(grid, flat_field(other), 1.0, 1.0)


class TestCayley:
    """TestCayley

    Test the Crank-Nicolson matrices
    """

    def test_sides_sum_to_two(self, grid, free_system):
        """test_sides_sum_to_two
        Should satisfy a_plus + a_minus = 2
        """
        system = free_system(grid, dt=0.3, mass=1.0, hbar=1.0)
        total = system.a_plus.to_dense() + system.a_minus.to_dense()
        np.testing.assert_allclose(total, 2.0 * np.eye(grid.size), atol=1e-15)

    def test_unitary(self, grid, free_system):
        """test_unitary
        Should give a propagator whose singular values are all one
        """
        system = free_system(grid, dt=0.7, mass=1.0, hbar=1.0)
        step = linalg.solve(system.a_plus.to_dense(), system.a_minus.to_dense())
        np.testing.assert_allclose(linalg.svdvals(step), 1.0, atol=1e-12)

    def test_zero_hamiltonian(self, grid):
        """test_zero_hamiltonian
        Should reduce to the identity when H = 0
        """
        zero = BandedMatrix(np.zeros((grid.n_y + 1, grid.size), dtype=complex))
        system = build_cayley(zero, dt=5.0, hbar=21.0)
        vec = np.arange(grid.size) * (1 - 0.5j)
        np.testing.assert_array_equal(solve(system.factor, matvec(system.a_minus, vec)), vec)

    def test_time_reversal(self, grid, free_system, rng):
        """test_time_reversal
        Should undo a step with the system built for -dt
        """
        forward = free_system(grid, dt=0.4, mass=1.0, hbar=1.0)
        backward = free_system(grid, dt=-0.4, mass=1.0, hbar=1.0)
        psi = rng.normal(size=grid.size) + 1j * rng.normal(size=grid.size)
        once = solve(forward.factor, matvec(forward.a_minus, psi))
        back = solve(backward.factor, matvec(backward.a_minus, once))
        np.testing.assert_allclose(back, psi, atol=1e-12)

    def test_timing_recorded(self, grid, free_system):
        """test_timing_recorded
        Should record the factorization wall time and the step
        """
        system = free_system(grid, dt=0.4, mass=1.0, hbar=1.0)
        assert system.factor_seconds >= 0.0
        assert system.dt == 0.4
