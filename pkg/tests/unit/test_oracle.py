"""Unit tests for the stationary 1D reflectivity"""

from dataclasses import dataclass
from unittest import mock
import numpy as np
import pytest
from qr_wave.exceptions import InvalidConfig, NoConvergence
from qr_wave.oracle import (
    Potential1D,
    cutoff_sweep,
    discrete_wavenumber,
    packet_reflectivity_1d,
    reflectivity_1d,
    scatter_1d,
)
from qr_wave.units import C3, UnitSystem

UNITS = UnitSystem()
HBAR = UNITS.hbar
C3_INTERNAL = UNITS.to_internal(4.0e-50, C3)
#: Kinetic energy of a helium-3 atom at 2 m/s, internal units
ENERGY = 2.0


@dataclass(frozen=True)
class StepPotential1D:
    """A sharp step: ``height`` below ``edge``, zero above"""

    height: float
    edge: float = 0.0
    length_scale: float = 1.0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        # the node on the edge takes the mean value
        return np.where(x < self.edge, self.height, np.where(x > self.edge, 0.0, 0.5 * self.height))

    @property
    def floor(self) -> float:
        return self.height

    @property
    def inner_edge(self) -> float:
        return self.edge

    def negligible_beyond(self, level: float) -> float:  # pylint: disable=W0613
        return self.edge


class TestNumerov:
    """TestNumerov

    Test the integrator against exactly solvable cases
    """

    def test_discrete_wavenumber(self):
        """test_discrete_wavenumber
        Should approach sqrt(g) for small steps
        """
        assert discrete_wavenumber(4.0, 1e-3) == pytest.approx(2.0, rel=1e-9)

    def test_free(self):
        """test_free
        Should not reflect without a potential
        """
        result = scatter_1d(StepPotential1D(0.0), 0.5, 1.0, 1.0)
        assert result.reflection < 1e-20
        assert result.transmission == pytest.approx(1.0, abs=1e-12)

    def test_step(self):
        """test_step
        Should reproduce ((k - k') / (k + k'))^2 for a potential step
        """
        result = scatter_1d(StepPotential1D(-3.0), 0.5, 1.0, 1.0, step=0.002)
        assert result.reflection == pytest.approx(1.0 / 9.0, rel=1e-2)
        assert result.flux_error < 1e-8

    def test_flux(self):
        """test_flux
        Should conserve flux for the cutoff potential
        """
        pot = Potential1D(c3=C3_INTERNAL, delta=10.0)
        result = scatter_1d(pot, 1.0, ENERGY, HBAR)
        assert 0.0 < result.reflection < 1.0
        assert result.flux_error < 1e-8

    def test_bad_energy(self):
        """test_bad_energy
        Should refuse a non-positive incident energy
        """
        with pytest.raises(InvalidConfig) as err:
            scatter_1d(Potential1D(c3=1.0, delta=1.0), 1.0, 0.0, 1.0)
        assert err.value.field == 'energy'

    def test_bad_potential(self):
        """test_bad_potential
        Should refuse a non-positive cutoff
        """
        with pytest.raises(InvalidConfig):
            Potential1D(c3=1.0, delta=0.0)


class TestReflectivity:
    """TestReflectivity

    Test converged reflectivities
    """

    def test_converged(self):
        """test_converged
        Should converge for the reference parameters
        """
        pot = Potential1D(c3=C3_INTERNAL, delta=10.0)
        refl = reflectivity_1d(pot, 1.0, ENERGY, HBAR)
        assert 0.0 < refl < 1.0
        assert refl == pytest.approx(scatter_1d(pot, 1.0, ENERGY, HBAR).reflection, abs=1e-6)

    def test_no_convergence(self):
        """test_no_convergence
        Should raise NoConvergence when refinement moves R beyond the limit
        """
        pot = Potential1D(c3=C3_INTERNAL, delta=10.0)
        with mock.patch('qr_wave.oracle.CONVERGENCE_LIMIT', -1.0):
            with pytest.raises(NoConvergence):
                reflectivity_1d(pot, 1.0, ENERGY, HBAR)

    def test_packet_close_to_central(self):
        """test_packet_close_to_central
        Should stay close to the stationary value for a narrow momentum spread
        """
        pot = Potential1D(c3=C3_INTERNAL, delta=10.0)
        central = reflectivity_1d(pot, 1.0, ENERGY, HBAR)
        averaged = packet_reflectivity_1d(pot, 1.0, 2.0, 800.0, HBAR, nodes=8)
        assert averaged == pytest.approx(central, rel=5e-2)

    def test_cutoff_sweep(self):
        """test_cutoff_sweep
        Should return one (delta, R) pair per cutoff, in order
        """
        rows = cutoff_sweep(C3_INTERNAL, [10.0, 20.0], 1.0, 2.0, HBAR)
        assert [row[0] for row in rows] == [10.0, 20.0]
        assert all(0.0 < row[1] < 1.0 for row in rows)
        pot = Potential1D(c3=C3_INTERNAL, delta=10.0)
        assert rows[0][1] == reflectivity_1d(pot, 1.0, ENERGY, HBAR)

    def test_cutoff_sweep_packet(self):
        """test_cutoff_sweep_packet
        Should average over the packet momenta when sigma_x is given
        """
        rows = cutoff_sweep(C3_INTERNAL, [10.0], 1.0, 2.0, HBAR, sigma_x=40.0)
        pot = Potential1D(c3=C3_INTERNAL, delta=10.0)
        assert rows[0][1] == pytest.approx(
            packet_reflectivity_1d(pot, 1.0, 2.0, 40.0, HBAR), rel=1e-12
        )
