"""Unit tests for the corrugated cutoff potential"""

import csv
import numpy as np
import pytest
from qr_wave.exceptions import GridMismatch, InvalidConfig
from qr_wave.grid import GridGeometry
from qr_wave.potential import (
    CorrugationParams,
    Region,
    classify,
    derivative_of_r,
    effective_distance,
    evaluate,
    evaluate_derivative,
    evaluate_field,
    potential_of_r,
    write_row_csv,
)
from qr_wave.units import SI

C3 = 4.0e-50
DEFAULTS = CorrugationParams(c3=C3, A=10e-9, L=100e-9, phi=0.0, delta=10e-9)


class TestPieces:
    """TestPieces

    Test the piecewise potential in effective distance
    """

    def test_far_tail(self):
        """test_far_tail
        Should give -c3 / (2 um)^3 = -5e-33 J at x = 2 um
        """
        assert evaluate(2.0e-6, 0.0, DEFAULTS) == pytest.approx(-5.0e-33, rel=1e-12)

    def test_two_delta(self):
        """test_two_delta
        Should give -1/8 at r = 2 delta for c3 = delta = 1
        """
        assert potential_of_r(2.0, 1.0, 1.0) == pytest.approx(-0.125)

    def test_floor(self):
        """test_floor
        Should be flat at -5 c3 / (2 delta^3) for r <= 0
        """
        values = potential_of_r(np.array([-3.0, -0.5, 0.0]), 2.0, 1.0)
        np.testing.assert_allclose(values, -5.0)
        assert DEFAULTS.floor == pytest.approx(-2.5 * C3 / (10e-9) ** 3)

    def test_continuity(self):
        """test_continuity
        Should join value and slope at r = delta
        """
        eps = 1e-9
        assert potential_of_r(1.0 - eps, 1.0, 1.0) == pytest.approx(
            potential_of_r(1.0 + eps, 1.0, 1.0), abs=1e-7
        )
        assert derivative_of_r(1.0 - eps, 1.0, 1.0) == pytest.approx(
            derivative_of_r(1.0 + eps, 1.0, 1.0), abs=1e-7
        )
        assert potential_of_r(1.0, 1.0, 1.0) == pytest.approx(-1.0)

    def test_monotone_in_r(self):
        """test_monotone_in_r
        Should never decrease with r
        """
        r = np.linspace(-2.0, 6.0, 2001)
        assert np.all(np.diff(potential_of_r(r, 1.0, 1.0)) >= 0.0)

    def test_derivative(self):
        """test_derivative
        Should match a central difference of the potential
        """
        r = np.array([0.3, 0.9, 1.7, 4.0])
        h = 1e-6
        numeric = (potential_of_r(r + h, 1.0, 1.0) - potential_of_r(r - h, 1.0, 1.0)) / (2 * h)
        np.testing.assert_allclose(derivative_of_r(r, 1.0, 1.0), numeric, rtol=1e-6)
        assert evaluate_derivative(3.0, 0.0, CorrugationParams(1.0, 0.0, 1.0, 0.0, 1.0)) == (
            pytest.approx(3.0 / 81.0)
        )

    def test_classify(self):
        """test_classify
        Should label points by the piece they fall in
        """
        regions = classify(np.array([-1.0, 0.0, 0.5, 1.0, 2.0]), 1.0)
        expected = [Region.INNER, Region.SHELL, Region.SHELL, Region.FAR, Region.FAR]
        assert list(regions) == [int(r) for r in expected]


class TestCorrugation:
    """TestCorrugation

    Test the dependence on y through the corrugation
    """

    def test_flat_when_a_is_zero(self):
        """test_flat_when_a_is_zero
        Should not depend on y without corrugation
        """
        params = CorrugationParams(c3=1.0, A=0.0, L=1.0, phi=0.3, delta=0.1)
        y = np.linspace(0.0, 1.0, 17)
        values = evaluate(0.25, y, params)
        assert np.ptp(values) == 0.0

    def test_translation_covariance(self):
        """test_translation_covariance
        Should equal the flat potential at x - A sin(2 pi y / L + phi)
        """
        params = CorrugationParams(c3=1.0, A=0.2, L=1.0, phi=0.4, delta=0.1)
        flat = CorrugationParams(c3=1.0, A=0.0, L=1.0, phi=0.4, delta=0.1)
        x, y = 0.7, 0.13
        shift = 0.2 * np.sin(2 * np.pi * y + 0.4)
        assert evaluate(x, y, params) == pytest.approx(evaluate(x - shift, y, flat))

    def test_half_period_symmetry(self):
        """test_half_period_symmetry
        Should be unchanged under y -> y + L/2 together with phi -> phi + pi
        """
        params = CorrugationParams(c3=1.0, A=0.2, L=1.0, phi=0.4, delta=0.1)
        turned = CorrugationParams(c3=1.0, A=0.2, L=1.0, phi=0.4 + np.pi, delta=0.1)
        x = np.linspace(-0.5, 2.0, 11)
        np.testing.assert_allclose(
            evaluate(x, 0.1 + 0.5, turned), evaluate(x, 0.1, params), rtol=1e-12
        )

    def test_effective_distance(self):
        """test_effective_distance
        Should subtract the surface height
        """
        params = CorrugationParams(c3=1.0, A=2.0, L=4.0, phi=0.0, delta=0.1)
        assert effective_distance(5.0, 1.0, params) == pytest.approx(3.0)

    def test_invalid_params(self):
        """test_invalid_params
        Should refuse a non-positive cutoff
        """
        with pytest.raises(InvalidConfig) as err:
            CorrugationParams(c3=1.0, A=0.0, L=1.0, phi=0.0, delta=0.0)
        assert err.value.field == 'delta'


class TestField:
    """TestField

    Test sampling on a grid
    """

    @pytest.fixture
    def grid(self):
        return GridGeometry(n_x=64, n_y=8, dx=0.05, dy=0.125, x_min=-1.0, L=1.0)

    def test_sampled_shape(self, grid):
        """test_sampled_shape
        Should sample every point and mark all three regions
        """
        params = CorrugationParams(c3=1.0, A=0.2, L=1.0, phi=0.0, delta=0.1)
        pot = evaluate_field(grid, params)
        assert pot.values.shape == (64, 8)
        assert pot.flat().shape == (512,)
        assert {int(r) for r in np.unique(pot.region)} == {0, 1, 2}
        assert not pot.values.flags.writeable

    def test_period_mismatch(self, grid):
        """test_period_mismatch
        Should raise GridMismatch when L differs from the grid extent
        """
        params = CorrugationParams(c3=1.0, A=0.2, L=2.0, phi=0.0, delta=0.1)
        with pytest.raises(GridMismatch):
            evaluate_field(grid, params)

    def test_row_csv(self, grid, tmp_path):
        """test_row_csv
        Should write x, V and dV/dx for every grid column
        """
        params = CorrugationParams(c3=1.0, A=0.2, L=1.0, phi=0.0, delta=0.1)
        pot = evaluate_field(grid, params)
        path = write_row_csv(pot, tmp_path / 'row.csv', j=2, units=SI)
        with path.open(encoding='utf-8') as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ['x_m', 'V_J', 'dVdx_N']
        assert len(rows) == 65
        assert float(rows[1][1]) == pytest.approx(pot.values[0, 2])
        slope = evaluate_derivative(grid.x, grid.y[2], params)
        np.testing.assert_allclose([float(row[2]) for row in rows[1:]], slope, rtol=1e-12)

    def test_row_out_of_range(self, grid):
        """test_row_out_of_range
        Should raise GridMismatch for a row outside the grid
        """
        params = CorrugationParams(c3=1.0, A=0.0, L=1.0, phi=0.0, delta=0.1)
        with pytest.raises(GridMismatch):
            evaluate_field(grid, params).row(8)
