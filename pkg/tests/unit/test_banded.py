"""Unit tests for the banded LL^T solver"""

import numpy as np
import pytest
from scipy import linalg  # type: ignore
from qr_wave.banded import (
    BandedMatrix,
    describe,
    factor_bytes,
    factorize,
    matvec,
    memory_model,
    run_footprint,
    solve,
)
from qr_wave.exceptions import DimensionMismatch, PivotBreakdown

GB = 10**9


def dense_llt(dense: np.ndarray) -> np.ndarray:
    """Textbook column LL^T of a complex symmetric matrix, for comparison"""
    n = dense.shape[0]
    lower = np.zeros_like(dense)
    for j in range(n):
        lower[j, j] = np.sqrt(dense[j, j] - np.sum(lower[j, :j] ** 2))
        for i in range(j + 1, n):
            lower[i, j] = (dense[i, j] - np.sum(lower[i, :j] * lower[j, :j])) / lower[j, j]
    return lower


class TestBandedMatrix:
    """TestBandedMatrix

    Test band storage
    """

    def test_dense_round_trip(self, random_band):
        """test_dense_round_trip
        Should expand to a symmetric matrix and recover the same band
        """
        band = random_band(order=12, half_bandwidth=3)
        dense = band.to_dense()
        assert np.array_equal(dense, dense.T)
        again = BandedMatrix.from_dense(dense, 3)
        assert np.array_equal(again.data, band.data)

    def test_storage_size(self):
        """test_storage_size
        Should hold (b + 1) n complex entries
        """
        band = BandedMatrix.identity(100, half_bandwidth=7)
        assert band.nbytes() == 8 * 100 * 16
        assert 'order=100' in describe(band)

    def test_rejects_padding(self):
        """test_rejects_padding
        Should refuse non-zero entries outside the matrix
        """
        data = np.zeros((2, 4), dtype=complex)
        data[0] = 1.0
        data[1, 3] = 1.0
        with pytest.raises(DimensionMismatch):
            BandedMatrix(data)

    def test_rejects_wide_band(self):
        """test_rejects_wide_band
        Should refuse a half-bandwidth beyond the order
        """
        with pytest.raises(DimensionMismatch):
            BandedMatrix(np.ones((5, 3), dtype=complex))

    def test_matvec(self, random_band, rng):
        """test_matvec
        Should agree with the dense product
        """
        band = random_band()
        vec = rng.normal(size=band.order) + 1j * rng.normal(size=band.order)
        np.testing.assert_allclose(matvec(band, vec), band.to_dense() @ vec, rtol=1e-12)

    def test_bilinear_symmetry(self, random_band, rng):
        """test_bilinear_symmetry
        Should satisfy u^T (A v) = v^T (A u) without conjugation
        """
        band = random_band()
        u = rng.normal(size=band.order) + 1j * rng.normal(size=band.order)
        v = rng.normal(size=band.order) + 1j * rng.normal(size=band.order)
        assert np.dot(u, matvec(band, v)) == pytest.approx(np.dot(v, matvec(band, u)))

    def test_matvec_length(self, random_band):
        """test_matvec_length
        Should raise DimensionMismatch for a vector of the wrong length
        """
        with pytest.raises(DimensionMismatch):
            matvec(random_band(order=10), np.ones(11))


class TestFactorize:
    """TestFactorize

    Test the factorization itself
    """

    def test_identity(self):
        """test_identity
        Should factor the identity into itself
        """
        factor = factorize(BandedMatrix.identity(16, half_bandwidth=4))
        np.testing.assert_allclose(factor.to_dense(), np.eye(16))

    def test_imaginary_diagonal(self):
        """test_imaginary_diagonal
        Should take principal square roots of a purely imaginary diagonal
        """
        data = np.array([[1j, 1j]], dtype=complex)
        factor = factorize(BandedMatrix(data))
        root = np.sqrt(1j)
        np.testing.assert_allclose(np.diag(factor.to_dense()), [root, root])
        assert factor.data[0, 0].real > 0

    def test_reconstructs(self, random_band):
        """test_reconstructs
        Should give L L^T = A
        """
        band = random_band(order=60, half_bandwidth=6)
        lower = factorize(band).to_dense()
        dense = band.to_dense()
        np.testing.assert_allclose(lower @ lower.T, dense, atol=1e-12 * np.abs(dense).max())

    def test_matches_dense(self, random_band):
        """test_matches_dense
        Should agree with the dense column algorithm
        """
        band = random_band(order=25, half_bandwidth=3)
        lower = factorize(band).to_dense()
        np.testing.assert_allclose(lower, dense_llt(band.to_dense()), rtol=1e-10, atol=1e-12)

    def test_band_preserved(self, random_band):
        """test_band_preserved
        Should leave L zero beyond the half-bandwidth
        """
        band = random_band(order=30, half_bandwidth=2)
        lower = factorize(band).to_dense()
        assert np.count_nonzero(np.tril(lower, -3)) == 0
        assert np.count_nonzero(np.triu(lower, 1)) == 0

    def test_breakdown(self):
        """test_breakdown
        Should raise PivotBreakdown at the row of a vanishing pivot
        """
        data = np.zeros((2, 3), dtype=complex)
        data[0] = [1.0, 1.0, 1.0]
        data[1, :2] = [1.0, 0.5]
        with pytest.raises(PivotBreakdown) as err:
            factorize(BandedMatrix(data))
        assert err.value.row == 1

    def test_input_untouched(self, random_band):
        """test_input_untouched
        Should not modify the matrix it factors
        """
        band = random_band()
        before = band.data.copy()
        factorize(band)
        assert np.array_equal(band.data, before)


class TestSolve:
    """TestSolve

    Test forward and backward substitution
    """

    def test_against_scipy(self, random_band, rng):
        """test_against_scipy
        Should match a dense LU solve to 1e-10
        """
        band = random_band(order=80, half_bandwidth=5)
        rhs = rng.normal(size=band.order) + 1j * rng.normal(size=band.order)
        expected = linalg.solve(band.to_dense(), rhs)
        got = solve(factorize(band), rhs)
        np.testing.assert_allclose(got, expected, rtol=1e-10, atol=1e-12)

    def test_residual(self, random_band, rng):
        """test_residual
        Should leave a residual near machine precision
        """
        band = random_band(order=200, half_bandwidth=9)
        rhs = rng.normal(size=band.order) + 1j * rng.normal(size=band.order)
        x = solve(factorize(band), rhs)
        residual = np.linalg.norm(matvec(band, x) - rhs) / np.linalg.norm(rhs)
        assert residual < 1e-12

    def test_zero_rhs(self, random_band):
        """test_zero_rhs
        Should return exactly zero for a zero right-hand side
        """
        band = random_band()
        x = solve(factorize(band), np.zeros(band.order, dtype=complex))
        assert not np.any(x)

    def test_linearity(self, random_band, rng):
        """test_linearity
        Should be linear in the right-hand side
        """
        band = random_band()
        factor = factorize(band)
        b1 = rng.normal(size=band.order) + 0j
        b2 = 1j * rng.normal(size=band.order)
        alpha, beta = 0.7 - 0.2j, -1.3j
        combined = solve(factor, alpha * b1 + beta * b2)
        separate = alpha * solve(factor, b1) + beta * solve(factor, b2)
        np.testing.assert_allclose(combined, separate, rtol=1e-12, atol=1e-13)

    def test_rhs_untouched(self, random_band, rng):
        """test_rhs_untouched
        Should not overwrite the caller's right-hand side
        """
        band = random_band()
        rhs = rng.normal(size=band.order) + 0j
        before = rhs.copy()
        solve(factorize(band), rhs)
        assert np.array_equal(rhs, before)

    def test_length_mismatch(self, random_band):
        """test_length_mismatch
        Should raise DimensionMismatch for a right-hand side of the wrong length
        """
        with pytest.raises(DimensionMismatch):
            solve(factorize(random_band(order=10)), np.ones(9))


class TestMemoryModel:
    """TestMemoryModel

    Test the predicted footprint
    """

    @pytest.mark.parametrize(
        'n_x, n_y, table_gb',
        [(2**14, 2**5, 0.4), (2**15, 2**7, 9.0), (2**16, 2**8, 69.0)],
    )
    def test_reference_table(self, n_x, n_y, table_gb):
        """test_reference_table
        Should land within a factor 1.3 of the reference footprints
        """
        predicted = memory_model(n_x, n_y)
        assert table_gb * GB / 1.3 <= predicted <= table_gb * GB * 1.3

    def test_linear_in_n_x(self):
        """test_linear_in_n_x
        Should double when n_x doubles
        """
        assert memory_model(2**15, 2**6) == 2 * memory_model(2**14, 2**6)

    def test_factor_bytes(self):
        """test_factor_bytes
        Should count 16 n_x n_y (n_y + 1) bytes for the factor
        """
        assert factor_bytes(8, 4) == 16 * 8 * 4 * 5
        assert run_footprint(8, 4) == memory_model(8, 4) + 2 * factor_bytes(8, 4)

    def test_rejects_empty(self):
        """test_rejects_empty
        Should refuse a non-positive grid count
        """
        with pytest.raises(ValueError):
            memory_model(0, 4)
