"""
Complex symmetric banded matrices and their LL^T factorization.

Storage follows the LAPACK lower-banded layout used by
:py:func:`scipy.linalg.solveh_banded` with ``lower=True``: a matrix of order
``n`` with half-bandwidth ``b`` is held as a ``(b + 1, n)`` array ``data`` with

``data[d, j] = A[j + d, j]``  for ``0 <= d <= b``, ``0 <= j < n - d``

The trailing ``d`` entries of row ``d`` lie outside the matrix and are kept at
zero. Symmetry here is plain ``A = A^T`` (no conjugation): the Cayley matrices
``1 +- i dt H / (2 hbar)`` are complex symmetric, not Hermitian.
"""

import typing as t
import cmath
import logging
from dataclasses import dataclass
import numpy as np
from numba import njit  # type: ignore
from .exceptions import DimensionMismatch, PivotBreakdown, SolverFailure

logger = logging.getLogger(__name__)

#: Pivots smaller than this times ``max |A|`` count as a breakdown
BREAKDOWN_TOLERANCE = 1.0e-13
#: Bytes per complex128 entry
COMPLEX_BYTES = 16
#: Full-length complex work vectors a run keeps besides the factor
WORKSPACE_VECTORS = 8


@njit(cache=True)
def _factorize_kernel(data, tol):  # pragma: no cover
    """
    Right-looking LL^T factorization in place. Returns 0 on success, otherwise
    the (one-based) row at which the pivot collapsed.
    """
    bw = data.shape[0] - 1
    n = data.shape[1]
    for j in range(n):
        piv = data[0, j]
        if abs(piv) <= tol:
            return j + 1
        ljj = cmath.sqrt(piv)
        data[0, j] = ljj
        m = min(bw, n - 1 - j)
        for k in range(1, m + 1):
            data[k, j] /= ljj
        for k in range(1, m + 1):
            lkj = data[k, j]
            if lkj.real == 0.0 and lkj.imag == 0.0:
                continue
            for d2 in range(m - k + 1):
                data[d2, j + k] -= data[k + d2, j] * lkj
    return 0


@njit(cache=True)
def _solve_kernel(data, x):  # pragma: no cover
    """Forward then backward substitution with L and L^T, in place on ``x``"""
    bw = data.shape[0] - 1
    n = data.shape[1]
    for j in range(n):
        x[j] /= data[0, j]
        xj = x[j]
        m = min(bw, n - 1 - j)
        for d in range(1, m + 1):
            x[j + d] -= data[d, j] * xj
    for j in range(n - 1, -1, -1):
        acc = x[j]
        m = min(bw, n - 1 - j)
        for d in range(1, m + 1):
            acc -= data[d, j] * x[j + d]
        x[j] = acc / data[0, j]


@dataclass(frozen=True)
class BandedMatrix:
    """A complex symmetric matrix stored as its lower band"""

    #: Diagonals, shape ``(half_bandwidth + 1, order)``
    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.ascontiguousarray(self.data, dtype=np.complex128)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            msg = f'Band storage must be a non-empty 2-D array, got shape {data.shape}'
            logger.error(msg)
            raise DimensionMismatch(msg)
        if data.shape[0] > data.shape[1]:
            msg = (
                f'Half-bandwidth {data.shape[0] - 1} exceeds the matrix order '
                f'{data.shape[1]}'
            )
            logger.error(msg)
            raise DimensionMismatch(msg)
        if not np.all(np.isfinite(data)):
            msg = 'Band storage holds non-finite entries'
            logger.error(msg)
            raise ValueError(msg)
        for d in range(1, data.shape[0]):
            if np.any(data[d, data.shape[1] - d :]):
                msg = f'Padding of diagonal {d} must be zero'
                logger.error(msg)
                raise DimensionMismatch(msg)
        object.__setattr__(self, 'data', data)

    @property
    def order(self) -> int:
        """Matrix order n"""
        return self.data.shape[1]

    @property
    def half_bandwidth(self) -> int:
        """Half-bandwidth b"""
        return self.data.shape[0] - 1

    @classmethod
    def identity(cls, order: int, half_bandwidth: int = 0) -> 'BandedMatrix':
        """Identity of the given order, stored with the given band"""
        data = np.zeros((half_bandwidth + 1, order), dtype=np.complex128)
        data[0] = 1.0
        return cls(data)

    @classmethod
    def from_dense(cls, dense: np.ndarray, half_bandwidth: int) -> 'BandedMatrix':
        """Copy the lower band of a dense symmetric matrix"""
        dense = np.asarray(dense)
        n = dense.shape[0]
        if dense.shape != (n, n):
            msg = f'Expected a square matrix, got shape {dense.shape}'
            logger.error(msg)
            raise DimensionMismatch(msg)
        data = np.zeros((half_bandwidth + 1, n), dtype=np.complex128)
        for d in range(half_bandwidth + 1):
            data[d, : n - d] = np.diagonal(dense, offset=-d)
        return cls(data)

    def to_dense(self) -> np.ndarray:
        """Expand to a full symmetric dense matrix"""
        n = self.order
        dense = np.zeros((n, n), dtype=np.complex128)
        for d in range(self.half_bandwidth + 1):
            diag = self.data[d, : n - d]
            idx = np.arange(n - d)
            dense[idx + d, idx] = diag
            dense[idx, idx + d] = diag
        return dense

    def nbytes(self) -> int:
        """Bytes held by the band storage"""
        return int(self.data.nbytes)


@dataclass(frozen=True)
class BandedFactor:
    """Lower-triangular L with ``A = L L^T``, stored in the band of A"""

    #: Columns of L by diagonal, same layout as :py:class:`BandedMatrix`
    data: np.ndarray

    @property
    def order(self) -> int:
        """Matrix order n"""
        return self.data.shape[1]

    @property
    def half_bandwidth(self) -> int:
        """Half-bandwidth b"""
        return self.data.shape[0] - 1

    def to_dense(self) -> np.ndarray:
        """Expand L to a dense lower-triangular matrix"""
        n = self.order
        dense = np.zeros((n, n), dtype=np.complex128)
        for d in range(self.half_bandwidth + 1):
            idx = np.arange(n - d)
            dense[idx + d, idx] = self.data[d, : n - d]
        return dense


def factorize(a: BandedMatrix) -> BandedFactor:
    """
    Compute ``L`` with ``A = L L^T`` (plain transpose), without pivoting.

    The band is preserved: L has no entries farther than ``b`` below the
    diagonal. Square roots are principal.

    Raises :py:exc:`~.qr_wave.exceptions.PivotBreakdown` when a pivot falls to
    ``1e-13 * max|A|`` or below.

    :param a: Complex symmetric banded matrix
    """
    data = a.data.copy()
    tol = BREAKDOWN_TOLERANCE * float(np.max(np.abs(a.data)))
    status = _factorize_kernel(data, tol)
    if status:
        row = int(status) - 1
        msg = f'LL^T factorization broke down at row {row} (tolerance {tol:.3e})'
        logger.error(msg)
        raise PivotBreakdown(row, complex(data[0, row]))
    data.setflags(write=False)
    return BandedFactor(data)


def _check_length(order: int, vec: np.ndarray, what: str) -> None:
    if vec.ndim != 1 or vec.shape[0] != order:
        msg = f'{what} of shape {vec.shape} does not match matrix order {order}'
        logger.error(msg)
        raise DimensionMismatch(msg)


def solve(factor: BandedFactor, rhs: np.ndarray) -> np.ndarray:
    """
    Solve ``L L^T x = rhs`` by forward and backward substitution.

    :param factor: Output of :py:func:`factorize`
    :param rhs: Right-hand side of length n
    """
    vec = np.array(rhs, dtype=np.complex128, copy=True)
    _check_length(factor.order, vec, 'Right-hand side')
    _solve_kernel(factor.data, vec)
    if not np.all(np.isfinite(vec)):
        msg = 'Banded substitution produced non-finite values'
        logger.error(msg)
        raise SolverFailure(msg)
    return vec


def matvec(a: BandedMatrix, v: np.ndarray) -> np.ndarray:
    """
    ``A v`` from the stored lower band and symmetry.

    :param a: Complex symmetric banded matrix
    :param v: Vector of length n
    """
    v = np.asarray(v)
    _check_length(a.order, v, 'Vector')
    n = a.order
    out = a.data[0] * v
    for d in range(1, a.half_bandwidth + 1):
        diag = a.data[d, : n - d]
        out[d:] += diag * v[: n - d]
        out[: n - d] += diag * v[d:]
    return out


def factor_bytes(n_x: int, n_y: int) -> int:
    """Storage of the band factor alone: ``16 n_x n_y (n_y + 1)`` bytes"""
    return COMPLEX_BYTES * n_x * n_y * (n_y + 1)


def memory_model(n_x: int, n_y: int) -> int:
    """
    Predicted bytes for one propagation: the band factor plus
    ``WORKSPACE_VECTORS`` complex work vectors of length ``n_x n_y`` (field,
    right-hand side, potential, FFT buffers). Linear in ``n_x``.

    :param n_x: Grid points along x
    :param n_y: Grid points along y (the half-bandwidth)
    """
    if n_x <= 0 or n_y <= 0:
        msg = f'Grid counts must be positive, got n_x={n_x}, n_y={n_y}'
        logger.error(msg)
        raise ValueError(msg)
    return factor_bytes(n_x, n_y) + COMPLEX_BYTES * WORKSPACE_VECTORS * n_x * n_y


def run_footprint(n_x: int, n_y: int) -> int:
    """:py:func:`memory_model` plus the two Cayley bands held next to the factor"""
    return memory_model(n_x, n_y) + 2 * factor_bytes(n_x, n_y)


def describe(a: t.Union[BandedMatrix, BandedFactor]) -> str:
    """One-line summary for log messages"""
    return (
        f'{type(a).__name__}(order={a.order}, half_bandwidth={a.half_bandwidth}, '
        f'{a.data.nbytes} bytes)'
    )
