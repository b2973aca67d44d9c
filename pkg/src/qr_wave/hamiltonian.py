"""Discrete Hamiltonian and the Cayley (Crank-Nicolson) system"""

import logging
from dataclasses import dataclass
from time import perf_counter
import numpy as np
from .banded import BandedFactor, BandedMatrix, describe, factorize
from .exceptions import GridMismatch
from .grid import GridGeometry
from .potential import PotentialField

logger = logging.getLogger(__name__)


def kinetic_couplings(grid: GridGeometry, mass: float, hbar: float) -> tuple:
    """``(c_x, c_y)``: the off-diagonal three-point couplings along x and y"""
    c_x = -(hbar**2) / (2.0 * mass * grid.dx**2)
    c_y = -(hbar**2) / (2.0 * mass * grid.dy**2)
    return c_x, c_y


def assemble_h(
    grid: GridGeometry, pot: PotentialField, mass: float, hbar: float
) -> BandedMatrix:
    """
    Assemble the real symmetric Hamiltonian with three-point stencils.

    With x-major ordering the band is ``n_y`` wide: y-neighbours couple at
    offset 1, the periodic wrap of each x-block at offset ``n_y - 1`` and
    x-neighbours at offset ``n_y``. Rows at both x-ends are truncated
    (Dirichlet).

    :param grid: Grid geometry
    :param pot: Potential sampled on ``grid``
    :param mass: Particle mass
    :param hbar: Reduced Planck constant
    """
    if not grid.same_as(pot.geometry) or pot.values.shape != grid.shape:
        msg = (
            f'Potential sampled on a {pot.values.shape} grid, Hamiltonian requested '
            f'on {grid.shape}'
        )
        logger.error(msg)
        raise GridMismatch(msg)
    if grid.n_y < 3:
        msg = f'Periodic y stencil needs n_y >= 3, got {grid.n_y}'
        logger.error(msg)
        raise GridMismatch(msg)
    n_y = grid.n_y
    n = grid.size
    c_x, c_y = kinetic_couplings(grid, mass, hbar)
    data = np.zeros((n_y + 1, n), dtype=np.complex128)
    data[0] = -2.0 * (c_x + c_y) + pot.flat()
    i_y = np.arange(n) % n_y
    data[1, : n - 1] = np.where(i_y[: n - 1] == n_y - 1, 0.0, c_y)
    # periodic wrap: (i_x, n_y - 1) <-> (i_x, 0), inside the band
    data[n_y - 1, : n - n_y + 1] = np.where(i_y[: n - n_y + 1] == 0, c_y, 0.0)
    data[n_y, : n - n_y] = c_x
    h = BandedMatrix(data)
    logger.debug('Assembled %s', describe(h))
    return h


@dataclass(frozen=True)
class CayleySystem:
    """Both sides of ``(1 + i dt H / 2 hbar) psi' = (1 - i dt H / 2 hbar) psi``"""

    a_plus: BandedMatrix
    a_minus: BandedMatrix
    #: LL^T factor of :py:attr:`a_plus`, computed once
    factor: BandedFactor
    dt: float
    #: Wall-clock seconds spent in the factorization
    factor_seconds: float = 0.0


def build_cayley(h: BandedMatrix, dt: float, hbar: float) -> CayleySystem:
    """
    Form ``a_plus`` and ``a_minus`` from ``h`` and factorize ``a_plus``.

    Also the rebuild hook when ``dt`` changes (a negative ``dt`` gives the
    time-reversed map).

    :param h: Hamiltonian band
    :param dt: Time step
    :param hbar: Reduced Planck constant
    """
    alpha = 0.5j * dt / hbar
    plus = alpha * h.data
    plus[0] += 1.0
    minus = -alpha * h.data
    minus[0] += 1.0
    a_plus = BandedMatrix(plus)
    start = perf_counter()
    factor = factorize(a_plus)
    elapsed = perf_counter() - start
    logger.info('Factorized %s in %.3f s', describe(a_plus), elapsed)
    return CayleySystem(
        a_plus=a_plus,
        a_minus=BandedMatrix(minus),
        factor=factor,
        dt=dt,
        factor_seconds=elapsed,
    )
