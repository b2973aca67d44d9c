"""Corrugated surface potential with a parabolic cutoff"""

import typing as t
import csv
import logging
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
import numpy as np
from .exceptions import GridMismatch, InvalidConfig
from .grid import GridGeometry
from .units import ENERGY, FORCE, LENGTH, UnitSystem

if t.TYPE_CHECKING:
    from .config import InternalParams

logger = logging.getLogger(__name__)

# pylint: disable=C0103


class Region(IntEnum):
    """Piece of the potential a point falls in, by effective distance r"""

    #: ``r >= delta``: the bare -c3/r^3 tail
    FAR = 0
    #: ``0 <= r < delta``: the parabolic continuation
    SHELL = 1
    #: ``r < 0``: the flat floor
    INNER = 2


@dataclass(frozen=True)
class CorrugationParams:
    """Interaction strength, corrugation shape and cutoff length"""

    c3: float
    A: float
    L: float
    phi: float
    delta: float

    def __post_init__(self) -> None:
        checks = (
            ('c3', self.c3 > 0),
            ('A', self.A >= 0),
            ('L', self.L > 0),
            ('delta', self.delta > 0),
        )
        for name, ok in checks:
            if not ok or not np.isfinite(getattr(self, name)):
                msg = f'{name}={getattr(self, name)} is out of range'
                logger.error(msg)
                raise InvalidConfig(name, msg)

    @classmethod
    def from_params(cls, params: 'InternalParams') -> 'CorrugationParams':
        """Extract the potential parameters of a run"""
        return cls(
            c3=params.c3, A=params.A, L=params.L, phi=params.phi, delta=params.delta
        )

    @property
    def floor(self) -> float:
        """Value of the potential for ``r <= 0``: ``-5 c3 / (2 delta^3)``"""
        return -2.5 * self.c3 / self.delta**3


def effective_distance(x: t.Any, y: t.Any, params: CorrugationParams) -> t.Any:
    """``r(x, y) = x - A sin(2 pi y / L + phi)``"""
    return x - params.A * np.sin(2.0 * np.pi * np.asarray(y) / params.L + params.phi)


def potential_of_r(r: t.Any, c3: float, delta: float) -> t.Any:
    """The piecewise potential as a function of effective distance alone"""
    r = np.asarray(r, dtype=float)
    far = -c3 / np.maximum(r, delta) ** 3
    shell = 1.5 * c3 / delta**5 * np.clip(r, 0.0, delta) ** 2 - 2.5 * c3 / delta**3
    value = np.where(r >= delta, far, shell)
    return value if value.ndim else float(value)


def derivative_of_r(r: t.Any, c3: float, delta: float) -> t.Any:
    """``dV/dr`` of :py:func:`potential_of_r`"""
    r = np.asarray(r, dtype=float)
    far = 3.0 * c3 / np.maximum(r, delta) ** 4
    shell = 3.0 * c3 / delta**5 * np.clip(r, 0.0, delta)
    value = np.where(r >= delta, far, shell)
    return value if value.ndim else float(value)


def evaluate(x: t.Any, y: t.Any, params: CorrugationParams) -> t.Any:
    """
    Evaluate the potential at ``(x, y)``:

    * ``-c3 / r^3`` for ``r >= delta``
    * ``3 c3 r^2 / (2 delta^5) - 5 c3 / (2 delta^3)`` for ``0 <= r <= delta``
    * ``-5 c3 / (2 delta^3)`` for ``r <= 0``

    The pieces join with matching value and slope at ``r = delta``, and the
    junction is the equipotential ``r = delta``.
    """
    r = effective_distance(x, y, params)
    return potential_of_r(r, params.c3, params.delta)


def evaluate_derivative(x: t.Any, y: t.Any, params: CorrugationParams) -> t.Any:
    """``dV/dx`` at ``(x, y)``, which equals ``dV/dr``"""
    r = effective_distance(x, y, params)
    return derivative_of_r(r, params.c3, params.delta)


def classify(r: t.Any, delta: float) -> np.ndarray:
    """Map effective distances to :py:class:`Region` codes"""
    r = np.asarray(r, dtype=float)
    region = np.full(r.shape, Region.SHELL, dtype=np.int8)
    region[r >= delta] = Region.FAR
    region[r < 0] = Region.INNER
    return region


@dataclass(frozen=True)
class PotentialField:
    """The potential sampled on a grid, with its region map"""

    #: Potential values, shape ``(n_x, n_y)``
    values: np.ndarray
    #: :py:class:`Region` code per point, shape ``(n_x, n_y)``
    region: np.ndarray
    params: CorrugationParams
    geometry: GridGeometry

    def flat(self) -> np.ndarray:
        """Values flattened x-major, matching wave-field ordering"""
        return self.values.reshape(-1)

    def row(self, j: int) -> t.Tuple[np.ndarray, np.ndarray]:
        """``(x, V)`` along the grid row ``y = y_j``"""
        if not 0 <= j < self.geometry.n_y:
            msg = f'Row {j} outside 0..{self.geometry.n_y - 1}'
            logger.error(msg)
            raise GridMismatch(msg)
        return self.geometry.x, self.values[:, j]


def evaluate_field(grid: GridGeometry, params: CorrugationParams) -> PotentialField:
    """
    Sample the potential on every grid point.

    :param grid: Grid spanning ``[x_min, x_max) x [0, L)``
    :param params: Potential parameters
    """
    if not np.isclose(grid.L, params.L, rtol=1e-12, atol=0.0):
        msg = f'Grid y extent {grid.L} differs from the corrugation period {params.L}'
        logger.error(msg)
        raise GridMismatch(msg)
    xx, yy = np.meshgrid(grid.x, grid.y, indexing='ij')
    r = effective_distance(xx, yy, params)
    values = potential_of_r(r, params.c3, params.delta)
    region = classify(r, params.delta)
    values.setflags(write=False)
    region.setflags(write=False)
    logger.debug(
        'Potential sampled: min=%s, %d shell points, %d inner points',
        values.min(),
        int(np.count_nonzero(region == Region.SHELL)),
        int(np.count_nonzero(region == Region.INNER)),
    )
    return PotentialField(values=values, region=region, params=params, geometry=grid)


def write_row_csv(
    pot: PotentialField,
    path: t.Union[str, Path],
    j: int = 0,
    units: t.Optional[UnitSystem] = None,
) -> Path:
    """
    Write ``x_m, V_J, dVdx_N`` along grid row ``j`` in SI units.

    :param pot: Sampled potential, internal units
    :param path: Output CSV file
    :param j: Grid row index in y
    :param units: Unit system of ``pot``
    """
    units = units or UnitSystem()
    x, values = pot.row(j)
    slope = evaluate_derivative(x, pot.geometry.y[j], pot.params)
    path = Path(path)
    with path.open('w', newline='', encoding='utf-8') as fh:
        writer = csv.writer(fh)
        writer.writerow(['x_m', 'V_J', 'dVdx_N'])
        for xi, vi, di in zip(
            units.to_si(x, LENGTH), units.to_si(values, ENERGY), units.to_si(slope, FORCE)
        ):
            writer.writerow([repr(float(xi)), repr(float(vi)), repr(float(di))])
    return path
