"""Grid geometry, wave fields and the initial Gaussian packet"""

import typing as t
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
import numpy as np
from .exceptions import GridMismatch, InvalidConfig, PacketOutsideGrid
from .units import LENGTH, TIME, UnitSystem

if t.TYPE_CHECKING:
    from .config import InternalParams, ValidatedConfig

logger = logging.getLogger(__name__)

SNAPSHOT_MAGIC = b'QRWS'
SNAPSHOT_HEADER = np.dtype(
    [
        ('magic', 'S4'),
        ('n_x', '<i8'),
        ('n_y', '<i8'),
        ('dx', '<f8'),
        ('dy', '<f8'),
        ('time', '<f8'),
        ('x_min', '<f8'),
    ]
)


@dataclass(frozen=True)
class GridGeometry:
    """
    Uniform grid on ``[x_min, x_max) x [0, L)`` with periodic y.

    Points are flattened x-major: ``k = i_x * n_y + i_y``. y-neighbours sit at
    offset 1 (wrapping inside each x-block), x-neighbours at offset ``n_y``.
    """

    n_x: int
    n_y: int
    dx: float
    dy: float
    x_min: float
    #: Extent of the periodic y direction
    L: float  # pylint: disable=C0103

    @property
    def size(self) -> int:
        """Total number of grid points"""
        return self.n_x * self.n_y

    @property
    def shape(self) -> t.Tuple[int, int]:
        """``(n_x, n_y)``"""
        return (self.n_x, self.n_y)

    @property
    def x_max(self) -> float:
        """Upper x-edge (exclusive)"""
        return self.x_min + self.n_x * self.dx

    @cached_property
    def x(self) -> np.ndarray:
        """x coordinate of each grid column"""
        return self.x_min + self.dx * np.arange(self.n_x)

    @cached_property
    def y(self) -> np.ndarray:
        """y coordinate of each grid row"""
        return self.dy * np.arange(self.n_y)

    def index(self, i_x: t.Any, i_y: t.Any) -> t.Any:
        """Flattened x-major index of ``(i_x, i_y)``"""
        return np.asarray(i_x) * self.n_y + np.asarray(i_y) % self.n_y

    def unravel(self, k: t.Any) -> t.Tuple[t.Any, t.Any]:
        """Inverse of :py:meth:`index`"""
        return np.divmod(k, self.n_y)

    def same_as(self, other: 'GridGeometry', rtol: float = 1e-12) -> bool:
        """True if both geometries describe the same sample points"""
        if self.shape != other.shape:
            return False
        pairs = ((self.dx, other.dx), (self.dy, other.dy), (self.x_min, other.x_min))
        return all(np.isclose(a, b, rtol=rtol, atol=0.0) for a, b in pairs)


@dataclass
class WaveField:
    """Complex amplitudes on the grid, flattened x-major"""

    amplitudes: np.ndarray
    geometry: GridGeometry
    #: Elapsed propagation time
    time: float = 0.0

    def __post_init__(self) -> None:
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape == self.geometry.shape:
            self.amplitudes = self.amplitudes.reshape(-1)
        if self.amplitudes.shape != (self.geometry.size,):
            msg = (
                f'Amplitude array of shape {self.amplitudes.shape} does not fit a '
                f'{self.geometry.n_x}x{self.geometry.n_y} grid'
            )
            logger.error(msg)
            raise GridMismatch(msg)

    @property
    def psi(self) -> np.ndarray:
        """
        :getter: Returns a ``(n_x, n_y)`` view of the amplitudes
        :type: numpy.ndarray
        """
        return self.amplitudes.reshape(self.geometry.shape)

    def density(self) -> np.ndarray:
        """``|psi|^2`` as an ``(n_x, n_y)`` array"""
        return np.abs(self.psi) ** 2

    def norm(self) -> float:
        """Discrete norm ``sum |psi|^2 dx dy``"""
        return float(np.vdot(self.amplitudes, self.amplitudes).real) * (
            self.geometry.dx * self.geometry.dy
        )

    def copy(self) -> 'WaveField':
        """Independent copy sharing the (immutable) geometry"""
        return WaveField(self.amplitudes.copy(), self.geometry, self.time)


@dataclass(frozen=True)
class PacketSpec:
    """Centre, widths and mean velocity of a Gaussian wave packet"""

    x0: float
    y0: float
    sigma_x: float
    sigma_y: float
    v_x0: float = 0.0
    v_y0: float = 0.0

    def __post_init__(self) -> None:
        for name in ('sigma_x', 'sigma_y'):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                msg = f'Packet width {name} must be positive, got {value}'
                logger.error(msg)
                raise InvalidConfig(name, msg)

    @classmethod
    def from_params(cls, params: 'InternalParams') -> 'PacketSpec':
        """Build the packet described by a run configuration"""
        return cls(
            x0=params.x0,
            y0=params.y0,
            sigma_x=params.sigma_x,
            sigma_y=params.sigma_y,
            v_x0=params.v_x0,
            v_y0=params.v_y0,
        )


def make_grid(config: 'ValidatedConfig') -> GridGeometry:
    """
    Build the internal-unit grid of a validated configuration.

    :param config: A validated run configuration
    """
    params = config.internal
    return GridGeometry(
        n_x=params.n_x,
        n_y=params.n_y,
        dx=params.dx,
        dy=params.dy,
        x_min=params.x_min,
        L=params.L,
    )


def periodic_displacement(y: np.ndarray, y0: float, period: float) -> np.ndarray:
    """Minimal-image displacement of ``y`` from ``y0`` on a circle of ``period``"""
    return np.mod(y - y0 + 0.5 * period, period) - 0.5 * period


def init_gaussian(
    grid: GridGeometry, spec: PacketSpec, mass: float, hbar: float
) -> WaveField:
    """
    Build the normalized initial packet

    ``psi(x, y) ~ exp(-(x-x0)^2/(4 sigma_x^2)) g(y) exp(i (p_x x + p_y y)/hbar)``

    where ``g`` is the Gaussian in y restricted to the single period centred on
    ``y0``, without summing periodic images. The discrete norm is exactly 1.

    :param grid: Target grid
    :param spec: Packet centre, widths and velocity
    :param mass: Particle mass
    :param hbar: Reduced Planck constant in the same unit system
    """
    if not grid.x_min <= spec.x0 < grid.x_max:
        msg = f'Packet centre x0={spec.x0} outside [{grid.x_min}, {grid.x_max})'
        logger.error(msg)
        raise PacketOutsideGrid(msg)
    p_x = mass * spec.v_x0
    p_y = mass * spec.v_y0
    x = grid.x
    y = grid.y
    g_x = np.exp(-((x - spec.x0) ** 2) / (4.0 * spec.sigma_x**2) + 1j * p_x * x / hbar)
    disp = periodic_displacement(y, spec.y0, grid.L)
    g_y = np.exp(-(disp**2) / (4.0 * spec.sigma_y**2) + 1j * p_y * y / hbar)
    wave = WaveField(np.outer(g_x, g_y).reshape(-1), grid)
    norm = wave.norm()
    if not norm > 0:
        msg = 'Initial packet has zero weight on the grid'
        logger.error(msg)
        raise PacketOutsideGrid(msg)
    wave.amplitudes /= np.sqrt(norm)
    logger.debug(
        'Initial packet: x0=%s sigma_x=%s sigma_y=%s p_x=%s', spec.x0, spec.sigma_x,
        spec.sigma_y, p_x
    )
    return wave


def write_snapshot(
    wave: WaveField, path: t.Union[str, Path], units: t.Optional[UnitSystem] = None
) -> Path:
    """
    Dump a field as a little-endian binary snapshot.

    Layout: a fixed header (magic, n_x, n_y, dx, dy, time, x_min; lengths and
    time in SI) followed by ``n_x * n_y`` complex64 amplitudes in x-major order,
    in SI (1/m).

    :param wave: Field in internal units
    :param path: Output file
    :param units: Unit system the field is expressed in
    """
    units = units or UnitSystem()
    geo = wave.geometry
    header = np.zeros(1, dtype=SNAPSHOT_HEADER)
    header['magic'] = SNAPSHOT_MAGIC
    header['n_x'] = geo.n_x
    header['n_y'] = geo.n_y
    header['dx'] = units.to_si(geo.dx, LENGTH)
    header['dy'] = units.to_si(geo.dy, LENGTH)
    header['time'] = units.to_si(wave.time, TIME)
    header['x_min'] = units.to_si(geo.x_min, LENGTH)
    # |psi|^2 dx dy is dimensionless, so psi scales as 1/length
    amps = (wave.amplitudes / units.length_unit).astype('<c8')
    path = Path(path)
    with path.open('wb') as fh:
        fh.write(header.tobytes())
        fh.write(amps.tobytes())
    logger.debug('Wrote snapshot %s at t=%s', path, wave.time)
    return path


def read_snapshot(
    path: t.Union[str, Path], units: t.Optional[UnitSystem] = None
) -> WaveField:
    """
    Load a snapshot written by :py:func:`write_snapshot` into internal units.

    :param path: Snapshot file
    :param units: Unit system to express the field in
    """
    units = units or UnitSystem()
    raw = Path(path).read_bytes()
    size = SNAPSHOT_HEADER.itemsize
    header = np.frombuffer(raw[:size], dtype=SNAPSHOT_HEADER)
    if len(header) != 1 or header['magic'][0] != SNAPSHOT_MAGIC:
        msg = f'{path} is not a wave-field snapshot'
        logger.error(msg)
        raise GridMismatch(msg)
    n_x, n_y = int(header['n_x'][0]), int(header['n_y'][0])
    dy = units.to_internal(float(header['dy'][0]), LENGTH)
    geo = GridGeometry(
        n_x=n_x,
        n_y=n_y,
        dx=units.to_internal(float(header['dx'][0]), LENGTH),
        dy=dy,
        x_min=units.to_internal(float(header['x_min'][0]), LENGTH),
        L=dy * n_y,
    )
    amps = np.frombuffer(raw[size:], dtype='<c8').astype(np.complex128)
    return WaveField(
        amps * units.length_unit,
        geo,
        time=units.to_internal(float(header['time'][0]), TIME),
    )
