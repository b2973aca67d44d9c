"""
Stationary 1D scattering off the cutoff potential, by Numerov integration.

The wave is started as a pure transmitted wave ``exp(-i k_in x)`` in the flat
floor below the surface, integrated outward through the potential and
decomposed into incoming and reflected waves where the tail is negligible.
"""

import typing as t
import logging
import math
from dataclasses import dataclass
import numpy as np
from numba import njit  # type: ignore
from .exceptions import InvalidConfig, NoConvergence
from .potential import potential_of_r

if t.TYPE_CHECKING:
    from .config import InternalParams

logger = logging.getLogger(__name__)

# pylint: disable=R0913,R0914

#: Tail level, relative to the energy, beyond which the potential is dropped
TAIL_LEVEL = 1.0e-7
#: Largest allowed change of R under refinement
CONVERGENCE_LIMIT = 1.0e-6
#: Steps per cutoff length and per inner wavelength
STEPS_PER_SCALE = 50


class Potential1DLike(t.Protocol):
    """What the Numerov solver needs from a potential"""

    #: Constant value below :py:attr:`inner_edge`
    floor: float
    #: Position below which the potential equals :py:attr:`floor`
    inner_edge: float
    #: Length on which the potential varies
    length_scale: float

    def __call__(self, x: np.ndarray) -> np.ndarray: ...  # pragma: no cover

    def negligible_beyond(self, level: float) -> float:
        """Position beyond which ``|V| <= level``"""
        ...  # pragma: no cover


@dataclass(frozen=True)
class Potential1D:
    """The flat-surface cutoff potential along x, with the surface at ``r0``"""

    c3: float
    delta: float
    r0: float = 0.0

    def __post_init__(self) -> None:
        if not (self.c3 > 0 and self.delta > 0):
            msg = f'Need c3 > 0 and delta > 0, got c3={self.c3}, delta={self.delta}'
            logger.error(msg)
            raise InvalidConfig('delta' if self.c3 > 0 else 'c3', msg)

    @classmethod
    def from_params(cls, params: 'InternalParams') -> 'Potential1D':
        """The flat-surface potential of a run"""
        return cls(c3=params.c3, delta=params.delta)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return potential_of_r(np.asarray(x) - self.r0, self.c3, self.delta)

    @property
    def floor(self) -> float:
        """``-5 c3 / (2 delta^3)``"""
        return -2.5 * self.c3 / self.delta**3

    @property
    def inner_edge(self) -> float:
        """The surface position"""
        return self.r0

    @property
    def length_scale(self) -> float:
        """The cutoff length"""
        return self.delta

    def negligible_beyond(self, level: float) -> float:
        """Position where ``c3 / r^3`` falls to ``level``"""
        return self.r0 + max(self.delta, (self.c3 / level) ** (1.0 / 3.0))


@dataclass(frozen=True)
class ScatteringResult:
    """Outcome of one stationary scattering calculation"""

    #: ``|r|^2``
    reflection: float
    #: Transmitted flux over incident flux
    transmission: float
    #: ``|R + T - 1|``
    flux_error: float
    #: Integration step
    step: float
    #: Matching position
    x_match: float


@njit(cache=True)
def _numerov_kernel(g, h, psi0, psi1):  # pragma: no cover
    """Three-term Numerov recursion for ``psi'' = -g psi`` from two start values"""
    n = g.shape[0]
    psi = np.empty(n, dtype=np.complex128)
    psi[0] = psi0
    psi[1] = psi1
    f = 1.0 + h * h * g / 12.0
    for i in range(1, n - 1):
        psi[i + 1] = ((12.0 - 10.0 * f[i]) * psi[i] - f[i - 1] * psi[i - 1]) / f[i + 1]
    return psi


def discrete_wavenumber(g: float, h: float) -> float:
    """Wavenumber of the exact plane-wave solution of the Numerov recursion"""
    return math.acos((1.0 - 5.0 * h * h * g / 12.0) / (1.0 + h * h * g / 12.0)) / h


def default_step(pot: Potential1DLike, k_in: float) -> float:
    """Largest step with 50 points per length scale and per inner wavelength"""
    return min(
        pot.length_scale / STEPS_PER_SCALE, 2.0 * math.pi / (STEPS_PER_SCALE * k_in)
    )


def default_match(pot: Potential1DLike, energy: float) -> float:
    """Matching point where ``|V| / E`` has dropped below :py:data:`TAIL_LEVEL`"""
    return max(
        pot.negligible_beyond(TAIL_LEVEL * energy),
        pot.inner_edge + 20.0 * pot.length_scale,
    )


def scatter_1d(
    pot: Potential1DLike,
    mass: float,
    energy: float,
    hbar: float,
    step: t.Optional[float] = None,
    x_match: t.Optional[float] = None,
) -> ScatteringResult:
    """
    Solve the stationary problem once, at a fixed step and matching point.

    :param pot: Potential, flat below its inner edge and negligible at ``x_match``
    :param mass: Particle mass
    :param energy: Incident kinetic energy (relative to ``V = 0`` far away)
    :param hbar: Reduced Planck constant
    :param step: Integration step (default from :py:func:`default_step`)
    :param x_match: Matching point (default from :py:func:`default_match`)
    """
    if not energy > 0:
        msg = f'Incident energy must be positive, got {energy}'
        logger.error(msg)
        raise InvalidConfig('energy', msg)
    g_in = 2.0 * mass * (energy - pot.floor) / hbar**2
    if not g_in > 0:
        msg = 'Energy must lie above the potential floor'
        logger.error(msg)
        raise InvalidConfig('energy', msg)
    h = step if step is not None else default_step(pot, math.sqrt(g_in))
    x_m = x_match if x_match is not None else default_match(pot, energy)
    start = pot.inner_edge - 2.0 * h
    count = int(math.ceil((x_m - start) / h)) + 2
    x = start + h * np.arange(count)
    g = 2.0 * mass * (energy - pot(x)) / hbar**2
    kappa_in = discrete_wavenumber(g_in, h)
    psi = _numerov_kernel(
        g.astype(np.float64),
        h,
        complex(np.exp(-1j * kappa_in * x[0])),
        complex(np.exp(-1j * kappa_in * x[1])),
    )
    i_m = count - 2
    g_m = float(g[i_m])
    kappa = discrete_wavenumber(g_m, h)
    x_pair = x[i_m : i_m + 2]
    modes = np.column_stack((np.exp(1j * kappa * x_pair), np.exp(-1j * kappa * x_pair)))
    refl_amp, inc_amp = np.linalg.solve(modes, psi[i_m : i_m + 2])
    f_in = 1.0 + h * h * g_in / 12.0
    f_m = 1.0 + h * h * g_m / 12.0
    reflection = float(abs(refl_amp / inc_amp) ** 2)
    transmission = float(
        f_in**2 * math.sin(kappa_in * h) / (f_m**2 * math.sin(kappa * h) * abs(inc_amp) ** 2)
    )
    result = ScatteringResult(
        reflection=reflection,
        transmission=transmission,
        flux_error=abs(reflection + transmission - 1.0),
        step=h,
        x_match=float(x[i_m]),
    )
    logger.debug('Numerov: %s', result)
    return result


def reflectivity_1d(
    pot: Potential1DLike, mass: float, energy: float, hbar: float
) -> float:
    """
    Reflection probability at ``energy``, checked for convergence: doubling
    the matching distance or halving the step must change R by at most
    ``1e-6``, otherwise :py:exc:`~.qr_wave.exceptions.NoConvergence` is raised.
    """
    base = scatter_1d(pot, mass, energy, hbar)
    far = scatter_1d(
        pot,
        mass,
        energy,
        hbar,
        step=base.step,
        x_match=pot.inner_edge + 2.0 * (base.x_match - pot.inner_edge),
    )
    fine = scatter_1d(pot, mass, energy, hbar, step=0.5 * base.step, x_match=base.x_match)
    change = max(
        abs(far.reflection - base.reflection), abs(fine.reflection - base.reflection)
    )
    if change > CONVERGENCE_LIMIT:
        msg = f'Reflectivity changed by {change:.3e} under refinement at E={energy}'
        logger.error(msg)
        raise NoConvergence(msg)
    return fine.reflection


def packet_reflectivity_1d(
    pot: Potential1DLike,
    mass: float,
    speed: float,
    sigma_x: float,
    hbar: float,
    nodes: int = 24,
) -> float:
    """
    Reflection probability of a Gaussian packet: the stationary result averaged
    over the packet's momentum distribution, centred on ``m |speed|`` with width
    ``hbar / (2 sigma_x)``, by Gauss-Hermite quadrature. Convergence is checked
    at the central momentum.

    :param pot: Potential
    :param mass: Particle mass
    :param speed: Mean incident speed
    :param sigma_x: Position-space packet width
    :param hbar: Reduced Planck constant
    :param nodes: Quadrature order
    """
    p0 = mass * abs(speed)
    sigma_p = hbar / (2.0 * sigma_x)
    reflectivity_1d(pot, mass, p0**2 / (2.0 * mass), hbar)
    points, weights = np.polynomial.hermite_e.hermegauss(nodes)
    total = 0.0
    weight_sum = 0.0
    for z, w in zip(points, weights):
        p = p0 + sigma_p * z
        if p <= 0:
            continue
        total += w * scatter_1d(pot, mass, p**2 / (2.0 * mass), hbar).reflection
        weight_sum += w
    return total / weight_sum


def cutoff_sweep(
    c3: float,
    deltas: t.Sequence[float],
    mass: float,
    speed: float,
    hbar: float,
    sigma_x: t.Optional[float] = None,
) -> t.List[t.Tuple[float, float]]:
    """
    ``(delta, R)`` pairs over cutoff lengths, for an atom of speed ``speed``.

    With ``sigma_x`` set, each R is the packet average of
    :py:func:`packet_reflectivity_1d`; otherwise the stationary value at
    ``E = m speed^2 / 2``.
    """
    rows = []
    for delta in deltas:
        pot = Potential1D(c3, delta)
        if sigma_x is None:
            refl = reflectivity_1d(pot, mass, 0.5 * mass * speed**2, hbar)
        else:
            refl = packet_reflectivity_1d(pot, mass, speed, sigma_x, hbar)
        rows.append((float(delta), refl))
        logger.info('delta=%.6g R=%.9g', delta, refl)
    return rows
