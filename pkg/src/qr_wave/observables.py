"""Momentum analysis, reflectivity, expectation values and stationarity"""

import typing as t
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
import numpy as np
from scipy import fft as sfft  # type: ignore
from scipy.integrate import trapezoid  # type: ignore
from .config import StationarityConfig
from .exceptions import InsufficientSamples, NonPowerOfTwo
from .grid import WaveField, periodic_displacement
from .units import LENGTH, MOMENTUM, TIME, Dimension, UnitSystem

logger = logging.getLogger(__name__)

#: Dimension of a momentum-space density (1 / momentum^2)
MOMENTUM_DENSITY = Dimension(length=-2, time=2, mass=-2)
#: Allowed weight in the p_x = 0 bin of a valid run
ZERO_BIN_LIMIT = 1.0e-6


@dataclass(frozen=True)
class MomentumDensity:
    """``|psi~(p_x, p_y)|^2`` on the DFT momentum grid (FFT ordering)"""

    #: Momentum of each x bin, ``hbar * 2 pi * fftfreq(n_x, dx)``
    p_x: np.ndarray
    p_y: np.ndarray
    #: Shape ``(n_x, n_y)``
    density: np.ndarray
    dp_x: float
    dp_y: float

    def marginal_x(self) -> np.ndarray:
        """Probability per p_x bin"""
        return self.density.sum(axis=1) * self.dp_x * self.dp_y


def momentum_density(wave: WaveField, hbar: float = 1.0) -> MomentumDensity:
    """
    Transform to momentum space with
    ``psi~ = fft2(psi) dx dy / (2 pi hbar)``, for which
    ``sum |psi~|^2 dp_x dp_y = sum |psi|^2 dx dy`` exactly.

    ``hbar = 1`` gives the density over wavenumbers.

    :param wave: Field on a power-of-two grid
    :param hbar: Reduced Planck constant in the units of ``wave``
    """
    geo = wave.geometry
    for name, count in (('n_x', geo.n_x), ('n_y', geo.n_y)):
        if count < 1 or count & (count - 1):
            msg = f'{name}={count} is not a power of two'
            logger.error(msg)
            raise NonPowerOfTwo(msg)
    two_pi_hbar = 2.0 * np.pi * hbar
    spectrum = sfft.fft2(wave.psi) * (geo.dx * geo.dy / two_pi_hbar)
    return MomentumDensity(
        p_x=two_pi_hbar * sfft.fftfreq(geo.n_x, geo.dx),
        p_y=two_pi_hbar * sfft.fftfreq(geo.n_y, geo.dy),
        density=np.abs(spectrum) ** 2,
        dp_x=two_pi_hbar / (geo.n_x * geo.dx),
        dp_y=two_pi_hbar / (geo.n_y * geo.dy),
    )


def momentum_split(wave: WaveField) -> t.Tuple[float, float, float]:
    """
    Split the norm into ``(R, T, zero)``: weight at ``p_x > 0``, at ``p_x < 0``
    and in the ``p_x = 0`` bin. The Nyquist bin counts as negative.
    """
    dens = momentum_density(wave)
    weights = dens.marginal_x()
    positive = dens.p_x > 0
    negative = dens.p_x < 0
    return (
        float(weights[positive].sum()),
        float(weights[negative].sum()),
        float(weights[~(positive | negative)].sum()),
    )


def reflectivity(wave: WaveField) -> float:
    """Total probability carried by strictly positive ``p_x``"""
    return momentum_split(wave)[0]


class Expectations(t.NamedTuple):
    """First and second moments of a field"""

    mean_x: float
    mean_y: float
    mean_px: float
    mean_py: float
    sigma_x: float
    sigma_y: float


def expectations(wave: WaveField, hbar: float = 1.0) -> Expectations:
    """
    Position and momentum moments, normalized by the field norm.

    y is periodic: ``mean_y`` is the circular mean, reported in
    ``(-L/2, L/2]``, and ``sigma_y`` is taken over minimal-image displacements
    from it. For a flat y-profile that gives the discrete uniform value
    ``L / sqrt(12)`` up to ``1/n_y^2``.

    :param wave: The field
    :param hbar: Reduced Planck constant, for the momentum moments
    """
    geo = wave.geometry
    dens = wave.density()
    total = float(dens.sum())
    w_x = dens.sum(axis=1) / total
    w_y = dens.sum(axis=0) / total
    mean_x = float(np.dot(w_x, geo.x))
    sigma_x = float(np.sqrt(max(np.dot(w_x, (geo.x - mean_x) ** 2), 0.0)))
    phase = np.angle(np.dot(w_y, np.exp(2j * np.pi * geo.y / geo.L)))
    mean_y = float(phase * geo.L / (2.0 * np.pi))
    disp = periodic_displacement(geo.y, mean_y, geo.L)
    centre = float(np.dot(w_y, disp))
    sigma_y = float(np.sqrt(max(np.dot(w_y, (disp - centre) ** 2), 0.0)))
    mom = momentum_density(wave, hbar)
    m_total = float(mom.density.sum())
    mean_px = float(np.dot(mom.density.sum(axis=1), mom.p_x) / m_total)
    mean_py = float(np.dot(mom.density.sum(axis=0), mom.p_y) / m_total)
    return Expectations(mean_x, mean_y, mean_px, mean_py, sigma_x, sigma_y)


class Sample(t.NamedTuple):
    """One observation of a running propagation"""

    time: float
    reflectivity: float
    norm: float
    absorbed: float
    mean_x: float
    mean_px: float
    #: Weight in the p_x = 0 momentum bin
    zero_bin: float = 0.0


@dataclass
class ReflectivitySeries:
    """Time-ordered observations of R(t) and the probability bookkeeping"""

    samples: t.List[Sample] = field(default_factory=list)
    #: Start of the detected plateau, if any
    stationary_at: t.Optional[float] = None

    def append(self, sample: Sample) -> None:
        """Add an observation; times must increase strictly"""
        if self.samples and sample.time <= self.samples[-1].time:
            msg = (
                f'Sample time {sample.time} does not follow {self.samples[-1].time}'
            )
            logger.error(msg)
            raise ValueError(msg)
        if not -1e-12 <= sample.reflectivity <= 1.0 + 1e-12:
            msg = f'Reflectivity {sample.reflectivity} outside [0, 1]'
            logger.error(msg)
            raise ValueError(msg)
        value = min(max(sample.reflectivity, 0.0), 1.0)
        self.samples.append(sample._replace(reflectivity=value))

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        """Observation times"""
        return np.array([s.time for s in self.samples], dtype=float)

    @property
    def values(self) -> np.ndarray:
        """Reflectivity at each observation"""
        return np.array([s.reflectivity for s in self.samples], dtype=float)

    @property
    def final(self) -> float:
        """
        :getter: Returns the last observed reflectivity
        :type: float
        """
        if not self.samples:
            msg = 'Series holds no samples'
            logger.error(msg)
            raise InsufficientSamples(msg)
        return self.samples[-1].reflectivity

    def write_csv(
        self, path: t.Union[str, Path], units: t.Optional[UnitSystem] = None
    ) -> Path:
        """
        Write ``time_s, reflectivity, norm, absorbed, mean_x_m, zero_bin`` rows in SI.

        :param path: Output file
        :param units: Unit system the samples are expressed in
        """
        units = units or UnitSystem()
        path = Path(path)
        with path.open('w', newline='', encoding='utf-8') as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ['time_s', 'reflectivity', 'norm', 'absorbed', 'mean_x_m', 'zero_bin']
            )
            for smp in self.samples:
                writer.writerow(
                    [
                        repr(float(units.to_si(smp.time, TIME))),
                        repr(smp.reflectivity),
                        repr(smp.norm),
                        repr(smp.absorbed),
                        repr(float(units.to_si(smp.mean_x, LENGTH))),
                        repr(smp.zero_bin),
                    ]
                )
        return path


def detect_stationary(
    series: ReflectivitySeries, cfg: StationarityConfig
) -> t.Optional[float]:
    """
    Earliest sample time ``t >= min_time`` such that the spread
    ``max - min`` of R over ``[t, t + window]`` is at most ``tolerance * R(t)``.
    The window must be covered by the series. Returns ``None`` otherwise.

    :param series: Observations so far
    :param cfg: Resolved stationarity settings (window and min_time set)
    """
    if not series.samples:
        msg = 'Cannot test an empty series for stationarity'
        logger.error(msg)
        raise InsufficientSamples(msg)
    times = series.times
    values = series.values
    window = float(cfg.window)  # type: ignore[arg-type]
    min_time = float(cfg.min_time or 0.0)
    slack = 1e-9 * max(window, abs(times[-1]))
    for i, start in enumerate(times):
        if start < min_time - slack:
            continue
        if times[-1] < start + window - slack:
            break
        stop = int(np.searchsorted(times, start + window + slack, side='right'))
        chunk = values[i:stop]
        if chunk.max() - chunk.min() <= cfg.tolerance * values[i]:
            return float(start)
    return None


def effective_reflectivity(r_values: t.Sequence[t.Tuple[float, float]]) -> float:
    """
    Average converged reflectivities over the cutoff length on a log scale.

    For log-uniformly spaced cutoffs this is the arithmetic mean. Otherwise the
    samples are integrated with the trapezoid rule in ``log(delta)`` and divided
    by the span, and a warning is logged.

    :param r_values: ``(delta, R)`` pairs at three or more distinct cutoffs
    """
    pairs = sorted((float(d), float(r)) for d, r in r_values)
    deltas = np.array([p[0] for p in pairs])
    refl = np.array([p[1] for p in pairs])
    if len(np.unique(deltas)) < 3 or len(deltas) != len(np.unique(deltas)):
        msg = f'Need at least 3 distinct cutoff values, got {list(deltas)}'
        logger.error(msg)
        raise InsufficientSamples(msg)
    if np.any(deltas <= 0):
        msg = 'Cutoff values must be positive for logarithmic averaging'
        logger.error(msg)
        raise InsufficientSamples(msg)
    logs = np.log(deltas)
    steps = np.diff(logs)
    if np.allclose(steps, steps.mean(), rtol=1e-6, atol=0.0):
        return float(refl.mean())
    logger.warning(
        'Cutoff values are not log-uniform, using trapezoid averaging in log(delta)'
    )
    return float(trapezoid(refl, logs) / (logs[-1] - logs[0]))


def write_momentum_csv(
    wave: WaveField, path: t.Union[str, Path], units: t.Optional[UnitSystem] = None
) -> Path:
    """
    Dump ``p_x, p_y, density`` triples (SI) of a field, in FFT bin order.

    :param wave: Field in internal units
    :param path: Output file
    :param units: Unit system of ``wave``
    """
    units = units or UnitSystem()
    dens = momentum_density(wave, units.hbar)
    p_x = units.to_si(dens.p_x, MOMENTUM)
    p_y = units.to_si(dens.p_y, MOMENTUM)
    values = units.to_si(dens.density, MOMENTUM_DENSITY)
    path = Path(path)
    with path.open('w', newline='', encoding='utf-8') as fh:
        writer = csv.writer(fh)
        writer.writerow(['p_x', 'p_y', 'density'])
        for i, px_i in enumerate(p_x):
            for j, py_j in enumerate(p_y):
                writer.writerow([repr(float(px_i)), repr(float(py_j)), repr(float(values[i, j]))])
    return path
