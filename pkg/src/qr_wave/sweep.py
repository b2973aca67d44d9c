"""One-parameter sweeps over propagation runs"""

import typing as t
import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from time import perf_counter
from .banded import run_footprint
from .config import SimConfig, validate
from .exceptions import InvalidConfig, QrWaveException, ResourceRefusal
from .hamiltonian import CayleySystem
from .propagator import Propagator
from .units import TIME, UnitSystem

logger = logging.getLogger(__name__)

#: Sweepable axes and whether their values are integers
AXES: t.Dict[str, bool] = {
    'n_x': True,
    'n_y': True,
    'delta': False,
    'A': False,
    'sigma_y': False,
    'dt': False,
}
CSV_COLUMNS = [
    'value',
    'r_final',
    'stationary',
    'stationary_at_s',
    'predicted_mem_bytes',
    'error',
]


@dataclass(frozen=True)
class SweepSpec:
    """A base configuration and the values one field takes across a sweep"""

    #: One of :py:data:`AXES`
    axis: str
    #: Values in SI (counts for ``n_x`` and ``n_y``)
    values: t.Tuple[t.Any, ...]
    base: SimConfig = field(default_factory=SimConfig)

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            msg = f'Unknown sweep axis {self.axis!r}, expected one of {sorted(AXES)}'
            logger.error(msg)
            raise InvalidConfig('axis', msg)
        if len(self.values) == 0:
            msg = 'A sweep needs at least one value'
            logger.error(msg)
            raise InvalidConfig('values', msg)
        cast = int if AXES[self.axis] else float
        object.__setattr__(self, 'values', tuple(cast(v) for v in self.values))

    def instantiate(self, value: t.Any) -> SimConfig:
        """The base configuration with the swept field set to ``value``"""
        value = int(value) if AXES[self.axis] else float(value)
        return replace(self.base, **{self.axis: value})

    @property
    def shares_hamiltonian(self) -> bool:
        """
        :getter: Returns ``True`` if every point has the same Hamiltonian
        :type: bool
        """
        return self.axis == 'sigma_y'


class SweepRow(t.NamedTuple):
    """One line of the sweep CSV"""

    value: t.Any
    r_final: t.Optional[float]
    stationary: bool
    stationary_at_s: t.Optional[float]
    predicted_mem_bytes: int
    error: str = ''


@dataclass
class SweepResult:
    """Rows in sweep order plus the timings that stay out of the CSV"""

    rows: t.List[SweepRow] = field(default_factory=list)
    timings: t.List[t.Dict[str, float]] = field(default_factory=list)
    #: Wall time of the whole sweep
    total_seconds: float = 0.0

    def successful(self) -> t.List[SweepRow]:
        """Rows that produced a reflectivity"""
        return [row for row in self.rows if row.r_final is not None]

    def write_csv(self, path: t.Union[str, Path]) -> Path:
        """Write the rows with a fixed column order and value formatting"""
        path = Path(path)
        with path.open('w', newline='', encoding='utf-8') as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in self.rows:
                writer.writerow(
                    [
                        repr(row.value),
                        '' if row.r_final is None else repr(row.r_final),
                        'true' if row.stationary else 'false',
                        '' if row.stationary_at_s is None else repr(row.stationary_at_s),
                        str(row.predicted_mem_bytes),
                        row.error,
                    ]
                )
        return path


def point_footprint(config: SimConfig) -> int:
    """Predicted bytes for running one configuration"""
    return run_footprint(config.n_x, config.n_y)


def peak_footprint(spec: SweepSpec) -> int:
    """Largest predicted footprint over the points of a sweep"""
    return max(point_footprint(spec.instantiate(value)) for value in spec.values)


def allowed_workers(spec: SweepSpec, parallel: int, max_mem: t.Optional[int]) -> int:
    """
    How many points may run at once within ``max_mem``. Raises
    :py:exc:`~.qr_wave.exceptions.ResourceRefusal` if not even one fits.
    """
    peak = peak_footprint(spec)
    if max_mem is None:
        return max(parallel, 1)
    if peak > max_mem:
        logger.error('Sweep point needs %d bytes, budget is %d', peak, max_mem)
        raise ResourceRefusal(peak, max_mem)
    workers = max(1, min(parallel, max_mem // peak))
    if workers < parallel:
        logger.warning('Memory budget limits the sweep to %d workers', workers)
    return workers


def run_point(
    config: SimConfig,
    units: t.Optional[UnitSystem] = None,
    system: t.Optional[CayleySystem] = None,
) -> t.Tuple[SweepRow, t.Dict[str, float], t.Optional[CayleySystem]]:
    """
    Run one sweep point. Failures become an error row instead of raising.

    Returns the row, its timings and the Cayley system used (for reuse).
    """
    start = perf_counter()
    predicted = point_footprint(config)
    try:
        validated = validate(config, units)
        prop = Propagator(validated, system=system)
        series, _ = prop.run()
    except (QrWaveException, MemoryError, FloatingPointError) as err:
        logger.error('Sweep point failed: %s', err)
        row = SweepRow(None, None, False, None, predicted, f'{type(err).__name__}: {err}')
        return row, {'wall_seconds': perf_counter() - start}, system
    stationary_at = series.stationary_at
    row = SweepRow(
        value=None,
        r_final=series.final,
        stationary=stationary_at is not None,
        stationary_at_s=(
            None
            if stationary_at is None
            else float(validated.units.to_si(stationary_at, TIME))
        ),
        predicted_mem_bytes=predicted,
    )
    timings = {
        'wall_seconds': perf_counter() - start,
        'factor_seconds': 0.0 if system is not None else prop.system.factor_seconds,
        'mean_step_seconds': prop.mean_step_seconds,
    }
    return row, timings, prop.system


def _worker(
    config: SimConfig, units: t.Optional[UnitSystem]
) -> t.Tuple[SweepRow, t.Dict[str, float]]:
    row, timings, _ = run_point(config, units)
    return row, timings


def run_sweep(
    spec: SweepSpec,
    parallel: int = 1,
    units: t.Optional[UnitSystem] = None,
) -> SweepResult:
    """
    Run every point of a sweep and collect one row per value, in order.

    A ``sigma_y`` sweep builds the Cayley system once and reuses it. Other axes
    rebuild it per point and may run up to ``parallel`` points at once.

    :param spec: The sweep
    :param parallel: Worker processes for independent points
    :param units: Internal unit system
    """
    start = perf_counter()
    result = SweepResult()
    configs = [spec.instantiate(value) for value in spec.values]
    if spec.shares_hamiltonian or parallel <= 1:
        if spec.shares_hamiltonian and parallel > 1:
            logger.info('sigma_y sweep reuses one factorization, running sequentially')
        system: t.Optional[CayleySystem] = None
        for value, config in zip(spec.values, configs):
            row, timings, used = run_point(config, units, system)
            if spec.shares_hamiltonian and used is not None:
                system = used
            result.rows.append(row._replace(value=value))
            result.timings.append(timings)
            logger.info('Sweep %s=%s -> R=%s %s', spec.axis, value, row.r_final, row.error)
    else:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            futures = [pool.submit(_worker, config, units) for config in configs]
            for value, future in zip(spec.values, futures):
                row, timings = future.result()
                result.rows.append(row._replace(value=value))
                result.timings.append(timings)
                logger.info('Sweep %s=%s -> R=%s %s', spec.axis, value, row.r_final, row.error)
    result.total_seconds = perf_counter() - start
    return result
