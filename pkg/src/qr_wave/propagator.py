"""Crank-Nicolson time stepping with a sigmoidal absorber"""

import typing as t
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from time import perf_counter
import numpy as np
from ._base import Stepper
from .banded import matvec, solve
from .config import AbsorberConfig, ValidatedConfig
from .exceptions import NonStationary
from .grid import GridGeometry, PacketSpec, WaveField, init_gaussian, make_grid
from .grid import write_snapshot
from .hamiltonian import CayleySystem, assemble_h, build_cayley
from .observables import (
    ZERO_BIN_LIMIT,
    ReflectivitySeries,
    Sample,
    detect_stationary,
    expectations,
    momentum_split,
)
from .potential import CorrugationParams, PotentialField, evaluate_field
from .utils import series_generator

logger = logging.getLogger(__name__)

# pylint: disable=R0902,R0913


@dataclass
class PropagationState:
    """The field being propagated and its probability bookkeeping"""

    field: WaveField
    time: float = 0.0
    step_count: int = 0
    #: Probability removed by all filters so far
    cumulative_absorbed: float = 0.0
    #: Share of :py:attr:`cumulative_absorbed` taken by the upper-edge filter
    absorbed_upper: float = 0.0

    @property
    def norm(self) -> float:
        """
        :getter: Returns the discrete norm of :py:attr:`field`
        :type: float
        """
        return self.field.norm()


def absorber_profile(
    grid: GridGeometry,
    absorber: AbsorberConfig,
    part: t.Literal['all', 'lower', 'upper'] = 'all',
) -> np.ndarray:
    """
    Filter ``f(x)`` per grid column, constant in y.

    ``f(x) = 1 / (1 + exp(-(x - x_a) / w))`` for the lower edge. With
    ``side = both`` the mirrored upper-edge filter multiplies it. All ones when
    the absorber is disabled.

    :param part: ``lower`` or ``upper`` selects a single filter
    """
    if part == 'lower':
        return np.asarray(absorber.lower_profile(grid.x), dtype=float)
    if part == 'upper':
        return np.asarray(absorber.upper_profile(grid.x), dtype=float)
    return np.asarray(absorber.profile(grid.x), dtype=float)


def _apply(psi: np.ndarray, geo: GridGeometry, mask: np.ndarray) -> float:
    cell = geo.dx * geo.dy
    before = float(np.vdot(psi, psi).real) * cell
    view = psi.reshape(geo.shape)
    view *= mask[:, np.newaxis]
    return before - float(np.vdot(psi, psi).real) * cell


def step(
    state: PropagationState,
    system: CayleySystem,
    absorber: AbsorberConfig,
    masks: t.Optional[t.Tuple[np.ndarray, np.ndarray]] = None,
) -> PropagationState:
    """
    Advance one time step: ``psi <- solve(factor, a_minus psi)``, then multiply
    by the absorber filters and book the removed probability. Weight taken by
    the upper-edge filter is also booked in ``absorbed_upper``.

    :param state: Current state
    :param system: Cayley matrices and factor
    :param absorber: Filter settings
    :param masks: Precomputed lower and upper :py:func:`absorber_profile`
    """
    geo = state.field.geometry
    psi = solve(system.factor, matvec(system.a_minus, state.field.amplitudes))
    absorbed = state.cumulative_absorbed
    upper = state.absorbed_upper
    if absorber.enabled:
        if masks is None:
            masks = (
                absorber_profile(geo, absorber, 'lower'),
                absorber_profile(geo, absorber, 'upper'),
            )
        absorbed += _apply(psi, geo, masks[0])
        if absorber.has_upper:
            taken = _apply(psi, geo, masks[1])
            absorbed += taken
            upper += taken
    time = state.time + system.dt
    return PropagationState(
        field=WaveField(psi, geo, time),
        time=time,
        step_count=state.step_count + 1,
        cumulative_absorbed=absorbed,
        absorbed_upper=upper,
    )


class Propagator(Stepper):
    """
    Propagate the packet of a validated configuration until the reflectivity
    becomes stationary or ``t_max`` is reached.

    :param config: Validated run configuration
    :param system: A Cayley system to reuse (must match the configuration)
    :param snapshot_dir: Directory for binary snapshots at each observation
    """

    def __init__(
        self,
        config: ValidatedConfig,
        system: t.Optional[CayleySystem] = None,
        snapshot_dir: t.Optional[t.Union[str, Path]] = None,
    ) -> None:
        params = config.internal
        super().__init__(t_max=params.t_max, stride=params.observe_stride)
        #: The validated configuration
        self.config = config
        self.waitstr = 'for the reflectivity to become stationary'
        self.do_run_report = True
        logger.debug('Run configuration:%s', self.prettystr(asdict(params)))
        #: Internal-unit parameters
        self.params = params
        #: Grid geometry
        self.grid = make_grid(config)
        #: The sampled potential
        self.potential: PotentialField = evaluate_field(
            self.grid, CorrugationParams.from_params(params)
        )
        if system is None:
            h = assemble_h(self.grid, self.potential, params.mass, params.hbar)
            system = build_cayley(h, params.dt, params.hbar)
        #: Cayley matrices and factor
        self.system = system
        #: Absorber settings and profile
        self.absorber = params.absorber
        self.masks = (
            absorber_profile(self.grid, self.absorber, 'lower'),
            absorber_profile(self.grid, self.absorber, 'upper'),
        )
        #: Number of steps covering ``t_max``
        self.max_steps = int(math.ceil(params.t_max / params.dt - 1e-9))
        self.snapshot_dir = Path(snapshot_dir) if snapshot_dir else None
        wave = init_gaussian(
            self.grid, PacketSpec.from_params(params), params.mass, params.hbar
        )
        #: The propagation state
        self.state = PropagationState(field=wave)
        #: Observations so far
        self.series = ReflectivitySeries()
        #: Wall-clock seconds spent in :py:meth:`advance`
        self.step_seconds = 0.0
        self._zero_bin_warned = False

    @property
    def time(self) -> float:
        """
        :getter: Returns the elapsed simulated time
        :type: float
        """
        return self.state.time

    @property
    def exhausted(self) -> bool:
        """
        :getter: Returns ``True`` once ``max_steps`` steps have been taken
        :type: bool
        """
        return self.state.step_count >= self.max_steps

    @property
    def mean_step_seconds(self) -> float:
        """
        :getter: Returns the mean wall time of one step
        :type: float
        """
        return self.step_seconds / max(self.state.step_count, 1)

    @property
    def check(self) -> bool:
        """
        Record an observation and test the series for stationarity.

        :getter: Returns if a plateau has been found
        :type: bool
        """
        self.observe()
        found = detect_stationary(self.series, self.params.stationarity)
        if found is not None:
            self.series.stationary_at = found
            logger.info('Reflectivity stationary from t=%.6g', found)
            return True
        return False

    def advance(self) -> None:
        """Take one Crank-Nicolson step"""
        start = perf_counter()
        self.state = step(self.state, self.system, self.absorber, self.masks)
        self.step_seconds += perf_counter() - start

    def observe(self) -> Sample:
        """Measure the current field and append it to :py:attr:`series`"""
        wave = self.state.field
        r_field, _, zero = momentum_split(wave)
        if zero > ZERO_BIN_LIMIT and not self._zero_bin_warned:
            logger.warning('Weight %.3e in the p_x = 0 bin exceeds %.0e', zero, ZERO_BIN_LIMIT)
            self._zero_bin_warned = True
        absorbed = self.state.cumulative_absorbed
        # the upper filter only ever removes reflected probability
        r_total = r_field + self.state.absorbed_upper
        moments = expectations(wave, self.params.hbar)
        sample = Sample(
            time=self.state.time,
            reflectivity=r_total,
            norm=wave.norm(),
            absorbed=absorbed,
            mean_x=moments.mean_x,
            mean_px=moments.mean_px,
            zero_bin=zero,
        )
        self.series.append(sample)
        logger.debug(
            'step=%d t=%.6g R=%.9g norm=%.12f absorbed=%.3e',
            self.state.step_count,
            sample.time,
            sample.reflectivity,
            sample.norm,
            absorbed,
        )
        if self.snapshot_dir is not None:
            name = f'snapshot_{self.state.step_count:08d}.bin'
            write_snapshot(wave, self.snapshot_dir / name, self.config.units)
        return sample

    def report(self) -> t.Iterator[str]:
        """Run report lines for a non-stationary finish"""
        return series_generator(self.series, float(self.params.stationarity.window))

    def guard_reflected(self) -> bool:
        """
        Warn when the field reaches the upper x-edge (``<x> + 3 sigma_x`` beyond
        ``x_max``). Returns ``True`` if it does.
        """
        moments = expectations(self.state.field, self.params.hbar)
        reach = moments.mean_x + 3.0 * moments.sigma_x
        if reach > self.grid.x_max:
            logger.warning(
                'Packet extends to x=%.6g beyond the upper grid edge %.6g; '
                'consider a larger x_max or absorber.side = both',
                reach,
                self.grid.x_max,
            )
            return True
        return False

    def run(self, frequency: int = 10) -> t.Tuple[ReflectivitySeries, PropagationState]:
        """
        Propagate and return the series and final state. A run that never
        becomes stationary is logged and still returned.

        :param frequency: Checks between progress log lines
        """
        logger.info(
            'Propagating %dx%d grid for up to %d steps of dt=%.6g',
            self.grid.n_x,
            self.grid.n_y,
            self.max_steps,
            self.params.dt,
        )
        try:
            self.wait(frequency)
        except NonStationary as err:
            logger.warning('Run finished without a plateau: %s', err)
        self.guard_reflected()
        logger.info(
            'Run finished at t=%.6g after %d steps: R=%.9g',
            self.state.time,
            self.state.step_count,
            self.series.final,
        )
        return self.series, self.state


def run(
    config: ValidatedConfig, system: t.Optional[CayleySystem] = None
) -> t.Tuple[ReflectivitySeries, PropagationState]:
    """
    Propagate the packet of ``config`` to stationarity or ``t_max``.

    :param config: Validated run configuration
    :param system: Optional Cayley system to reuse
    """
    return Propagator(config, system=system).run()
