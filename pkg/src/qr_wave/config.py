"""Run configuration: defaults, file parsing, validation and unit conversion"""

import typing as t
import logging
import math
import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
import numpy as np
from dotmap import DotMap  # type: ignore
from .exceptions import InvalidConfig
from .units import (
    AMU_SI,
    C3,
    DIMENSIONLESS,
    HE3_MASS_SI,
    LENGTH,
    MASS,
    TIME,
    VELOCITY,
    Dimension,
    UnitSystem,
)

logger = logging.getLogger(__name__)

# pylint: disable=R0902,R0912,R0915,C0103

#: SI factor for every accepted unit suffix, grouped by dimension
UNIT_SUFFIXES: t.Dict[Dimension, t.Dict[str, float]] = {
    LENGTH: {'m': 1.0, 'mm': 1.0e-3, 'um': 1.0e-6, 'nm': 1.0e-9, 'pm': 1.0e-12},
    TIME: {'s': 1.0, 'ms': 1.0e-3, 'us': 1.0e-6, 'ns': 1.0e-9, 'ps': 1.0e-12},
    VELOCITY: {'m/s': 1.0, 'mm/s': 1.0e-3, 'um/s': 1.0e-6},
    MASS: {'kg': 1.0, 'g': 1.0e-3, 'amu': AMU_SI},
    C3: {'j*m^3': 1.0, 'j*m3': 1.0, 'jm^3': 1.0},
}
ANGLE_SUFFIXES = {'rad': 1.0, 'deg': math.pi / 180.0, '': 1.0}
BOOL_WORDS = {'true': True, 'yes': True, 'on': True, '1': True}
BOOL_WORDS.update({'false': False, 'no': False, 'off': False, '0': False})
NUMBER = re.compile(r'^([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*)$')


@dataclass(frozen=True)
class AbsorberConfig:
    """
    Sigmoidal filter that removes the transmitted wave below the surface, with
    an optional second filter at the upper x-edge for the reflected wave
    """

    #: Midpoint x_a of the lower filter; ``None`` means ``x_min / 2``
    center: t.Optional[float] = None
    #: Filter width w; ``None`` means ``25 * dx``
    width: t.Optional[float] = None
    #: ``lower`` filters below the surface only, ``both`` adds the upper-edge filter
    side: t.Literal['lower', 'both'] = 'lower'
    #: Midpoint of the upper filter; ``None`` means three quarters of the way
    #: from ``x0`` to ``x_max``
    upper_center: t.Optional[float] = None
    #: Whether any filter is applied at all
    enabled: bool = True

    @property
    def has_upper(self) -> bool:
        """True when the upper-edge filter is active"""
        return self.enabled and self.side == 'both'

    def lower_profile(self, x: t.Any) -> t.Any:
        """
        Lower filter ``f(x) = 1 / (1 + exp(-(x - x_a) / w))`` on positions ``x``.
        Requires resolved :py:attr:`center` and :py:attr:`width`.
        """
        if not self.enabled:
            return np.ones_like(x, dtype=float)
        arg = (np.asarray(x, dtype=float) - self.center) / self.width
        # 1/(1+exp(-arg)) without overflow for large |arg|
        return 0.5 * (1.0 + np.tanh(0.5 * arg))

    def upper_profile(self, x: t.Any) -> t.Any:
        """Mirrored filter at the upper edge, all ones unless :py:attr:`has_upper`"""
        if not self.has_upper:
            return np.ones_like(x, dtype=float)
        arg = (self.upper_center - np.asarray(x, dtype=float)) / self.width
        return 0.5 * (1.0 + np.tanh(0.5 * arg))

    def profile(self, x: t.Any) -> t.Any:
        """Product of both filters"""
        return self.lower_profile(x) * self.upper_profile(x)


@dataclass(frozen=True)
class StationarityConfig:
    """When a reflectivity series counts as having reached its plateau"""

    #: Length of the window over which R must stay flat; ``None`` is derived
    window: t.Optional[float] = None
    #: Allowed relative max-min spread of R over the window
    tolerance: float = 1.0e-3
    #: Earliest acceptable plateau start; ``None`` is derived
    min_time: t.Optional[float] = None


@dataclass(frozen=True)
class SimConfig:
    """All physical and numerical parameters of one run, in SI units"""

    x_min: float = -1.5e-6
    x_max: float = 5.0e-6
    #: Corrugation period, equal to the y extent of the grid
    L: float = 100.0e-9
    n_x: int = 2**15
    n_y: int = 2**7
    dt: float = 5.0e-9
    #: ``None`` means ``2.2 * |x0| / |v_x0|``
    t_max: t.Optional[float] = None
    mass: float = HE3_MASS_SI
    #: Interaction constant in J*m^3
    c3: float = 4.0e-50
    #: Corrugation amplitude
    A: float = 10.0e-9
    #: Corrugation phase, radians
    phi: float = 0.0
    #: Cutoff length
    delta: float = 10.0e-9
    sigma_x: float = 80.0e-9
    sigma_y: float = 8.0e-9
    x0: float = 2.0e-6
    y0: float = 0.0
    v_x0: float = -2.0
    v_y0: float = 0.0
    #: Record an observation every this many steps
    observe_stride: int = 20
    absorber: AbsorberConfig = field(default_factory=AbsorberConfig)
    stationarity: StationarityConfig = field(default_factory=StationarityConfig)


#: Dimension of every float-valued SimConfig field
FIELD_DIMS: t.Dict[str, Dimension] = {
    'x_min': LENGTH,
    'x_max': LENGTH,
    'L': LENGTH,
    'dt': TIME,
    't_max': TIME,
    'mass': MASS,
    'c3': C3,
    'A': LENGTH,
    'phi': DIMENSIONLESS,
    'delta': LENGTH,
    'sigma_x': LENGTH,
    'sigma_y': LENGTH,
    'x0': LENGTH,
    'y0': LENGTH,
    'v_x0': VELOCITY,
    'v_y0': VELOCITY,
}
INT_FIELDS = ('n_x', 'n_y', 'observe_stride')
ABSORBER_DIMS = {'center': LENGTH, 'width': LENGTH, 'upper_center': LENGTH}
STATIONARITY_DIMS = {'window': TIME, 'tolerance': DIMENSIONLESS, 'min_time': TIME}


@dataclass(frozen=True)
class InternalParams:
    """Every run quantity expressed in the internal unit system"""

    x_min: float
    x_max: float
    L: float
    n_x: int
    n_y: int
    dt: float
    t_max: float
    mass: float
    hbar: float
    c3: float
    A: float
    phi: float
    delta: float
    sigma_x: float
    sigma_y: float
    x0: float
    y0: float
    v_x0: float
    v_y0: float
    observe_stride: int
    absorber: AbsorberConfig
    stationarity: StationarityConfig

    @property
    def dx(self) -> float:
        """Grid step along x"""
        return (self.x_max - self.x_min) / self.n_x

    @property
    def dy(self) -> float:
        """Grid step along y"""
        return self.L / self.n_y


@dataclass(frozen=True)
class ValidatedConfig:
    """A configuration whose invariants have all been checked"""

    #: The SI configuration, with every derived default resolved
    config: SimConfig
    units: UnitSystem = field(default_factory=UnitSystem)

    @cached_property
    def internal(self) -> InternalParams:
        """
        :getter: Returns the run parameters in internal units
        :type: InternalParams
        """
        return to_internal(self)


def is_power_of_two(value: int) -> bool:
    """True for 1, 2, 4, 8, ..."""
    return value > 0 and (value & (value - 1)) == 0


def _fail(name: str, reason: str) -> t.NoReturn:
    logger.error('Config field "%s" rejected: %s', name, reason)
    raise InvalidConfig(name, reason)


def resolve_defaults(config: SimConfig) -> SimConfig:
    """Fill in every ``None`` default that depends on other fields"""
    speed = abs(config.v_x0) if config.v_x0 else float('nan')
    transit = abs(config.x0) / speed
    dx = (config.x_max - config.x_min) / config.n_x
    absorber = config.absorber
    if absorber.center is None:
        absorber = replace(absorber, center=config.x_min / 2.0)
    if absorber.upper_center is None:
        absorber = replace(
            absorber, upper_center=config.x_max - 0.25 * (config.x_max - config.x0)
        )
    if absorber.width is None:
        absorber = replace(absorber, width=25.0 * dx)
    stationarity = config.stationarity
    if stationarity.min_time is None:
        stationarity = replace(stationarity, min_time=transit)
    if stationarity.window is None:
        stationarity = replace(stationarity, window=0.2 * transit)
    t_max = config.t_max if config.t_max is not None else 2.2 * transit
    return replace(config, t_max=t_max, absorber=absorber, stationarity=stationarity)


def validate(config: SimConfig, units: t.Optional[UnitSystem] = None) -> ValidatedConfig:
    """
    Check every run invariant, resolve derived defaults and precompute the
    internal-unit parameters.

    Raises :py:exc:`~.qr_wave.exceptions.InvalidConfig` naming the first
    offending field.

    :param config: The SI configuration
    :param units: Internal unit system (nm / ns / helium-3 mass by default)
    """
    units = units or UnitSystem()
    for name in FIELD_DIMS:
        value = getattr(config, name)
        if value is not None and not math.isfinite(value):
            _fail(name, f'must be finite, got {value}')
    for name in INT_FIELDS:
        value = getattr(config, name)
        if not isinstance(value, int) or isinstance(value, bool):
            _fail(name, f'must be an integer, got {value!r}')
    if config.dt <= 0:
        _fail('dt', f'time step must be positive, got {config.dt}')
    if not config.x_min < 0 < config.x_max:
        _fail('x_min', f'need x_min < 0 < x_max, got [{config.x_min}, {config.x_max}]')
    if config.L <= 0:
        _fail('L', f'corrugation period must be positive, got {config.L}')
    if config.n_x < 8 or not is_power_of_two(config.n_x):
        _fail('n_x', f'must be a power of two >= 8, got {config.n_x}')
    if config.n_y < 4 or not is_power_of_two(config.n_y):
        _fail('n_y', f'must be a power of two >= 4, got {config.n_y}')
    if config.mass <= 0:
        _fail('mass', f'must be positive, got {config.mass}')
    if config.c3 <= 0:
        _fail('c3', f'must be positive, got {config.c3}')
    if config.delta <= 0:
        _fail('delta', f'cutoff must be positive, got {config.delta}')
    if config.A < 0:
        _fail('A', f'amplitude must be non-negative, got {config.A}')
    if config.A + config.delta >= config.x_max:
        _fail('A', 'surface and cutoff shell (A + delta) must lie inside the grid')
    if config.sigma_x <= 0:
        _fail('sigma_x', f'must be positive, got {config.sigma_x}')
    if config.sigma_y <= 0:
        _fail('sigma_y', f'must be positive, got {config.sigma_y}')
    if config.x0 <= config.A + config.delta + 3.0 * config.sigma_x:
        _fail('x0', 'packet must start outside the interaction/cutoff region')
    if config.x0 + 3.0 * config.sigma_x >= config.x_max:
        _fail('x0', 'packet must start inside the grid')
    if config.v_x0 >= 0:
        _fail('v_x0', f'packet must approach the surface (v_x0 < 0), got {config.v_x0}')
    if config.observe_stride < 1:
        _fail('observe_stride', f'must be at least 1, got {config.observe_stride}')
    if config.t_max is not None and config.t_max <= 0:
        _fail('t_max', f'must be positive, got {config.t_max}')

    resolved = resolve_defaults(config)
    absorber = resolved.absorber
    if absorber.side not in ('lower', 'both'):
        _fail('absorber.side', f'must be "lower" or "both", got {absorber.side!r}')
    if absorber.width <= 0:  # type: ignore[operator]
        _fail('absorber.width', f'must be positive, got {absorber.width}')
    if not config.x_min < absorber.center < 0:  # type: ignore[operator]
        _fail('absorber.center', 'lower absorber must sit inside (x_min, 0)')
    if absorber.has_upper and not (
        config.x0 < absorber.upper_center < config.x_max  # type: ignore[operator]
    ):
        _fail('absorber.upper_center', 'upper absorber must sit inside (x0, x_max)')
    stationarity = resolved.stationarity
    if stationarity.window <= 0:  # type: ignore[operator]
        _fail('stationarity.window', f'must be positive, got {stationarity.window}')
    if stationarity.tolerance <= 0:
        _fail('stationarity.tolerance', 'must be positive')

    validated = ValidatedConfig(config=resolved, units=units)
    _ = validated.internal  # precompute
    logger.debug('Validated configuration: %s', resolved)
    return validated


def to_internal(validated: ValidatedConfig) -> InternalParams:
    """
    Express a validated configuration in internal units.

    :param validated: Output of :py:func:`validate`
    """
    cfg = validated.config
    units = validated.units
    values: t.Dict[str, t.Any] = {
        name: units.to_internal(getattr(cfg, name), dim)
        for name, dim in FIELD_DIMS.items()
    }
    values.update({name: getattr(cfg, name) for name in INT_FIELDS})
    values['hbar'] = units.hbar
    values['absorber'] = replace(
        cfg.absorber,
        **{k: units.to_internal(getattr(cfg.absorber, k), d) for k, d in ABSORBER_DIMS.items()},
    )
    values['stationarity'] = replace(
        cfg.stationarity,
        **{
            k: units.to_internal(getattr(cfg.stationarity, k), d)
            for k, d in STATIONARITY_DIMS.items()
        },
    )
    return InternalParams(**values)


def parse_value(key: str, text: str) -> t.Any:
    """
    Parse one ``value [unit]`` string for configuration key ``key`` into SI.

    :param key: Dotted configuration key, e.g. ``absorber.width``
    :param text: The raw value, e.g. ``25 nm``
    """
    raw = text.strip()
    if key == 'absorber.side':
        return raw.lower()
    if key == 'absorber.enabled':
        if raw.lower() not in BOOL_WORDS:
            _fail(key, f'expected true/false, got {raw!r}')
        return BOOL_WORDS[raw.lower()]
    match = NUMBER.match(raw)
    if not match:
        _fail(key, f'cannot parse a number from {raw!r}')
    number, suffix = match.group(1), match.group(2).replace(' ', '')
    suffix = suffix.replace('µ', 'u').replace('μ', 'u').lower()
    if key in INT_FIELDS:
        if suffix or not re.fullmatch(r'[-+]?\d+', number):
            _fail(key, f'expected a bare integer, got {raw!r}')
        return int(number)
    if key == 'phi':
        if suffix not in ANGLE_SUFFIXES:
            _fail(key, f'unknown angle unit {suffix!r}')
        return float(number) * ANGLE_SUFFIXES[suffix]
    dim = key_dimension(key)
    if dim == DIMENSIONLESS:
        if suffix:
            _fail(key, f'expected a bare number, got unit {suffix!r}')
        return float(number)
    table = UNIT_SUFFIXES[dim]
    if not suffix:
        _fail(key, f'missing unit, expected one of {sorted(table)}')
    if suffix not in table:
        _fail(key, f'unit {suffix!r} does not fit, expected one of {sorted(table)}')
    return float(number) * table[suffix]


def key_dimension(key: str) -> Dimension:
    """Return the dimension of a dotted configuration key, or raise"""
    if '.' in key:
        section, name = key.split('.', 1)
        table = {'absorber': ABSORBER_DIMS, 'stationarity': STATIONARITY_DIMS}.get(
            section, {}
        )
        if name in table:
            return table[name]
    elif key in FIELD_DIMS:
        return FIELD_DIMS[key]
    _fail(key, 'unknown configuration key')


def known_keys() -> t.List[str]:
    """Every key accepted in a configuration file or ``--set`` override"""
    keys = list(FIELD_DIMS) + list(INT_FIELDS)
    keys += [
        f'absorber.{name}' for name in ('center', 'width', 'side', 'upper_center', 'enabled')
    ]
    keys += [f'stationarity.{name}' for name in STATIONARITY_DIMS]
    return keys


def parse_lines(lines: t.Iterable[str], tree: t.Optional[DotMap] = None) -> DotMap:
    """
    Parse ``key = value`` lines into a nested :py:class:`DotMap` of SI values.

    Blank lines and ``#`` comments are skipped. Later lines override earlier ones.
    """
    tree = tree if tree is not None else DotMap()
    allowed = set(known_keys())
    for lineno, line in enumerate(lines, start=1):
        content = line.split('#', 1)[0].strip()
        if not content:
            continue
        if '=' not in content:
            _fail(content, f'line {lineno}: expected "key = value"')
        key, value = (part.strip() for part in content.split('=', 1))
        if key not in allowed:
            _fail(key, f'line {lineno}: unknown configuration key')
        parsed = parse_value(key, value)
        if '.' in key:
            section, name = key.split('.', 1)
            tree[section][name] = parsed
        else:
            tree[key] = parsed
    return tree


def build_config(tree: DotMap, base: t.Optional[SimConfig] = None) -> SimConfig:
    """Overlay a parsed :py:class:`DotMap` tree on ``base`` (defaults if omitted)"""
    base = base or SimConfig()
    flat = {k: v for k, v in tree.items() if not isinstance(v, DotMap)}
    absorber = replace(base.absorber, **tree.absorber.toDict()) if tree.absorber else None
    stationarity = (
        replace(base.stationarity, **tree.stationarity.toDict())
        if tree.stationarity
        else None
    )
    if absorber is not None:
        flat['absorber'] = absorber
    if stationarity is not None:
        flat['stationarity'] = stationarity
    return replace(base, **flat)


def load_config(
    path: t.Optional[t.Union[str, Path]] = None,
    overrides: t.Sequence[str] = (),
    base: t.Optional[SimConfig] = None,
) -> SimConfig:
    """
    Read a configuration file (optional) and apply ``key=value`` overrides.

    :param path: Configuration file path
    :param overrides: Override strings, applied after the file
    :param base: Starting configuration (built-in defaults if omitted)
    """
    tree = DotMap()
    if path is not None:
        try:
            text = Path(path).read_text(encoding='utf-8')
        except OSError as err:
            msg = f'Unable to read configuration file {path}'
            logger.error(msg)
            raise InvalidConfig('config', msg) from err
        parse_lines(text.splitlines(), tree)
    parse_lines(overrides, tree)
    return build_config(tree, base)
