"""Command-line front end: run, sweep, oracle1d, predict-mem and analyze"""

import typing as t
import argparse
import csv
import logging
import sys
from dataclasses import asdict
from pathlib import Path
import numpy as np
from . import __version__
from .banded import factor_bytes, memory_model, run_footprint
from .config import SimConfig, load_config, parse_value, validate
from .exceptions import (
    InvalidConfig,
    NumericalError,
    QrWaveException,
    ResourceRefusal,
)
from .grid import read_snapshot
from .manifest import RunManifest
from .observables import effective_reflectivity, momentum_split, write_momentum_csv
from .oracle import cutoff_sweep
from .potential import write_row_csv
from .propagator import Propagator
from .sweep import AXES, SweepSpec, allowed_workers, run_sweep
from .units import C3, LENGTH, MASS, TIME, VELOCITY, UnitSystem
from .utils import human_bytes

logger = logging.getLogger(__name__)

LOG_FORMAT = (
    '%(asctime)s %(levelname)-9s %(name)22s %(funcName)22s:%(lineno)-4d %(message)s'
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_NUMERICAL = 4

BYTE_SUFFIXES = {'': 1, 'k': 10**3, 'm': 10**6, 'g': 10**9, 't': 10**12}


def parse_bytes(text: str) -> int:
    """Parse ``123``, ``4G`` or ``512MB`` into bytes (decimal multiples)"""
    raw = text.strip().lower().rstrip('b')
    suffix = raw[-1] if raw and raw[-1] in BYTE_SUFFIXES else ''
    number = raw[: len(raw) - len(suffix)]
    try:
        return int(float(number) * BYTE_SUFFIXES[suffix])
    except ValueError as err:
        raise argparse.ArgumentTypeError(f'Cannot parse a byte count from {text!r}') from err


def add_common(parser: argparse.ArgumentParser) -> None:
    """Flags shared by every subcommand"""
    parser.add_argument('--config', type=Path, help='key = value configuration file')
    parser.add_argument(
        '--set',
        dest='overrides',
        action='append',
        default=[],
        metavar='KEY=VALUE',
        help='Override one configuration value (repeatable)',
    )
    parser.add_argument('--out', type=Path, default=Path('.'), help='Output directory')
    parser.add_argument(
        '--max-mem', type=parse_bytes, default=None, help='Memory budget in bytes'
    )
    parser.add_argument(
        '--loglevel',
        default='INFO',
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
    )


def add_values(parser: argparse.ArgumentParser) -> None:
    """Mutually exclusive ways to list sweep values"""
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument(
        '--values', help='Comma-separated values with units, e.g. "3nm,10nm,30nm"'
    )
    group.add_argument(
        '--log-range',
        nargs=3,
        metavar=('START', 'STOP', 'COUNT'),
        help='COUNT log-spaced values from START to STOP inclusive',
    )


def build_parser() -> argparse.ArgumentParser:
    """The argument parser with all subcommands"""
    parser = argparse.ArgumentParser(
        prog='qr-wave',
        description='Quantum reflection of wave packets from corrugated surfaces',
    )
    parser.add_argument('--version', action='version', version=__version__)
    subs = parser.add_subparsers(dest='command', required=True)

    run_p = subs.add_parser('run', help='Propagate one configuration')
    add_common(run_p)
    run_p.add_argument(
        '--snapshots', action='store_true', help='Dump the field at every observation'
    )
    run_p.add_argument(
        '--dump-potential',
        type=int,
        nargs='?',
        const=0,
        default=None,
        metavar='ROW',
        help='Write x, V and dV/dx along grid row ROW (default 0) before propagating',
    )
    run_p.add_argument(
        '--dump-momentum',
        action='store_true',
        help='Write the momentum density of the final field',
    )

    sweep_p = subs.add_parser('sweep', help='Vary one parameter across runs')
    add_common(sweep_p)
    sweep_p.add_argument('--axis', required=True, choices=sorted(AXES))
    add_values(sweep_p)
    sweep_p.add_argument('--parallel', type=int, default=1, help='Worker processes')

    oracle_p = subs.add_parser('oracle1d', help='Stationary 1D reflectivity vs cutoff')
    add_common(oracle_p)
    add_values(oracle_p)
    oracle_p.add_argument(
        '--packet',
        action='store_true',
        help='Average over the momentum distribution of the configured packet',
    )

    mem_p = subs.add_parser('predict-mem', help='Predict the memory of a run')
    add_common(mem_p)

    an_p = subs.add_parser('analyze', help='Reflectivity of saved snapshots')
    an_p.add_argument('snapshots', nargs='+', type=Path, help='Snapshot files')
    an_p.add_argument('--out', type=Path, default=Path('.'), help='Output directory')
    an_p.add_argument(
        '--dump-momentum',
        action='store_true',
        help='Write the momentum density of every snapshot',
    )
    an_p.add_argument(
        '--loglevel',
        default='INFO',
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
    )
    return parser


def sweep_values(args: argparse.Namespace, key: str) -> t.List[t.Any]:
    """Values from ``--values`` or ``--log-range``, parsed like config values"""
    if args.values is not None:
        return [parse_value(key, item) for item in args.values.split(',') if item.strip()]
    start, stop, count = args.log_range
    try:
        num = int(count)
    except ValueError as err:
        raise InvalidConfig('log-range', f'COUNT must be an integer, got {count!r}') from err
    lo, hi = parse_value(key, start), parse_value(key, stop)
    values = np.geomspace(lo, hi, num)
    if key in ('n_x', 'n_y'):
        return [int(round(v)) for v in values]
    return [float(v) for v in values]


def check_budget(required: int, limit: t.Optional[int]) -> None:
    """Raise :py:exc:`~.qr_wave.exceptions.ResourceRefusal` over budget"""
    if limit is not None and required > limit:
        logger.error(
            'Predicted footprint %s exceeds the budget %s',
            human_bytes(required),
            human_bytes(limit),
        )
        raise ResourceRefusal(required, limit)


def cmd_run(args: argparse.Namespace) -> int:
    """The ``run`` subcommand"""
    config = validate(load_config(args.config, args.overrides))
    cfg = config.config
    required = run_footprint(cfg.n_x, cfg.n_y)
    check_budget(required, args.max_mem)
    args.out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(args.out / 'manifest.json', 'run', config)
    manifest.start(predicted_mem_bytes=required)
    snap_dir = None
    if args.snapshots:
        snap_dir = args.out / 'snapshots'
        snap_dir.mkdir(exist_ok=True)
    try:
        prop = Propagator(config, snapshot_dir=snap_dir)
        if args.dump_potential is not None:
            row = args.dump_potential
            manifest.add_output(
                write_row_csv(
                    prop.potential, args.out / f'potential_row{row}.csv', row, config.units
                )
            )
        series, state = prop.run()
    except QrWaveException as err:
        manifest.finish('failed', f'{type(err).__name__}: {err}')
        raise
    csv_path = series.write_csv(args.out / 'series.csv', config.units)
    manifest.add_output(csv_path)
    if args.dump_momentum:
        manifest.add_output(
            write_momentum_csv(state.field, args.out / 'momentum_final.csv', config.units)
        )
    stationary = series.stationary_at
    stationary_s = None if stationary is None else config.units.to_si(stationary, TIME)
    manifest.record(
        factor_seconds=prop.system.factor_seconds,
        mean_step_seconds=prop.mean_step_seconds,
        steps=state.step_count,
        r_final=series.final,
        stationary_at_s=stationary_s,
    )
    manifest.finish('ok')
    print(
        f'R_final={series.final!r} '
        f'stationary_at={"none" if stationary_s is None else repr(float(stationary_s))}'
    )
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    """The ``sweep`` subcommand"""
    base = load_config(args.config, args.overrides)
    units = UnitSystem()
    spec = SweepSpec(axis=args.axis, values=tuple(sweep_values(args, args.axis)), base=base)
    workers = allowed_workers(spec, args.parallel, args.max_mem)
    args.out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(args.out / f'manifest_sweep_{spec.axis}.json', 'sweep')
    manifest.start(
        axis=spec.axis, values=list(spec.values), workers=workers, base=asdict(base)
    )
    result = run_sweep(spec, parallel=workers, units=units)
    csv_path = result.write_csv(args.out / f'sweep_{spec.axis}.csv')
    manifest.add_output(csv_path)
    manifest.record(timings=result.timings, total_seconds=result.total_seconds)
    manifest.finish('ok')
    for row in result.rows:
        print(f'{spec.axis}={row.value!r} R_final={row.r_final!r} {row.error}'.rstrip())
    good = result.successful()
    if spec.axis == 'delta' and len(good) >= 3:
        r_eff = effective_reflectivity([(row.value, row.r_final) for row in good])
        print(f'R_eff={r_eff!r}')
    return EXIT_OK


def cmd_oracle1d(args: argparse.Namespace) -> int:
    """The ``oracle1d`` subcommand"""
    base: SimConfig = load_config(args.config, args.overrides)
    units = UnitSystem()
    deltas = sweep_values(args, 'delta')
    internal = cutoff_sweep(
        units.to_internal(base.c3, C3),
        [units.to_internal(delta, LENGTH) for delta in deltas],
        units.to_internal(base.mass, MASS),
        units.to_internal(abs(base.v_x0), VELOCITY),
        units.hbar,
        sigma_x=units.to_internal(base.sigma_x, LENGTH) if args.packet else None,
    )
    rows = []
    for delta_si, (_, refl) in zip(deltas, internal):
        rows.append((float(delta_si), refl))
        print(f'delta={delta_si!r} R={refl!r}')
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / 'oracle1d.csv'
    with path.open('w', newline='', encoding='utf-8') as fh:
        writer = csv.writer(fh)
        writer.writerow(['delta_m', 'reflectivity'])
        for delta_si, refl in rows:
            writer.writerow([repr(delta_si), repr(refl)])
    if len(rows) >= 3:
        print(f'R_eff={effective_reflectivity(rows)!r}')
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    """The ``analyze`` subcommand"""
    units = UnitSystem()
    if args.dump_momentum:
        args.out.mkdir(parents=True, exist_ok=True)
    for path in args.snapshots:
        wave = read_snapshot(path, units)
        refl, trans, zero = momentum_split(wave)
        print(
            f'{path.name} t={float(units.to_si(wave.time, TIME))!r} R={refl!r} '
            f'T={trans!r} zero={zero!r} norm={wave.norm()!r}'
        )
        if args.dump_momentum:
            write_momentum_csv(wave, args.out / f'{path.stem}_momentum.csv', units)
    return EXIT_OK


def cmd_predict_mem(args: argparse.Namespace) -> int:
    """The ``predict-mem`` subcommand"""
    cfg = load_config(args.config, args.overrides)
    predicted = memory_model(cfg.n_x, cfg.n_y)
    required = run_footprint(cfg.n_x, cfg.n_y)
    print(
        f'n_x={cfg.n_x} n_y={cfg.n_y} factor_bytes={factor_bytes(cfg.n_x, cfg.n_y)} '
        f'predicted_bytes={predicted} run_bytes={required} ({human_bytes(predicted)})'
    )
    check_budget(required, args.max_mem)
    return EXIT_OK


COMMANDS: t.Dict[str, t.Callable[[argparse.Namespace], int]] = {
    'run': cmd_run,
    'sweep': cmd_sweep,
    'oracle1d': cmd_oracle1d,
    'predict-mem': cmd_predict_mem,
    'analyze': cmd_analyze,
}


def main(argv: t.Optional[t.Sequence[str]] = None) -> int:
    """Entry point; returns the process exit status"""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.loglevel, format=LOG_FORMAT, force=True)
    try:
        return COMMANDS[args.command](args)
    except ResourceRefusal as err:
        print(f'error: {err}', file=sys.stderr)
        return EXIT_RESOURCE
    except NumericalError as err:
        print(f'error: {type(err).__name__}: {err}', file=sys.stderr)
        return EXIT_NUMERICAL
    except (QrWaveException, ValueError) as err:
        print(f'error: {err}', file=sys.stderr)
        return EXIT_CONFIG


if __name__ == '__main__':  # pragma: no cover
    sys.exit(main())
