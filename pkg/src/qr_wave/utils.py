"""Helper and Utility Functions"""

import typing as t
import numpy as np

if t.TYPE_CHECKING:
    from .observables import ReflectivitySeries


def human_bytes(value: float) -> str:
    """Format a byte count with a decimal (1000-based) unit"""
    for unit in ('B', 'kB', 'MB', 'GB', 'TB'):
        if abs(value) < 1000.0 or unit == 'TB':
            return f'{value:.3g} {unit}' if unit != 'B' else f'{int(value)} B'
        value /= 1000.0
    return f'{value:.3g} TB'  # pragma: no cover


def window_generator(
    series: 'ReflectivitySeries', window: float
) -> t.Generator[str, None, None]:
    """
    Yield the spread of R over the trailing window of the series
    :param series: The observations
    :param window: Length of the trailing window
    """
    times = series.times
    values = series.values
    tail = values[times >= times[-1] - window]
    yield f'TRAILING WINDOW: {window:.6g} ({len(tail)} samples)'
    yield f'TRAILING WINDOW: R MIN: {tail.min():.6g} R MAX: {tail.max():.6g}'
    spread = tail.max() - tail.min()
    rel = spread / tail[0] if tail[0] > 0 else float('inf')
    yield f'TRAILING WINDOW: RELATIVE SPREAD: {rel:.3e}'


def bookkeeping_generator(series: 'ReflectivitySeries') -> t.Generator[str, None, None]:
    """
    Yield the probability balance at the last observation
    :param series: The observations
    """
    last = series.samples[-1]
    yield f'BOOKKEEPING: NORM: {last.norm:.12f}'
    yield f'BOOKKEEPING: ABSORBED: {last.absorbed:.12f}'
    yield f'BOOKKEEPING: NORM + ABSORBED - 1: {last.norm + last.absorbed - 1.0:.3e}'


def series_generator(
    series: 'ReflectivitySeries', window: float
) -> t.Generator[str, None, None]:
    """
    Yield summary, trailing-window and bookkeeping lines for a run
    :param series: The observations
    :param window: The stationarity window
    """
    if not series.samples:
        yield 'SERIES: no samples recorded'
        return
    times = series.times
    yield f'SERIES: {len(series)} samples from t={times[0]:.6g} to t={times[-1]:.6g}'
    yield f'SERIES: R FINAL: {series.final:.9g}'
    yield f'SERIES: R PEAK: {float(np.max(series.values)):.9g}'
    gen_map = (window_generator(series, window), bookkeeping_generator(series))
    for gen in gen_map:
        for line in gen:
            yield line
