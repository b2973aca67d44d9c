"""qr_wave Exceptions"""

import typing as t


class QrWaveException(Exception):
    """Base Exception Class for qr_wave"""


class InvalidConfig(QrWaveException, ValueError):
    """
    A configuration value violates one of the run invariants.

    :param field: The name of the offending configuration key
    :param reason: What is wrong with it
    """

    def __init__(self, field: str, reason: str) -> None:
        #: The configuration key that failed validation
        self.field = field
        #: Human readable description of the violation
        self.reason = reason
        super().__init__(f'Invalid value for "{field}": {reason}')


class DimensionMismatch(QrWaveException, ValueError):
    """Operand lengths or shapes do not agree"""


class GridMismatch(QrWaveException, ValueError):
    """A sampled quantity does not live on the expected grid"""


class NonPowerOfTwo(QrWaveException, ValueError):
    """A grid dimension handed to the FFT analysis is not a power of two"""


class PacketOutsideGrid(QrWaveException, ValueError):
    """The initial wave packet centre lies outside the grid"""


class InsufficientSamples(QrWaveException, ValueError):
    """Not enough data points to form the requested average"""


class NumericalError(QrWaveException):
    """Any failure of the numerical machinery"""


class PivotBreakdown(NumericalError):
    """
    The LL^T factorization met a (near-)zero pivot.

    :param row: The row at which the pivot collapsed
    """

    def __init__(self, row: int, pivot: t.Optional[complex] = None) -> None:
        #: Zero-based row index of the failing pivot
        self.row = row
        #: The offending pivot value, if known
        self.pivot = pivot
        super().__init__(f'Pivot breakdown at row {row} (pivot={pivot})')


class SolverFailure(NumericalError):
    """Forward/backward substitution produced a non-finite result"""


class NoConvergence(NumericalError):
    """The 1D reference solver did not converge under refinement"""


class NonStationary(QrWaveException):
    """
    The reflectivity never settled before the end of the run.

    :param t_max: The propagation time limit that was reached
    """

    def __init__(self, t_max: float, msg: t.Optional[str] = None) -> None:
        #: The time limit, in the units of the raising loop
        self.t_max = t_max
        super().__init__(msg or f'Reflectivity not stationary by t_max={t_max}')


class ResourceRefusal(QrWaveException):
    """
    The predicted memory footprint exceeds the allowed budget.

    :param required: Predicted bytes
    :param limit: Allowed bytes
    """

    def __init__(self, required: int, limit: int) -> None:
        #: Predicted footprint in bytes
        self.required = required
        #: Budget in bytes
        self.limit = limit
        super().__init__(
            f'Run needs an estimated {required} bytes, budget is {limit} bytes'
        )
