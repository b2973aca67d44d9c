"""Base Stepper Class"""

import typing as t
import logging
from pprint import pformat
from time import perf_counter
from .exceptions import NonStationary

logger = logging.getLogger('qr_wave.Stepper')

# pylint: disable=R0912


class Stepper:
    """Stepper Parent Class"""

    def __init__(
        self,
        t_max: float,  # How long is too long
        stride: int = 20,  # Steps between checks
    ) -> None:
        if t_max is None or not t_max > 0:
            msg = f'Stepper t_max must be a positive time, got {t_max!r}'
            logger.critical(msg)
            raise ValueError(msg)
        if stride < 1:
            msg = f'Stepper stride must be at least 1, got {stride}'
            logger.critical(msg)
            raise ValueError(msg)
        #: Propagation time after which the loop gives up
        self.t_max = t_max
        #: Number of :py:meth:`advance` calls between observations
        self.stride = stride
        self.waitstr = 'for Stepper class to initialize'
        #: Only changes to True when a child has something to report on failure
        self.do_run_report = False

    @property
    def time(self) -> float:
        """
        This will be redefined by each child class

        :getter: Returns the elapsed simulated time
        :type: float
        """
        return 0.0

    @property
    def exhausted(self) -> bool:
        """
        :getter: Returns ``True`` once :py:attr:`time` has reached :py:attr:`t_max`
        :type: bool
        """
        return self.time >= self.t_max

    @property
    def check(self) -> bool:
        """
        This will be redefined by each child class

        :getter: Returns if the run has reached its goal
        :type: bool
        """
        return False

    def advance(self) -> None:
        """This will be redefined by each child class. Performs one step."""
        msg = f'{type(self).__name__} does not implement advance()'
        logger.critical(msg)
        raise NotImplementedError(msg)

    def report(self) -> t.Iterator[str]:
        """Lines logged when the loop fails. Redefined by child classes."""
        return iter(())

    @staticmethod
    def prettystr(obj: t.Any) -> str:
        """Run parameters in insertion order, one per line, for debug logging"""
        return f"\n{pformat(obj, indent=2, width=100, sort_dicts=False)}"

    def wait(self, frequency: int = 10) -> None:
        """
        Advance until :py:meth:`check` succeeds. :py:meth:`check` is called once
        before the first step and after every :py:attr:`stride` steps.

        Progress is logged every `frequency` checks. If :py:attr:`t_max` is
        reached without :py:meth:`check` returning ``True``, the lines of
        :py:meth:`report` are logged (when :py:attr:`do_run_report` is set) and
        :py:exc:`~.qr_wave.exceptions.NonStationary` is raised.

        :param frequency: The number of checks between progress log lines.
        """
        start_time = perf_counter()
        success = False
        checks = 0
        logger.debug('Only logging every %s checks', frequency)
        while True:
            response = self.check
            checks += 1
            loggit = checks % max(frequency, 1) == 0
            # Goal reached.
            if response:
                logger.debug('The wait %s is over.', self.waitstr)
                total = f'{perf_counter() - start_time:.2f}'
                logger.debug('Elapsed wall time: %s seconds', total)
                success = True
                break
            # Not success, and out of propagation time
            if self.exhausted:
                break
            if loggit:
                logger.debug(
                    'The wait %s is ongoing. Simulated time %.6g of %.6g after %s '
                    'checks.',
                    self.waitstr,
                    self.time,
                    self.t_max,
                    checks,
                )
            for _ in range(self.stride):
                self.advance()
                if self.exhausted:
                    break

        if not success:
            msg = (
                f'The wait {self.waitstr} did not complete by the time limit of '
                f'{self.t_max}'
            )
            logger.warning(msg)
            if self.do_run_report:
                for line in self.report():
                    logger.info('RUN REPORT: %s', line)
            raise NonStationary(self.t_max, msg)
