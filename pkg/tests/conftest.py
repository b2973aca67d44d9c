"""Top-level conftest.py"""

# pylint: disable=missing-function-docstring,redefined-outer-name,R0913
from os import environ
from dataclasses import replace
import pytest
from qr_wave.config import AbsorberConfig, SimConfig

ACCEPTANCE_ENV = 'QR_WAVE_ACCEPTANCE'


def acceptance_enabled() -> bool:
    """Desk-scale physics runs only happen when explicitly enabled"""
    return environ.get(ACCEPTANCE_ENV, '0') == '1'


@pytest.fixture(scope='session')
def skip_no_acceptance():
    def _skip_no_acceptance() -> None:
        if not acceptance_enabled():
            pytest.skip(f'Set {ACCEPTANCE_ENV}=1 to run acceptance checks')

    return _skip_no_acceptance


@pytest.fixture(scope='session')
def tiny_config():
    """A configuration small enough to propagate in a unit test"""

    def _tiny_config(**overrides) -> SimConfig:
        base = SimConfig(
            x_min=-0.2e-6,
            x_max=0.6e-6,
            L=20.0e-9,
            n_x=256,
            n_y=4,
            dt=5.0e-9,
            t_max=50.0e-9,
            A=0.0,
            delta=10.0e-9,
            sigma_x=40.0e-9,
            sigma_y=5.0e-9,
            x0=0.35e-6,
            observe_stride=2,
            absorber=AbsorberConfig(width=10.0e-9),
        )
        return replace(base, **overrides)

    return _tiny_config


@pytest.fixture(scope='session')
def desk_config():
    """The desk-scale grid used by the acceptance runs"""

    def _desk_config(**overrides) -> SimConfig:
        base = SimConfig(
            x_min=-0.75e-6,
            x_max=2.5e-6,
            n_x=2**13,
            n_y=2**5,
            dt=5.0e-9,
            A=0.0,
            delta=10.0e-9,
            x0=1.0e-6,
        )
        return replace(base, **overrides)

    return _desk_config
