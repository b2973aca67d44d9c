"""Top-level init file"""

__version__ = '0.1.0'
from .config import SimConfig, ValidatedConfig, load_config, validate
from .propagator import Propagator, run
from .sweep import SweepSpec, run_sweep

__all__ = [
    'SimConfig',
    'ValidatedConfig',
    'load_config',
    'validate',
    'Propagator',
    'run',
    'SweepSpec',
    'run_sweep',
]
