"""
bnrobot - Boolean-network controllers for a phototactic robot.

This package provides:
- Boolean network dynamics and attractor analysis
- A square-arena simulator for a differential-drive robot with a light sensor and a clap detector
- The sensor/network/wheel coupling and the trial error functional
- Stochastic descent over truth-table bits and a repeated-design experiment harness
"""

__version__ = "1.0.0"
__description__ = "Design of Boolean-network robot controllers by stochastic descent"

# Core imports for package-level access
from .config.settings import config
from .core.network import BooleanNetwork, NetworkState
from .core.search import stochastic_descent
from .core.harness import run_experiment

__all__ = [
    'BooleanNetwork',
    'NetworkState',
    'stochastic_descent',
    'run_experiment',
    'config'
]
