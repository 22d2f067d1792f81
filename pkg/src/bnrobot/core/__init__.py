"""
Core module containing the simulation and search logic.

This module contains:
- Boolean networks and attractor enumeration
- Arena simulation and robot kinematics
- Network/robot coupling and the error functional
- Stochastic descent and the experiment harness
- Result storage
"""

from .network import BooleanNetwork, NetworkState
from .attractors import AttractorInfo, enumerate_attractors
from .search import SearchResult, stochastic_descent
from .harness import RunSummary, run_experiment

__all__ = ['BooleanNetwork', 'NetworkState', 'AttractorInfo', 'enumerate_attractors',
           'SearchResult', 'stochastic_descent', 'RunSummary', 'run_experiment']
