"""
Configuration module for application settings.

This module contains:
- Runtime settings read from the environment
- Validated experiment, search and arena configuration models
"""

from .settings import config, Config, ExperimentConfig, SearchConfig, ArenaConfig

__all__ = ['config', 'Config', 'ExperimentConfig', 'SearchConfig', 'ArenaConfig']
