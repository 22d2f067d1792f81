"""
Utility module containing helper functions and services.

This module contains:
- Structured logging with performance monitoring
- The error hierarchy and exit codes
- Named random streams
"""

from .errors import BNRobotError
from .logging import EnhancedLogger

__all__ = ['BNRobotError', 'EnhancedLogger']
