"""Supercomplier shares, characteristics and assumption tests."""

from ._core import *  # noqa: F401,F403
from ._core import Error, ConfigError, DataError, EstimationError, Table

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
