"""Vulnerability propagation and defense investment on device networks."""

from ._core import *  # noqa: F401,F403
from ._core import VulnpropError

__all__ = [name for name in dir() if not name.startswith("_")]
