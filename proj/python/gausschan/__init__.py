"""Gaussian channels as matrix pairs (X, Y) on 2n-dimensional phase space."""

from ._core import *  # noqa: F401,F403
from ._core import GausschanError, cli  # noqa: F401

__version__ = "0.1.0"
