"""Equilibrium mean-variance policies under CKLS stochastic volatility."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
