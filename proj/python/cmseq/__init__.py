"""Gaussian conditionally-Markov sequence toolkit."""

from cmseq._core import *  # noqa: F401,F403
from cmseq._core import __version__  # noqa: F401
