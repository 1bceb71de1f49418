"""Finite-dimensional quantum mechanics toolkit: density operators, POVMs and
instruments, Naimark and Stinespring dilations, Kraus/Choi channels, and
joint measurement of conjugate quadratures on truncated Fock spaces."""

from . import channels, config, cv, errors, linalg, matrixio, measurements, rand, states
from .config import get_tolerances, tolerances

__version__ = "0.1.0"

__all__ = [
    "channels",
    "config",
    "cv",
    "errors",
    "linalg",
    "matrixio",
    "measurements",
    "rand",
    "states",
    "get_tolerances",
    "tolerances",
]
