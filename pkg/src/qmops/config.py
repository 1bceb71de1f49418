"""Numerical tolerances shared by every module.

Defaults can be overridden for a block of code::

    with tolerances(herm=1e-7):
        ...

Overrides live in a context variable, so concurrent threads and tasks each
see their own settings.
"""

from __future__ import annotations

import contextlib
import dataclasses
from contextvars import ContextVar
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-9
    orth: float = 1e-8
    pos: float = 1e-9
    # largest matrix dimension any constructor may produce
    dim_cap: int = 4096


_current: ContextVar[Tolerances] = ContextVar("qmops_tolerances", default=Tolerances())


def get_tolerances() -> Tolerances:
    return _current.get()


@contextlib.contextmanager
def tolerances(**overrides):
    token = _current.set(dataclasses.replace(_current.get(), **overrides))
    try:
        yield _current.get()
    finally:
        _current.reset(token)


def scale(m) -> float:
    """Scale factor ``max(1, max|m_ij|)`` applied to the relative tolerances."""
    m = np.asarray(m)
    if m.size == 0:
        return 1.0
    return max(1.0, float(np.max(np.abs(m))))
