"""Random matrices, states, instruments and channels.

All helpers take an explicit ``numpy.random.Generator`` (or a seed), never the
global RNG.
"""

from __future__ import annotations

import numpy as np

from .linalg import dag


def _rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def ginibre(rows: int, cols: int, rng=None) -> np.ndarray:
    rng = _rng(rng)
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_unitary(d: int, rng=None) -> np.ndarray:
    """Haar-distributed unitary (QR of a Ginibre matrix with the R-phase fix)."""
    q, r = np.linalg.qr(ginibre(d, d, rng))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_isometry(rows: int, cols: int, rng=None) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(rows, cols, rng))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state_vector(d: int, rng=None) -> np.ndarray:
    v = ginibre(d, 1, rng).ravel()
    return v / np.linalg.norm(v)


def random_density(d: int, rank: int | None = None, rng=None) -> np.ndarray:
    g = ginibre(d, rank or d, rng)
    rho = g @ dag(g)
    return rho / np.trace(rho).real


def random_hermitian(d: int, rng=None) -> np.ndarray:
    g = ginibre(d, d, rng)
    return (g + dag(g)) / 2


def random_kraus(d: int, n_ops: int, rng=None) -> list[np.ndarray]:
    """Kraus operators of a random CPTP map: blocks of a random ``(n*d) x d`` isometry."""
    v = random_isometry(n_ops * d, d, rng)
    return [v[k * d:(k + 1) * d, :] for k in range(n_ops)]


def random_ensemble(d: int, members: int, rng=None) -> list[tuple[float, np.ndarray]]:
    rng = _rng(rng)
    p = rng.dirichlet(np.ones(members))
    return [(float(pk), random_state_vector(d, rng)) for pk in p]
