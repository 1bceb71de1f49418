"""Dense complex linear algebra over multipartite spaces.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.  Tensor
products follow the first-factor-major convention of :func:`numpy.kron`::

    (a ⊗ b)[i*nb + j, k*mb + l] = a[i, k] * b[j, l]

and every reshape in the package (partial traces, Choi matrices,
vectorisation) is derived from that single rule.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import get_tolerances, scale
from .errors import (
    DimensionCapError,
    DimensionMismatchError,
    HermiticityError,
    IsometryError,
    UnitarityError,
)

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_0, SIGMA_1, SIGMA_2, SIGMA_3)


def as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def as_square(m) -> np.ndarray:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    return m


def check_cap(n: int) -> None:
    cap = get_tolerances().dim_cap
    if n > cap:
        raise DimensionCapError(f"dimension {n} exceeds cap {cap}")


def check_dims(dims: Sequence[int], n: int) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise DimensionMismatchError(f"invalid subsystem dimensions {dims}")
    if int(np.prod(dims)) != n:
        raise DimensionMismatchError(f"dims {dims} (product {int(np.prod(dims))}) do not match size {n}")
    return dims


def dag(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    return np.outer(v, v.conj())


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def kron(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    check_cap(max(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]))
    return np.kron(a, b)


def kron_all(*ms) -> np.ndarray:
    out = as_matrix(ms[0])
    for m in ms[1:]:
        out = kron(out, m)
    return out


def _normalize_keep(keep, n: int) -> list[int]:
    if isinstance(keep, (int, np.integer)):
        keep = [keep]
    keep = sorted({int(k) for k in keep})
    if not keep or len(keep) >= n or keep[0] < 0 or keep[-1] >= n:
        raise DimensionMismatchError(f"keep={keep} must be a nonempty proper subset of range({n})")
    return keep


def partial_trace(m, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    Kept factors stay in their original order.
    """
    m = as_square(m)
    dims = check_dims(dims, m.shape[0])
    n = len(dims)
    keep = _normalize_keep(keep, n)
    letters = string.ascii_letters
    rows = [letters[i] for i in range(n)]
    cols = [letters[n + i] if i in keep else letters[i] for i in range(n)]
    out = [rows[i] for i in keep] + [cols[i] for i in keep]
    spec = "".join(rows) + "".join(cols) + "->" + "".join(out)
    t = np.einsum(spec, m.reshape(dims + dims))
    d = int(np.prod([dims[i] for i in keep]))
    return t.reshape(d, d)


def partial_transpose(m, dims: Sequence[int], which: int) -> np.ndarray:
    m = as_square(m)
    dims = check_dims(dims, m.shape[0])
    n = len(dims)
    if n < 2:
        raise DimensionMismatchError("partial transpose needs at least two factors")
    if not 0 <= which < n:
        raise DimensionMismatchError(f"factor index {which} out of range for {n} factors")
    t = m.reshape(dims + dims)
    t = np.swapaxes(t, which, n + which)
    return t.reshape(m.shape)


def permute_factors(m, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: factor ``order[k]`` of the input becomes factor ``k``."""
    m = as_square(m)
    dims = check_dims(dims, m.shape[0])
    n = len(dims)
    order = [int(o) for o in order]
    if sorted(order) != list(range(n)):
        raise DimensionMismatchError(f"{order} is not a permutation of range({n})")
    t = m.reshape(dims + dims).transpose(order + [n + o for o in order])
    return t.reshape(m.shape)


def hermiticity_violation(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m - dag(m)))) if m.size else 0.0


def unitarity_deviation(u) -> float:
    u = np.asarray(u)
    return float(np.max(np.abs(dag(u) @ u - np.eye(u.shape[1]))))


def check_unitary(u, tol: float = 1e-9) -> np.ndarray:
    u = as_square(u)
    dev = unitarity_deviation(u)
    if dev > tol:
        raise UnitarityError(dev)
    return u


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues in descending order; ``eigenvectors[:, k]`` pairs with ``eigenvalues[k]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __iter__(self):
        for k in range(len(self.eigenvalues)):
            yield float(self.eigenvalues[k]), self.eigenvectors[:, k]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dag(v)


def hermitian_eig(m) -> Spectrum:
    """Spectral decomposition of a Hermitian matrix.

    The input is symmetrised before solving.  Each eigenvector is rephased so
    that its largest-magnitude entry (first one on ties) is real and positive,
    which makes the output reproducible for a given input.
    """
    m = as_square(m)
    tol = get_tolerances()
    violation = hermiticity_violation(m)
    if violation > tol.herm * scale(m):
        raise HermiticityError(violation)
    w, v = np.linalg.eigh((m + dag(m)) / 2)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    for k in range(v.shape[1]):
        mags = np.abs(v[:, k])
        j = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
        v[:, k] *= np.exp(-1j * np.angle(v[j, k]))
    return Spectrum(w, v)


def sqrtm_psd(m) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix, negative noise clipped."""
    spec = hermitian_eig(m)
    w = np.clip(spec.eigenvalues, 0.0, None)
    return (spec.eigenvectors * np.sqrt(w)) @ dag(spec.eigenvectors)


def extend_isometry_to_unitary(columns, total_dim: int) -> np.ndarray:
    """Complete orthonormal columns to a ``total_dim`` unitary.

    ``columns`` is either a sequence of vectors or a 2-d array whose columns
    are the vectors.  The inputs become the leading columns unchanged; the rest
    come from Gram-Schmidt over the canonical basis in index order (candidates
    with residual norm below 1e-8 are skipped, each residual is
    re-orthogonalised once).
    """
    check_cap(total_dim)
    if isinstance(columns, np.ndarray) and columns.ndim == 2:
        v = columns.astype(complex)
    else:
        cols = [np.asarray(c, dtype=complex).ravel() for c in columns]
        v = np.stack(cols, axis=1) if cols else np.zeros((total_dim, 0), dtype=complex)
    if v.shape[0] != total_dim or v.shape[1] > total_dim:
        raise DimensionMismatchError(f"{v.shape[1]} columns of length {v.shape[0]} cannot extend to dim {total_dim}")
    if v.shape[1]:
        dev = float(np.max(np.abs(dag(v) @ v - np.eye(v.shape[1]))))
        if dev > get_tolerances().orth:
            raise IsometryError(dev)
    basis = [v[:, k] for k in range(v.shape[1])]
    for j in range(total_dim):
        if len(basis) == total_dim:
            break
        r = ket(j, total_dim)
        q = np.stack(basis, axis=1) if basis else None
        if q is not None:
            r = r - q @ (dag(q) @ r)
            r = r - q @ (dag(q) @ r)
        norm = np.linalg.norm(r)
        if norm < 1e-8:
            continue
        basis.append(r / norm)
    return np.stack(basis, axis=1)


def real_divide(m, p: float) -> np.ndarray:
    """``m / p`` for real ``p``, dividing real and imaginary parts separately.

    numpy promotes ``complex / float`` to a full complex division, which can
    round entries such as ``p / p`` to ``1 - 2**-53``.
    """
    m = np.asarray(m, dtype=complex)
    return m.real / p + 1j * (m.imag / p)


def max_abs_diff(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def iter_matrix_units(d: int) -> Iterable[np.ndarray]:
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            yield e


def dilation_unitary(ops, ancilla_state=None) -> tuple[np.ndarray, np.ndarray]:
    """Global unitary with ``U (e_i ⊗ omega) = sum_x M_x e_i ⊗ |x>``.

    Shared by Naimark extensions (``M_x`` detection operators) and Stinespring
    dilations (``M_x`` Kraus operators); requires ``sum_x M_x^dag M_x = I``.
    Returns ``(U, omega)``.

    The defining columns sit at the positions of ``e_i ⊗ e_0``; the remaining
    columns come from :func:`extend_isometry_to_unitary`.  For a
    general ``omega`` the ancilla is first rotated by a unitary ``W`` with
    ``W e_0 = omega``.
    """
    d = ops[0].shape[1]
    n = len(ops)
    total = d * n
    check_cap(total)
    cols = np.zeros((total, d), dtype=complex)
    for x, m in enumerate(ops):
        cols[x::n, :] = m
    full = extend_isometry_to_unitary(cols, total)
    defining = [i * n for i in range(d)]
    others = [j for j in range(total) if j % n != 0]
    u0 = np.empty_like(full)
    u0[:, defining] = full[:, :d]
    u0[:, others] = full[:, d:]
    if ancilla_state is None:
        omega = ket(0, n)
        return u0, omega
    omega = np.asarray(ancilla_state, dtype=complex).ravel()
    if omega.size != n:
        raise DimensionMismatchError(f"ancilla state must have dimension {n}")
    omega = omega / np.linalg.norm(omega)
    w = extend_isometry_to_unitary([omega], n)
    return u0 @ kron(np.eye(d), dag(w)), omega
