"""Quantum operations as completely positive maps.

Conventions: operators are vectorised row-major, ``vec(X)[i*d + j] = X[i, j]``,
so ``vec(A X B) = (A ⊗ B^T) vec(X)``.  Choi matrices use the normalised
maximally entangled vector, ``C = (E ⊗ I)(|phi>><<phi|)`` with
``|phi>> = sum_k |kk> / sqrt(d)``; a trace-preserving map has ``Tr C = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .config import get_tolerances, scale
from .errors import (
    DimensionMismatchError,
    NormalizationError,
    NotCompletelyPositiveError,
    QMError,
    ValidationError,
)
from .linalg import PAULI, dag, hermitian_eig, kron, partial_trace, partial_transpose, projector
from .states import ZERO_PROBABILITY, DensityOperator, Diagnostic, assert_density

PRESERVING = "preserving"
NON_INCREASING = "non-increasing"
COMPLETENESS_TOL = 1e-9
# Kraus operators extracted from a Choi matrix with smaller weight are dropped.
KRAUS_WEIGHT_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class KrausChannel:
    kraus_ops: tuple[np.ndarray, ...]
    trace_flag: str = PRESERVING

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def is_trace_preserving(self) -> bool:
        return self.trace_flag == PRESERVING

    def __len__(self):
        return len(self.kraus_ops)

    def as_map(self) -> "LinearMap":
        return LinearMap(self.dim, kraus=self.kraus_ops)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x)
        return sum(m @ x @ dag(m) for m in self.kraus_ops)


@dataclass(frozen=True, eq=False)
class LinearMap:
    """A linear map on d x d matrices, held either as Kraus operators (CP by
    construction) or as a ``d^2 x d^2`` superoperator on row-major vectors."""

    dim: int
    kraus: tuple[np.ndarray, ...] | None = None
    superop: np.ndarray | None = None

    def __post_init__(self):
        if (self.kraus is None) == (self.superop is None):
            raise ValueError("give exactly one of kraus / superop")
        if self.superop is not None and self.superop.shape != (self.dim**2, self.dim**2):
            raise DimensionMismatchError(f"superoperator must be {self.dim**2}x{self.dim**2}")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if self.kraus is not None:
            return sum(m @ x @ dag(m) for m in self.kraus)
        return (self.superop @ x.reshape(-1)).reshape(self.dim, self.dim)

    def superoperator(self) -> np.ndarray:
        if self.superop is not None:
            return self.superop
        return superoperator(self.kraus)


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    mat: np.ndarray
    input_dim: int

    def apply(self, x) -> np.ndarray:
        """Recover the map's action: ``E(X) = d Tr_2[C (I ⊗ X^T)]``."""
        d = self.input_dim
        x = np.asarray(x, dtype=complex)
        return d * partial_trace(self.mat @ kron(np.eye(d), x.T), (d, d), [0])

    def eigenvalues(self) -> np.ndarray:
        return hermitian_eig(self.mat).eigenvalues


@dataclass(frozen=True, eq=False)
class Dilation:
    system_dim: int
    ancilla_dim: int
    ancilla_state: np.ndarray
    global_unitary: np.ndarray

    def apply(self, rho) -> np.ndarray:
        """``Tr_B[U (rho ⊗ |omega><omega|) U^dag]``."""
        rho = np.asarray(rho, dtype=complex)
        u = self.global_unitary
        g = u @ kron(rho, projector(self.ancilla_state)) @ dag(u)
        return partial_trace(g, (self.system_dim, self.ancilla_dim), [0])


@dataclass(frozen=True, eq=False)
class CPVerdict:
    completely_positive: bool
    min_eigenvalue: float
    witness: np.ndarray | None

    def __bool__(self):
        return self.completely_positive


@dataclass(frozen=True, eq=False)
class PPTResult:
    min_eigenvalue: float
    npt: bool
    eigenvalues: np.ndarray


def superoperator(ops: Sequence[np.ndarray]) -> np.ndarray:
    return sum(np.kron(m, m.conj()) for m in ops)


def _stack(ops) -> list[np.ndarray]:
    ops = [linalg.as_square(o) for o in ops]
    if not ops:
        raise DimensionMismatchError("need at least one Kraus operator")
    if len({o.shape for o in ops}) != 1:
        raise DimensionMismatchError("Kraus operators must share one shape")
    return ops


def check_channel(ops) -> Diagnostic:
    ops = _stack(ops)
    gram = sum(dag(m) @ m for m in ops)
    dev = float(np.max(np.abs(gram - np.eye(gram.shape[0]))))
    if dev <= COMPLETENESS_TOL:
        return Diagnostic()
    slack = np.linalg.eigvalsh(np.eye(gram.shape[0]) - (gram + dag(gram)) / 2)[0]
    if slack >= -get_tolerances().pos * scale(gram):
        return Diagnostic()
    return Diagnostic({"completeness": dev})


def assert_channel(ops) -> KrausChannel:
    """Validate Kraus operators; the trace flag is inferred from ``sum M^dag M``."""
    ops = _stack(ops)
    diag = check_channel(ops)
    if not diag.ok:
        raise ValidationError(diag, "trace non-increasing Kraus set")
    gram = sum(dag(m) @ m for m in ops)
    flag = PRESERVING if np.max(np.abs(gram - np.eye(gram.shape[0]))) <= COMPLETENESS_TOL else NON_INCREASING
    return KrausChannel(tuple(ops), flag)


def _check_dim(ch_dim: int, rho: DensityOperator):
    if rho.dim != ch_dim:
        raise DimensionMismatchError(f"state is {rho.dim}-dim, channel acts on {ch_dim}")


def apply(ch: KrausChannel, rho: DensityOperator) -> DensityOperator:
    """``E(rho) = sum_k M_k rho M_k^dag`` for a trace-preserving channel.

    Trace non-increasing channels go through :func:`apply_branch`, which never
    renormalises silently.
    """
    if not ch.is_trace_preserving:
        raise QMError("channel is trace non-increasing; use apply_branch")
    _check_dim(ch.dim, rho)
    return assert_density(ch(rho.mat), rho.dims)


def apply_branch(ch: KrausChannel, rho: DensityOperator) -> tuple[float, DensityOperator | None]:
    """Trace of the unnormalised output and the normalised state (``None`` if the trace vanishes)."""
    _check_dim(ch.dim, rho)
    out = ch(rho.mat)
    t = float(np.trace(out).real)
    if t <= ZERO_PROBABILITY:
        return t, None
    return t, assert_density(linalg.real_divide(out, t), rho.dims)


def dual(ch: KrausChannel) -> LinearMap:
    return LinearMap(ch.dim, kraus=tuple(dag(m) for m in ch.kraus_ops))


def apply_dual(ch: KrausChannel, x) -> np.ndarray:
    return dual(ch)(x)


def compose(e2: KrausChannel, e1: KrausChannel) -> KrausChannel:
    """``e2 ∘ e1`` with Kraus operators ``M2_k2 M1_k1``, ``k1`` running slowest."""
    if e1.dim != e2.dim:
        raise DimensionMismatchError("channels act on different dimensions")
    ops = [m2 @ m1 for m1 in e1.kraus_ops for m2 in e2.kraus_ops]
    return assert_channel(ops)


def choi(m) -> ChoiMatrix:
    if isinstance(m, KrausChannel):
        m = m.as_map()
    d = m.dim
    if m.kraus is not None:
        vecs = np.stack([k.reshape(-1) for k in m.kraus], axis=1)
        return ChoiMatrix(vecs @ dag(vecs) / d, d)
    s = m.superop.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    return ChoiMatrix(s / d, d)


def is_completely_positive(m) -> CPVerdict:
    c = choi(m) if not isinstance(m, ChoiMatrix) else m
    spectrum = hermitian_eig(c.mat)
    lam = float(spectrum.eigenvalues[-1])
    if lam >= -get_tolerances().pos * scale(c.mat):
        return CPVerdict(True, lam, None)
    return CPVerdict(False, lam, spectrum.eigenvectors[:, -1])


def kraus_from_choi(c: ChoiMatrix) -> KrausChannel:
    """Kraus operators ``M_k[i, j] = sqrt(d p_k) omega_k[i*d + j]`` from the
    eigen-decomposition ``C = sum_k p_k |omega_k>><<omega_k|``; at most d^2 of them."""
    d = c.input_dim
    spectrum = hermitian_eig(c.mat)
    lam = float(spectrum.eigenvalues[-1])
    if lam < -get_tolerances().pos * scale(c.mat):
        raise NotCompletelyPositiveError(lam, spectrum.eigenvectors[:, -1])
    ops = [
        np.sqrt(d * p) * spectrum.eigenvectors[:, k].reshape(d, d)
        for k, p in enumerate(spectrum.eigenvalues)
        if p > KRAUS_WEIGHT_FLOOR
    ]
    return assert_channel(ops)


def stinespring(ch: KrausChannel, ancilla_state=None) -> Dilation:
    """Unitary ``U |phi> ⊗ |omega> = sum_k M_k |phi> ⊗ |theta_k>`` on system ⊗ ancilla.

    Only trace-preserving channels are dilated; a single measurement branch
    should be dilated through its completed instrument instead.
    """
    if not ch.is_trace_preserving:
        raise QMError("only trace-preserving channels have a unitary dilation here")
    u, omega = linalg.dilation_unitary(list(ch.kraus_ops), ancilla_state)
    return Dilation(ch.dim, len(ch.kraus_ops), omega, u)


def choi_distance(a, b) -> float:
    ca, cb = choi(a), choi(b)
    if ca.input_dim != cb.input_dim:
        raise DimensionMismatchError("channels act on different dimensions")
    return float(np.max(np.abs(ca.mat - cb.mat)))


def same_channel(a, b, tol: float = 1e-9) -> bool:
    return choi_distance(a, b) <= tol


# --- catalogue --------------------------------------------------------------


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel((np.eye(d, dtype=complex),), PRESERVING)


def unitary_channel(u) -> KrausChannel:
    return assert_channel([linalg.check_unitary(u)])


def depolarizing(gamma: float) -> KrausChannel:
    """Qubit depolarizing channel, ``E(rho) = p rho + (1 - p) I/2`` with ``p = 1 - 4 gamma / 3``."""
    if not 0 <= gamma <= 1:
        raise ValueError(f"gamma={gamma} outside [0, 1]")
    ops = [np.sqrt(1 - gamma) * PAULI[0]] + [np.sqrt(gamma / 3) * s for s in PAULI[1:]]
    return assert_channel(ops)


def depolarizing_contraction(gamma: float) -> float:
    return 1 - 4 * gamma / 3


def random_unitary_channel(weights: Sequence[float], unitaries: Sequence) -> KrausChannel:
    w = np.asarray(weights, dtype=float)
    if len(w) != len(unitaries):
        raise DimensionMismatchError(f"{len(w)} weights for {len(unitaries)} unitaries")
    if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise NormalizationError(f"weights {w.tolist()} are not a probability vector")
    ops = [np.sqrt(p) * linalg.check_unitary(u) for p, u in zip(w, unitaries)]
    return assert_channel(ops)


def transposition_map(d: int) -> LinearMap:
    if d < 2:
        raise ValueError("transposition map needs d >= 2")
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return LinearMap(d, superop=s)


def ppt_check(rho: DensityOperator, dims: Sequence[int] | None = None, which: int = 1) -> PPTResult:
    """Spectrum of the partial transpose on factor ``which``; NPT iff min eigenvalue < -tau_pos."""
    dims = tuple(dims) if dims is not None else rho.dims
    pt = partial_transpose(rho.mat, dims, which)
    w = hermitian_eig(pt).eigenvalues
    lam = float(w[-1])
    return PPTResult(lam, lam < -get_tolerances().pos * scale(pt), w)
