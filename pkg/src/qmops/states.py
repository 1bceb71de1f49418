"""Density operators: construction, validation, information measures,
purification, reduction and conditional states."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .config import get_tolerances, scale
from .errors import (
    DimensionMismatchError,
    NormalizationError,
    NotAStateError,
    ValidationError,
    ZeroProbabilityOutcome,
)
from .linalg import PAULI, dag, hermitian_eig, kron, partial_trace

# Outcomes (and conditional states) below this probability are never divided by.
ZERO_PROBABILITY = 1e-12


@dataclass(frozen=True)
class Diagnostic:
    """Violated conditions mapped to their magnitudes; empty means valid."""

    violations: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return "ok"
        return ", ".join(f"{k} violated by {v:.3e}" for k, v in self.violations.items())


@dataclass(frozen=True, eq=False)
class DensityOperator:
    mat: np.ndarray
    dims: tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.mat if dtype is None else self.mat.astype(dtype)

    def expect(self, op) -> complex:
        return complex(np.trace(self.mat @ op))


@dataclass(frozen=True, eq=False)
class Ensemble:
    members: tuple[tuple[float, np.ndarray], ...]

    def __post_init__(self):
        members = tuple((float(p), np.asarray(psi, dtype=complex).ravel()) for p, psi in self.members)
        if not members:
            raise NormalizationError("empty ensemble")
        dims = {psi.size for _, psi in members}
        if len(dims) != 1:
            raise DimensionMismatchError(f"ensemble vectors have mixed dimensions {sorted(dims)}")
        for p, psi in members:
            if p < 0:
                raise NormalizationError(f"negative probability {p}")
            if abs(np.linalg.norm(psi) - 1) > 1e-12:
                raise NormalizationError(f"state vector has norm {np.linalg.norm(psi)!r}")
        total = sum(p for p, _ in members)
        if abs(total - 1) > 1e-9:
            raise NormalizationError(f"probabilities sum to {total!r}")
        object.__setattr__(self, "members", members)


@dataclass(frozen=True)
class BlochVector:
    r1: float
    r2: float
    r3: float

    def __post_init__(self):
        if self.norm() > 1 + 1e-9:
            raise NotAStateError(f"Bloch vector norm {self.norm():.6g} exceeds 1")

    def norm(self) -> float:
        return float(np.sqrt(self.r1**2 + self.r2**2 + self.r3**2))

    def as_array(self) -> np.ndarray:
        return np.array([self.r1, self.r2, self.r3])


def check_density(m) -> Diagnostic:
    m = linalg.as_square(m)
    tol = get_tolerances()
    s = scale(m)
    violations = {}
    herm = linalg.hermiticity_violation(m)
    if herm > tol.herm * s:
        violations["hermiticity"] = herm
    w = np.linalg.eigvalsh((m + dag(m)) / 2)
    if w[0] < -tol.pos * s:
        violations["positivity"] = float(-w[0])
    tr_dev = abs(np.trace(m) - 1)
    if tr_dev > 1e-9:
        violations["trace"] = float(tr_dev)
    return Diagnostic(violations)


def assert_density(m, dims: Sequence[int] | None = None) -> DensityOperator:
    """Validate ``m`` as a density operator.

    Raises :class:`~qmops.errors.ValidationError` whose ``diagnostic`` lists
    each violated condition (hermiticity, positivity, trace) with its size.
    """
    m = linalg.as_square(m)
    dims = linalg.check_dims(dims if dims is not None else (m.shape[0],), m.shape[0])
    diag = check_density(m)
    if not diag.ok:
        raise ValidationError(diag, "density operator")
    return DensityOperator(m.copy(), dims)


def pure(psi, dims: Sequence[int] | None = None) -> DensityOperator:
    psi = np.asarray(psi, dtype=complex).ravel()
    return assert_density(linalg.projector(psi / np.linalg.norm(psi)), dims)


def maximally_mixed(d: int) -> DensityOperator:
    return DensityOperator(np.eye(d, dtype=complex) / d, (d,))


def product(*states: DensityOperator) -> DensityOperator:
    mat = linalg.kron_all(*[s.mat for s in states])
    dims = tuple(d for s in states for d in s.dims)
    return DensityOperator(mat, dims)


def density_from_ensemble(ensemble, dims: Sequence[int] | None = None) -> DensityOperator:
    if not isinstance(ensemble, Ensemble):
        ensemble = Ensemble(tuple(ensemble))
    d = ensemble.members[0][1].size
    rho = sum(p * linalg.projector(psi) for p, psi in ensemble.members)
    return assert_density(np.asarray(rho).reshape(d, d), dims)


def _clipped_eigenvalues(rho: DensityOperator) -> np.ndarray:
    w = hermitian_eig(rho.mat).eigenvalues
    tol = get_tolerances().pos * scale(rho.mat)
    if w[-1] < -tol:
        raise ValidationError(Diagnostic({"positivity": float(-w[-1])}), "density operator")
    return np.clip(w, 0.0, 1.0)


def purity_and_entropy(rho: DensityOperator, base="e") -> tuple[float, float]:
    """Purity ``Tr[rho^2]`` and von Neumann entropy (natural log unless ``base=2``)."""
    w = _clipped_eigenvalues(rho)
    mu = float(np.sum(w**2))
    nz = w[w > 0]
    s = float(-np.sum(nz * np.log(nz)))
    if base in (2, "2"):
        s /= np.log(2)
    elif base != "e":
        raise ValueError(f"unsupported log base {base!r}")
    return mu, max(s, 0.0)


def purify(rho: DensityOperator, ancilla_unitary=None) -> tuple[np.ndarray, tuple[int, int]]:
    """Return ``(vector, (d, k))`` with ``Tr_K |phi>><<phi| == rho``.

    The ancilla dimension ``k`` is the number of eigenvalues above 1e-12 and
    its basis is the canonical one, optionally rotated by ``ancilla_unitary``.
    """
    spectrum = hermitian_eig(rho.mat)
    keep = spectrum.eigenvalues > 1e-12
    w = spectrum.eigenvalues[keep]
    v = spectrum.eigenvectors[:, keep]
    k = int(keep.sum())
    theta = np.eye(k, dtype=complex)
    if ancilla_unitary is not None:
        theta = linalg.check_unitary(ancilla_unitary)
        if theta.shape[0] != k:
            raise DimensionMismatchError(f"ancilla unitary must be {k}x{k}")
    phi = sum(np.sqrt(w[j]) * np.kron(v[:, j], theta[:, j]) for j in range(k))
    return np.asarray(phi), (rho.dim, k)


def reduce(rho: DensityOperator, keep) -> DensityOperator:
    mat = partial_trace(rho.mat, rho.dims, keep)
    keep = [keep] if isinstance(keep, (int, np.integer)) else sorted(set(keep))
    return assert_density(mat, tuple(rho.dims[k] for k in keep))


def conditional_state(rho_ab: DensityOperator, effect) -> tuple[float, DensityOperator]:
    """Probability of ``effect`` on the first factor and the resulting state of the rest.

    ``rho_Bx = Tr_A[rho_AB (effect ⊗ I)] / p``.  Raises
    :class:`~qmops.errors.ZeroProbabilityOutcome` when ``p <= 1e-12``.
    """
    if len(rho_ab.dims) < 2:
        raise DimensionMismatchError("conditional state needs a multipartite state")
    effect = linalg.as_square(effect)
    d_a = rho_ab.dims[0]
    if effect.shape[0] != d_a:
        raise DimensionMismatchError(f"effect is {effect.shape[0]}-dim, first factor is {d_a}-dim")
    rest = int(np.prod(rho_ab.dims[1:]))
    weighted = rho_ab.mat @ kron(effect, np.eye(rest))
    p = float(np.trace(weighted).real)
    if p <= ZERO_PROBABILITY:
        raise ZeroProbabilityOutcome(p)
    keep = list(range(1, len(rho_ab.dims)))
    mat = linalg.real_divide(partial_trace(weighted, rho_ab.dims, keep), p)
    # Tr_A[rho (E⊗I)] is Hermitian only up to rounding when E is not a projector
    mat = (mat + dag(mat)) / 2
    return p, assert_density(mat, rho_ab.dims[1:])


def bloch_vector(rho: DensityOperator) -> BlochVector:
    if rho.dim != 2:
        raise DimensionMismatchError("Bloch representation needs a qubit")
    r = [float(np.trace(rho.mat @ s).real) for s in PAULI[1:]]
    return BlochVector(*r)


def from_bloch(r) -> DensityOperator:
    if not isinstance(r, BlochVector):
        r = BlochVector(*[float(x) for x in r])
    mat = (PAULI[0] + r.r1 * PAULI[1] + r.r2 * PAULI[2] + r.r3 * PAULI[3]) / 2
    return DensityOperator(mat, (2,))
