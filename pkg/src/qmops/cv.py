"""Single-mode truncated Fock spaces, joint measurement of conjugate
quadratures with a replica mode, and uncertainty relations.

Truncation at ``N`` photons breaks ``[Q, P] = i`` only on the top level
(``[Q, P][N, N] = -iN``); states supported well below the cutoff see exact
moments.  The joint observable ``X + iY`` is never diagonalised; every
statement about the joint measurement is checked through moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import linalg
from .errors import CutoffError, PreconditionError
from .rand import random_density
from .states import DensityOperator

DEFAULT_CUTOFF = 40
TAIL_TOL = 1e-8
REPLICA_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class FockSpace:
    cutoff: int

    @property
    def dim(self) -> int:
        return self.cutoff + 1

    @cached_property
    def a(self) -> np.ndarray:
        return np.diag(np.sqrt(np.arange(1, self.dim)), 1).astype(complex)

    @cached_property
    def adag(self) -> np.ndarray:
        return linalg.dag(self.a)

    @cached_property
    def Q(self) -> np.ndarray:
        return (self.adag + self.a) / np.sqrt(2)

    @cached_property
    def P(self) -> np.ndarray:
        return 1j * (self.adag - self.a) / np.sqrt(2)

    @cached_property
    def number(self) -> np.ndarray:
        return np.diag(np.arange(self.dim)).astype(complex)

    def fock(self, n: int) -> np.ndarray:
        return linalg.ket(n, self.dim)


def build_fock(cutoff: int) -> FockSpace:
    if cutoff < 2:
        raise ValueError("cutoff must be at least 2")
    linalg.check_cap(cutoff + 1)
    return FockSpace(int(cutoff))


def coherent_state(alpha: complex, space: FockSpace) -> np.ndarray:
    """Truncated coherent state, renormalised on the kept levels.

    Requires ``|alpha|^2 <= N/4`` and a discarded tail mass of at most 1e-8.
    """
    alpha = complex(alpha)
    r2 = abs(alpha) ** 2
    if r2 > space.cutoff / 4:
        raise CutoffError(f"|alpha|^2 = {r2:.4g} exceeds cutoff/4 = {space.cutoff / 4:.4g}")
    if alpha == 0:
        return space.fock(0)
    n = np.arange(space.dim)
    log_mag = -r2 / 2 + n * math.log(abs(alpha)) - 0.5 * np.array([math.lgamma(k + 1) for k in n])
    amps = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    captured = float(np.sum(np.abs(amps) ** 2))
    if 1 - captured > TAIL_TOL:
        raise CutoffError(f"cutoff {space.cutoff} loses {1 - captured:.3e} of the coherent-state mass")
    return amps / np.sqrt(captured)


def embed_density(rho, space: FockSpace) -> DensityOperator:
    """Zero-pad a density matrix on the lowest levels into the truncated space."""
    rho = np.asarray(rho, dtype=complex)
    k = rho.shape[0]
    if k > space.dim:
        raise CutoffError(f"state needs {k} levels, space has {space.dim}")
    out = np.zeros((space.dim, space.dim), dtype=complex)
    out[:k, :k] = rho
    return DensityOperator(out, (space.dim,))


# --- uncertainty relations ---------------------------------------------------


def _expect(op, rho) -> complex:
    # Tr[op rho] without forming the product
    if sp.issparse(op):
        return complex(op.multiply(rho.T).sum())
    return complex(np.sum(op * rho.T))


@dataclass(frozen=True)
class UncertaintyReport:
    """Moments of a pair (X, Y) and both layers of the uncertainty relation.

    ``F_term`` uses ``F = XY - YX - 2<X><Y>`` exactly as that expression is
    usually printed; ``correlation_term`` uses the symmetrised
    ``{X, Y} - 2<X><Y>``, which is the quantity the Schwarz bound controls.
    """

    meanX: float
    meanY: float
    varX: float
    varY: float
    commutator_bound: float
    F_term: float
    correlation_term: float
    product: float

    def holds(self, tol: float = 1e-9) -> bool:
        """``varX varY >= correlation + commutator >= commutator`` within ``tol``."""
        upper = self.correlation_term + self.commutator_bound
        return self.product >= upper - tol and upper >= self.commutator_bound - tol


def uncertainty_check(rho: DensityOperator, x, y) -> UncertaintyReport:
    r = rho.mat
    if not sp.issparse(x):
        x = linalg.as_square(x)
        y = linalg.as_square(y)
    xr = x @ r
    yr = y @ r
    mx = _expect(x, r).real
    my = _expect(y, r).real
    x2 = _expect(x, xr).real
    y2 = _expect(y, yr).real
    xy = _expect(x, yr)  # Tr[X Y rho]
    yx = _expect(y, xr)
    c = (xy - yx) / 1j
    anti = (xy + yx).real - 2 * mx * my
    printed = xy - yx - 2 * mx * my
    var_x = x2 - mx**2
    var_y = y2 - my**2
    return UncertaintyReport(
        meanX=mx,
        meanY=my,
        varX=var_x,
        varY=var_y,
        commutator_bound=abs(c) ** 2 / 4,
        F_term=abs(printed) ** 2 / 4,
        correlation_term=anti**2 / 4,
        product=var_x * var_y,
    )


def mus_residual(psi, x, y, lam: complex) -> float:
    """``||(X + i lam Y) psi - (<X> + i lam <Y>) psi||``; zero exactly for minimum-uncertainty states."""
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    xp = x @ psi
    yp = y @ psi
    mx = np.vdot(psi, xp)
    my = np.vdot(psi, yp)
    return float(np.linalg.norm(xp + 1j * lam * yp - (mx + 1j * lam * my) * psi))


# --- joint measurement --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class JointPair:
    """Commuting pair on system ⊗ replica:
    ``X = Q_A ⊗ I + I ⊗ Q_B``, ``Y = P_A ⊗ I - I ⊗ P_B``."""

    space: FockSpace

    @cached_property
    def X_sparse(self) -> sp.csr_matrix:
        q = sp.csr_matrix(self.space.Q)
        eye = sp.identity(self.space.dim, dtype=complex, format="csr")
        return (sp.kron(q, eye) + sp.kron(eye, q)).tocsr()

    @cached_property
    def Y_sparse(self) -> sp.csr_matrix:
        p = sp.csr_matrix(self.space.P)
        eye = sp.identity(self.space.dim, dtype=complex, format="csr")
        return (sp.kron(p, eye) - sp.kron(eye, p)).tocsr()

    @property
    def X(self) -> np.ndarray:
        return self.X_sparse.toarray()

    @property
    def Y(self) -> np.ndarray:
        return self.Y_sparse.toarray()

    @property
    def dims(self) -> tuple[int, int]:
        return (self.space.dim, self.space.dim)

    def commutator(self) -> sp.csr_matrix:
        return (self.X_sparse @ self.Y_sparse - self.Y_sparse @ self.X_sparse).tocsr()


def joint_pair(space: FockSpace) -> JointPair:
    linalg.check_cap(space.dim**2)
    return JointPair(space)


@dataclass(frozen=True)
class JointReport:
    """Joint-measurement moments computed directly on ``rho_A ⊗ rho_B`` and
    through the single-mode right-hand sides, plus the added-noise split."""

    direct: UncertaintyReport
    varQ_A: float
    varP_A: float
    Q_B2: float
    P_B2: float
    intrinsic_bound: float

    @property
    def varX_rhs(self) -> float:
        return self.varQ_A + self.Q_B2

    @property
    def varY_rhs(self) -> float:
        return self.varP_A + self.P_B2

    @property
    def product_rhs(self) -> float:
        return self.varQ_A * self.varP_A + sum(self.added_noise_terms)

    @property
    def added_noise_terms(self) -> tuple[float, float, float]:
        return (self.varQ_A * self.P_B2, self.Q_B2 * self.varP_A, self.Q_B2 * self.P_B2)

    @property
    def lower_bound(self) -> float:
        """Intrinsic quarter-commutator bound plus the added noise."""
        return self.intrinsic_bound + sum(self.added_noise_terms)

    def as_dict(self) -> dict:
        return {
            "varX": self.direct.varX,
            "varY": self.direct.varY,
            "product": self.direct.product,
            "bound": self.intrinsic_bound,
            "added_noise_terms": list(self.added_noise_terms),
        }


def _single_mode_moments(rho: DensityOperator, space: FockSpace) -> tuple[float, float, float, float]:
    r = rho.mat
    q, p = space.Q, space.P
    return (
        _expect(q, r).real,
        _expect(p, r).real,
        _expect(q @ q, r).real,
        _expect(p @ p, r).real,
    )


def joint_statistics(pair: JointPair, rho_a: DensityOperator, rho_b: DensityOperator) -> JointReport:
    space = pair.space
    for rho in (rho_a, rho_b):
        if rho.dim != space.dim:
            raise PreconditionError(f"state is {rho.dim}-dim, mode is {space.dim}-dim")
    qb, pb, qb2, pb2 = _single_mode_moments(rho_b, space)
    if abs(qb) > REPLICA_TOL or abs(pb) > REPLICA_TOL:
        raise PreconditionError(f"replica must have zero mean quadratures, got <Q>={qb:.3e}, <P>={pb:.3e}")
    qa, pa, qa2, pa2 = _single_mode_moments(rho_a, space)
    joint = DensityOperator(linalg.kron(rho_a.mat, rho_b.mat), pair.dims)
    direct = uncertainty_check(joint, pair.X_sparse, pair.Y_sparse)
    comm = _expect(space.Q @ space.P - space.P @ space.Q, rho_a.mat)
    return JointReport(
        direct=direct,
        varQ_A=qa2 - qa**2,
        varP_A=pa2 - pa**2,
        Q_B2=qb2,
        P_B2=pb2,
        intrinsic_bound=abs(comm) ** 2 / 4,
    )


def random_truncated_density(space: FockSpace, support: int | None = None, rng=None) -> DensityOperator:
    """Random mixed state on the lowest ``support`` levels (default ``N // 2``)."""
    support = support or space.cutoff // 2
    return embed_density(random_density(support, rng=rng), space)
