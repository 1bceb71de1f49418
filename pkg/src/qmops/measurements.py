"""Generalized measurements.

POVMs and instruments (one detection operator per outcome), the Born rule,
state reduction, canonical Naimark extensions, the quantum roulette with its
probe extension, and a few special instruments: the demolitive
photodetector, the "measure A, prepare an eigenstate of B" instrument, and
the trine POVM.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .config import get_tolerances, scale
from .errors import DimensionMismatchError, NormalizationError, ValidationError, ZeroProbabilityOutcome
from .linalg import dag, kron, ket, partial_trace, projector
from .states import ZERO_PROBABILITY, DensityOperator, Diagnostic, assert_density

COMPLETENESS_TOL = 1e-9


def _labels(labels, n: int) -> tuple:
    if labels is None:
        return tuple(range(n))
    labels = tuple(labels)
    if len(labels) != n:
        raise DimensionMismatchError(f"{len(labels)} labels for {n} operators")
    return labels


def _stack(ops) -> np.ndarray:
    ops = [linalg.as_square(o) for o in ops]
    if not ops:
        raise DimensionMismatchError("need at least one operator")
    shapes = {o.shape for o in ops}
    if len(shapes) != 1:
        raise DimensionMismatchError(f"operators have different shapes {sorted(shapes)}")
    return np.stack(ops)


@dataclass(frozen=True, eq=False)
class POVM:
    labels: tuple
    elements: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self):
        return len(self.elements)

    def is_projective(self, tol: float = 1e-10) -> bool:
        for i, a in enumerate(self.elements):
            for j, b in enumerate(self.elements):
                target = a if i == j else np.zeros_like(a)
                if np.max(np.abs(a @ b - target)) > tol:
                    return False
        return True


@dataclass(frozen=True, eq=False)
class Instrument:
    labels: tuple
    detection_ops: tuple[np.ndarray, ...]

    @property
    def dim(self) -> int:
        return self.detection_ops[0].shape[0]

    def __len__(self):
        return len(self.detection_ops)


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    label: object
    probability: float
    conditional_state: DensityOperator


@dataclass(frozen=True, eq=False)
class MeasurementResult:
    """Records for outcomes with nonzero probability plus the labels left out."""

    records: list[MeasurementRecord]
    omitted: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def probabilities(self) -> dict:
        out = {r.label: r.probability for r in self.records}
        out.update({label: 0.0 for label in self.omitted})
        return out


def check_povm(elements) -> Diagnostic:
    els = _stack(elements)
    tol = get_tolerances()
    violations = {}
    herm = max(linalg.hermiticity_violation(e) for e in els)
    if herm > tol.herm * scale(els):
        violations["hermiticity"] = herm
    min_eig = min(float(np.linalg.eigvalsh((e + dag(e)) / 2)[0]) for e in els)
    if min_eig < -tol.pos * scale(els):
        violations["positivity"] = -min_eig
    completeness = float(np.max(np.abs(els.sum(axis=0) - np.eye(els.shape[1]))))
    if completeness > COMPLETENESS_TOL:
        violations["completeness"] = completeness
    return Diagnostic(violations)


def assert_povm(elements, labels=None) -> POVM:
    els = _stack(elements)
    diag = check_povm(els)
    if not diag.ok:
        raise ValidationError(diag, "POVM")
    return POVM(_labels(labels, len(els)), tuple(els))


def check_instrument(ops) -> Diagnostic:
    ops = _stack(ops)
    completeness = float(np.max(np.abs(sum(dag(m) @ m for m in ops) - np.eye(ops.shape[1]))))
    if completeness > COMPLETENESS_TOL:
        return Diagnostic({"completeness": completeness})
    return Diagnostic()


def assert_instrument(ops, labels=None) -> Instrument:
    ops = _stack(ops)
    diag = check_instrument(ops)
    if not diag.ok:
        raise ValidationError(diag, "instrument")
    return Instrument(_labels(labels, len(ops)), tuple(ops))


def detection_to_povm(inst: Instrument) -> POVM:
    return assert_povm([dag(m) @ m for m in inst.detection_ops], inst.labels)


def povm_to_detection(povm: POVM, rotations: Sequence | None = None) -> Instrument:
    """Detection operators ``M_x = U_x sqrt(Pi_x)``; ``U_x`` defaults to the identity."""
    roots = [linalg.sqrtm_psd(e) for e in povm.elements]
    if rotations is None:
        return assert_instrument(roots, povm.labels)
    if len(rotations) != len(roots):
        raise DimensionMismatchError(f"{len(rotations)} rotations for {len(roots)} outcomes")
    ops = []
    for u, r in zip(rotations, roots):
        u = linalg.check_unitary(u)
        if u.shape != r.shape:
            raise DimensionMismatchError(f"rotation shape {u.shape} does not match {r.shape}")
        ops.append(u @ r)
    return assert_instrument(ops, povm.labels)


def _check_dim(rho: DensityOperator, d: int) -> None:
    if rho.dim != d:
        raise DimensionMismatchError(f"state is {rho.dim}-dim, measurement is {d}-dim")


def born_rule(rho: DensityOperator, povm: POVM) -> np.ndarray:
    _check_dim(rho, povm.dim)
    p = np.array([np.trace(rho.mat @ e).real for e in povm.elements])
    p[(p < 0) & (p >= -1e-10)] = 0.0
    return p


def measure(rho: DensityOperator, inst: Instrument) -> MeasurementResult:
    _check_dim(rho, inst.dim)
    records, omitted = [], []
    for label, m in zip(inst.labels, inst.detection_ops):
        branch = m @ rho.mat @ dag(m)
        p = float(np.trace(branch).real)
        if p <= ZERO_PROBABILITY:
            omitted.append(label)
            continue
        records.append(MeasurementRecord(label, p, assert_density(linalg.real_divide(branch, p))))
    return MeasurementResult(records, omitted)


def nonselective(rho: DensityOperator, inst: Instrument) -> DensityOperator:
    _check_dim(rho, inst.dim)
    out = sum(m @ rho.mat @ dag(m) for m in inst.detection_ops)
    return assert_density(out, rho.dims)


# --- Naimark extensions ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NaimarkExtension:
    """Ancilla state, global unitary on system ⊗ ancilla, and the ancilla basis
    ``P_x = |x><x|`` whose outcomes carry ``labels``."""

    system_dim: int
    ancilla_dim: int
    ancilla_state: np.ndarray
    global_unitary: np.ndarray
    labels: tuple

    @property
    def dims(self) -> tuple[int, int]:
        return (self.system_dim, self.ancilla_dim)

    def ancilla_projector(self, x: int) -> np.ndarray:
        return kron(np.eye(self.system_dim), projector(ket(x, self.ancilla_dim)))

    def embed(self) -> np.ndarray:
        """The isometry ``|phi> -> U |phi, omega>`` as a matrix."""
        return self.global_unitary @ kron(np.eye(self.system_dim), self.ancilla_state.reshape(-1, 1))

    def recovered_povm(self) -> list[np.ndarray]:
        """``<omega| U^dag (I ⊗ P_x) U |omega>`` for every ancilla outcome."""
        v = self.embed()
        return [dag(v) @ self.ancilla_projector(x) @ v for x in range(self.ancilla_dim)]

    def detection_ops(self) -> list[np.ndarray]:
        """``M_x |phi> = <x| U |phi, omega>``."""
        v = self.embed()
        d, n = self.system_dim, self.ancilla_dim
        return [v.reshape(d, n, d)[:, x, :] for x in range(n)]


def canonical_naimark(inst: Instrument, ancilla_state=None) -> NaimarkExtension:
    ops = list(inst.detection_ops)
    u, omega = linalg.dilation_unitary(ops, ancilla_state)
    return NaimarkExtension(inst.dim, len(ops), omega, u, inst.labels)


def _global_state(ext: NaimarkExtension, rho: DensityOperator) -> np.ndarray:
    _check_dim(rho, ext.system_dim)
    u = ext.global_unitary
    return u @ kron(rho.mat, projector(ext.ancilla_state)) @ dag(u)


def extension_statistics(ext: NaimarkExtension, rho: DensityOperator) -> np.ndarray:
    """``p_x = Tr[U (rho ⊗ |omega><omega|) U^dag (I ⊗ P_x)]``."""
    g = _global_state(ext, rho)
    p = np.array([np.trace(g @ ext.ancilla_projector(x)).real for x in range(ext.ancilla_dim)])
    p[(p < 0) & (p >= -1e-10)] = 0.0
    return p


def extension_conditional_states(ext: NaimarkExtension, rho: DensityOperator) -> list[tuple[float, DensityOperator | None]]:
    """System state after observing each ancilla outcome; ``None`` for null outcomes."""
    g = _global_state(ext, rho)
    out = []
    for x in range(ext.ancilla_dim):
        proj = ext.ancilla_projector(x)
        branch = proj @ g @ proj
        p = float(np.trace(branch).real)
        if p <= ZERO_PROBABILITY:
            out.append((p, None))
            continue
        out.append((p, assert_density(linalg.real_divide(partial_trace(branch, ext.dims, [0]), p))))
    return out


def extension_remote_states(ext: NaimarkExtension, rho_ab: DensityOperator) -> list[tuple[float, DensityOperator | None]]:
    """Conditional states of B when A (first factor of ``rho_ab``) is measured
    through the extension; ancilla C is appended and then traced out."""
    d_a = ext.system_dim
    if rho_ab.dims[0] != d_a or len(rho_ab.dims) != 2:
        raise DimensionMismatchError("expected a bipartite state whose first factor is the measured system")
    d_b = rho_ab.dims[1]
    n = ext.ancilla_dim
    # order A ⊗ C ⊗ B so that U acts on the two leading factors
    abc = kron(rho_ab.mat, projector(ext.ancilla_state))
    acb = linalg.permute_factors(abc, (d_a, d_b, n), (0, 2, 1))
    u = kron(ext.global_unitary, np.eye(d_b))
    g = u @ acb @ dag(u)
    out = []
    for x in range(n):
        proj = kron(ext.ancilla_projector(x), np.eye(d_b))
        branch = proj @ g @ proj
        p = float(np.trace(branch).real)
        if p <= ZERO_PROBABILITY:
            out.append((p, None))
            continue
        out.append((p, assert_density(linalg.real_divide(partial_trace(branch, (d_a, n, d_b), [2]), p))))
    return out


# --- quantum roulette ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RouletteProbe:
    """Probe realisation of the roulette: probe state ``sum_k sqrt(z_k)|theta_k>``
    and projectors ``Q_x = sum_k P_x^(k) ⊗ |theta_k><theta_k|`` on system ⊗ probe."""

    system_dim: int
    probe_dim: int
    probe_state: np.ndarray
    projectors: tuple[np.ndarray, ...]

    @property
    def dims(self) -> tuple[int, int]:
        return (self.system_dim, self.probe_dim)

    def projector_defect(self) -> float:
        """Largest entry of ``Q_x Q_x' - delta_xx' Q_x`` over all pairs."""
        worst = 0.0
        for i, a in enumerate(self.projectors):
            for j, b in enumerate(self.projectors):
                target = a if i == j else 0
                worst = max(worst, float(np.max(np.abs(a @ b - target))))
        return worst

    def _global(self, rho: DensityOperator) -> np.ndarray:
        _check_dim(rho, self.system_dim)
        return kron(rho.mat, projector(self.probe_state))

    def statistics(self, rho: DensityOperator) -> np.ndarray:
        g = self._global(rho)
        return np.array([np.trace(g @ q).real for q in self.projectors])

    def post_state(self, rho: DensityOperator, x: int) -> tuple[float, DensityOperator]:
        g = self._global(rho)
        q = self.projectors[x]
        branch = q @ g @ q
        p = float(np.trace(branch).real)
        if p <= ZERO_PROBABILITY:
            raise ZeroProbabilityOutcome(p)
        return p, assert_density(linalg.real_divide(partial_trace(branch, self.dims, [0]), p))


def quantum_roulette(bases: Sequence, weights: Sequence[float], labels=None) -> tuple[POVM, RouletteProbe]:
    """POVM ``Pi_x = sum_k z_k P_x^(k)`` and its probe extension.

    ``bases[k]`` is a unitary whose column ``x`` is the eigenvector of the
    ``k``-th observable for outcome ``x``; outcomes are shared across bases.
    """
    z = np.asarray(weights, dtype=float)
    if len(bases) != len(z):
        raise DimensionMismatchError(f"{len(bases)} bases for {len(z)} weights")
    if np.any(z < 0) or abs(z.sum() - 1) > 1e-12:
        raise NormalizationError(f"roulette weights {z.tolist()} are not a probability vector")
    bases = [linalg.check_unitary(b) for b in bases]
    d = bases[0].shape[0]
    if any(b.shape != (d, d) for b in bases):
        raise DimensionMismatchError("all bases must share one dimension")
    k_count = len(bases)
    proj = [[projector(b[:, x]) for x in range(d)] for b in bases]
    elements = [sum(z[k] * proj[k][x] for k in range(k_count)) for x in range(d)]
    povm = assert_povm(elements, labels)
    probe_state = np.sqrt(z).astype(complex)
    qs = tuple(
        sum(kron(proj[k][x], projector(ket(k, k_count))) for k in range(k_count))
        for x in range(d)
    )
    return povm, RouletteProbe(d, k_count, probe_state, qs)


def roulette_mixed_post_state(bases: Sequence, weights: Sequence[float], rho: DensityOperator, x: int) -> tuple[float, DensityOperator]:
    """``sum_k z_k P_x^(k) rho P_x^(k) / p_x`` computed directly, without the probe."""
    out = sum(z * projector(b[:, x]) @ rho.mat @ projector(b[:, x]) for z, b in zip(weights, bases))
    p = float(np.trace(out).real)
    return p, assert_density(linalg.real_divide(out, p))


def sigma_alpha_bases(k_count: int) -> list[np.ndarray]:
    """Eigenbases of ``cos(a) sigma_1 + sin(a) sigma_2`` at ``a = j pi / K``.

    Column 0 is the +1 eigenvector ``(|0> + e^{ia}|1>)/sqrt2``, column 1 the -1 one.
    """
    out = []
    for j in range(k_count):
        a = j * np.pi / k_count
        phase = np.exp(1j * a)
        out.append(np.array([[1, 1], [phase, -phase]], dtype=complex) / np.sqrt(2))
    return out


# --- special instruments ------------------------------------------------------


def projective_instrument(basis, labels=None) -> Instrument:
    basis = linalg.check_unitary(basis)
    return assert_instrument([projector(basis[:, x]) for x in range(basis.shape[1])], labels)


def photodetector(d: int) -> Instrument:
    """Demolitive photon counter on a Fock space truncated to ``d`` levels: ``M_n = |0><n|``."""
    return assert_instrument([np.outer(ket(0, d), ket(n, d)) for n in range(d)])


def heisenberg_instrument(basis_a, basis_b, target: int = 0) -> Instrument:
    """``M_a = |b><a|``: projective statistics of A, post-state always ``|b>``.

    ``basis_a`` and ``basis_b`` are unitaries whose columns are the
    eigenvectors; ``target`` selects the column of ``basis_b``.
    """
    basis_a = linalg.check_unitary(basis_a)
    basis_b = linalg.check_unitary(basis_b)
    if basis_a.shape != basis_b.shape:
        raise DimensionMismatchError("bases must act on the same space")
    b = basis_b[:, target]
    return assert_instrument([np.outer(b, basis_a[:, a].conj()) for a in range(basis_a.shape[1])])


def trine_states() -> list[np.ndarray]:
    angles = [2 * np.pi * x / 3 for x in range(3)]
    return [np.array([np.cos(t / 2), np.sin(t / 2)], dtype=complex) for t in angles]


def trine_povm() -> POVM:
    """Three elements ``(2/3)|theta_x><theta_x|`` with Bloch vectors 120 degrees apart."""
    return assert_povm([2 / 3 * projector(t) for t in trine_states()])


def trine_instrument() -> Instrument:
    return povm_to_detection(trine_povm())


# --- sampling ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SampleReport:
    labels: tuple
    counts: np.ndarray
    probabilities: np.ndarray
    n_shots: int
    seed: int

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.n_shots

    def sigma_bound(self, k: float = 5.0) -> np.ndarray:
        p = self.probabilities
        return k * np.sqrt(p * (1 - p) / self.n_shots)

    def within_bound(self, k: float = 5.0) -> np.ndarray:
        """Per-outcome flag ``|freq - p| <= k sigma``."""
        return np.abs(self.frequencies - self.probabilities) <= self.sigma_bound(k)


def sample_outcomes(rho: DensityOperator, inst: Instrument, n_shots: int, seed: int) -> SampleReport:
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    p = born_rule(rho, detection_to_povm(inst))
    p = np.clip(p, 0.0, None)
    p = p / p.sum()
    rng = np.random.Generator(np.random.PCG64(seed))
    counts = rng.multinomial(n_shots, p)
    return SampleReport(inst.labels, counts, p, n_shots, seed)
