import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmops import linalg, measurements as ms, rand, states
from qmops.errors import (
    DimensionMismatchError,
    NormalizationError,
    UnitarityError,
    ValidationError,
)

seeds = st.integers(0, 2**32 - 1)
KET0 = np.array([1, 0], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
SIGMA_X_BASIS = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def random_instrument(rng, d, n):
    return ms.assert_instrument(rand.random_kraus(d, n, rng))


def test_assert_povm_examples():
    p = ms.assert_povm([np.diag([1, 0]), np.diag([0, 1])])
    assert p.is_projective()
    p = ms.assert_povm([np.eye(2) / 2, np.eye(2) / 2])
    assert not p.is_projective()
    with pytest.raises(ValidationError) as exc:
        ms.assert_povm([np.eye(2) / 2, np.eye(2) / 4])
    assert exc.value.diagnostic.violations["completeness"] == pytest.approx(0.25)


def test_assert_povm_reports_negativity():
    with pytest.raises(ValidationError) as exc:
        ms.assert_povm([np.diag([1.2, 1]), np.diag([-0.2, 0])])
    assert exc.value.diagnostic.violations["positivity"] == pytest.approx(0.2)


def test_povm_element_count_is_unrestricted():
    n = 7
    els = [np.eye(2) / n] * n
    assert len(ms.assert_povm(els)) == n


def test_detection_to_povm_examples(rng):
    proj = ms.projective_instrument(SIGMA_X_BASIS)
    for m, e in zip(proj.detection_ops, ms.detection_to_povm(proj).elements):
        assert np.max(np.abs(m - e)) < 1e-15
    povm = ms.detection_to_povm(ms.photodetector(4))
    for n, e in enumerate(povm.elements):
        assert np.array_equal(e, np.diag(np.eye(4)[n]))
    povm = ms.detection_to_povm(random_instrument(rng, 2, 3))
    assert np.max(np.abs(sum(povm.elements) - np.eye(2))) < 1e-10


def test_povm_to_detection_examples():
    inst = ms.povm_to_detection(ms.assert_povm([np.eye(2) / 2, np.eye(2) / 2]))
    assert np.max(np.abs(inst.detection_ops[0] - np.eye(2) / np.sqrt(2))) < 1e-15
    inst = ms.povm_to_detection(ms.assert_povm([np.diag([1, 0]), np.diag([0, 1])]))
    assert np.max(np.abs(inst.detection_ops[1] - np.diag([0, 1]))) < 1e-15
    with pytest.raises(UnitarityError):
        ms.povm_to_detection(ms.trine_povm(), [np.eye(2), np.eye(2), 2 * np.eye(2)])
    with pytest.raises(DimensionMismatchError):
        ms.povm_to_detection(ms.trine_povm(), [np.eye(2)])


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 5))
def test_povm_detection_round_trip(seed, d, n):
    rng = np.random.default_rng(seed)
    povm = ms.detection_to_povm(random_instrument(rng, d, n))
    back = ms.detection_to_povm(ms.povm_to_detection(povm))
    for a, b in zip(back.elements, povm.elements):
        assert np.max(np.abs(a - b)) < 1e-9


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_unitary_freedom_in_detection_operators(seed):
    rng = np.random.default_rng(seed)
    povm = ms.detection_to_povm(random_instrument(rng, 3, 3))
    rots = [rand.random_unitary(3, rng) for _ in range(3)]
    plain = ms.povm_to_detection(povm)
    rotated = ms.povm_to_detection(povm, rots)
    for a, b in zip(ms.detection_to_povm(rotated).elements, povm.elements):
        assert np.max(np.abs(a - b)) < 1e-10
    rho = states.assert_density(rand.random_density(3, rng=rng))
    for r0, r1, u in zip(ms.measure(rho, plain), ms.measure(rho, rotated), rots):
        assert r0.probability == pytest.approx(r1.probability, abs=1e-10)
        moved = u @ r0.conditional_state.mat @ linalg.dag(u)
        assert np.max(np.abs(moved - r1.conditional_state.mat)) < 1e-10


def test_born_rule_examples(rng):
    povm = ms.detection_to_povm(random_instrument(rng, 2, 4))
    p = ms.born_rule(states.maximally_mixed(2), povm)
    assert np.max(np.abs(p - [np.trace(e).real / 2 for e in povm.elements])) < 1e-15
    p = ms.born_rule(states.pure(KET0), ms.detection_to_povm(ms.projective_instrument(SIGMA_X_BASIS)))
    assert np.max(np.abs(p - 0.5)) < 1e-15
    with pytest.raises(DimensionMismatchError):
        ms.born_rule(states.maximally_mixed(3), povm)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 4))
def test_born_rule_matches_ensemble_expansion(seed, d):
    rng = np.random.default_rng(seed)
    ens = rand.random_ensemble(d, 3, rng)
    rho = states.density_from_ensemble(ens)
    povm = ms.detection_to_povm(random_instrument(rng, d, 3))
    p = ms.born_rule(rho, povm)
    oracle = [sum(pk * np.vdot(psi, e @ psi).real for pk, psi in ens) for e in povm.elements]
    assert np.max(np.abs(p - oracle)) < 1e-10
    assert abs(p.sum() - 1) < 1e-9


def test_measure_examples():
    res = ms.measure(states.pure(PLUS), ms.projective_instrument(np.eye(2)))
    assert [r.probability for r in res] == pytest.approx([0.5, 0.5], abs=1e-15)
    assert np.array_equal(res.records[0].conditional_state.mat, np.diag([1, 0]))
    rho = states.pure(np.eye(4)[1])
    res = ms.measure(rho, ms.photodetector(4))
    assert len(res) == 1 and res.records[0].label == 1
    assert res.records[0].probability == 1
    assert np.array_equal(res.records[0].conditional_state.mat, np.diag([1, 0, 0, 0]))
    assert res.omitted == [0, 2, 3]
    assert res.probabilities() == {1: 1.0, 0: 0.0, 2: 0.0, 3: 0.0}


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 5))
def test_measure_agrees_with_born_rule(seed, d, n):
    rng = np.random.default_rng(seed)
    inst = random_instrument(rng, d, n)
    rho = states.assert_density(rand.random_density(d, rng=rng))
    born = ms.born_rule(rho, ms.detection_to_povm(inst))
    got = ms.measure(rho, inst).probabilities()
    assert np.max(np.abs(born - [got[label] for label in inst.labels])) < 1e-10
    assert abs(sum(got.values()) - 1) < 1e-9


def test_nonselective_examples(rng):
    out = ms.nonselective(states.pure(PLUS), ms.projective_instrument(np.eye(2)))
    assert np.max(np.abs(out.mat - np.eye(2) / 2)) < 1e-15
    rho = states.assert_density(rand.random_density(3, rng=rng))
    assert np.array_equal(ms.nonselective(rho, ms.assert_instrument([np.eye(3)])).mat, rho.mat)
    rho = states.assert_density(rand.random_density(4, rng=rng))
    out = ms.nonselective(rho, ms.photodetector(4))
    assert np.max(np.abs(out.mat - np.diag([1, 0, 0, 0]))) < 1e-15


def trine_oracle_probabilities():
    # |<theta_x|0>|^2 = cos^2(t_x / 2) with t_x = 0, 120, 240 degrees
    return np.array([2 / 3 * 1.0, 2 / 3 * 0.25, 2 / 3 * 0.25])


def test_trine_statistics_on_zero():
    p = ms.born_rule(states.pure(KET0), ms.trine_povm())
    assert np.max(np.abs(p - trine_oracle_probabilities())) < 1e-15
    ext = ms.canonical_naimark(ms.trine_instrument())
    p = ms.extension_statistics(ext, states.pure(KET0))
    assert np.max(np.abs(p - trine_oracle_probabilities())) < 1e-12
    assert abs(p.sum() - 1) < 1e-12


def test_canonical_naimark_examples():
    ext = ms.canonical_naimark(ms.projective_instrument(np.eye(2)))
    assert ext.global_unitary.shape == (4, 4)
    for got, want in zip(ext.recovered_povm(), [np.diag([1, 0]), np.diag([0, 1])]):
        assert np.max(np.abs(got - want)) < 1e-12
    ext = ms.canonical_naimark(ms.trine_instrument())
    assert ext.ancilla_dim == 3
    for got, want in zip(ext.recovered_povm(), ms.trine_povm().elements):
        assert np.max(np.abs(got - want)) < 1e-8
    ext = ms.canonical_naimark(ms.photodetector(4))
    for n, got in enumerate(ext.recovered_povm()):
        assert np.max(np.abs(got - np.diag(np.eye(4)[n]))) < 1e-12


def test_canonical_naimark_detection_ops_on_basis_vectors(rng):
    inst = random_instrument(rng, 3, 4)
    ext = ms.canonical_naimark(inst)
    assert np.array_equal(ext.ancilla_state, np.eye(4)[0])
    for i in range(3):
        phi = np.eye(3)[i]
        out = (ext.global_unitary @ np.kron(phi, ext.ancilla_state)).reshape(3, 4)
        for x, m in enumerate(inst.detection_ops):
            assert np.max(np.abs(out[:, x] - m @ phi)) < 1e-9


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 6))
def test_naimark_round_trip(seed, d, n):
    rng = np.random.default_rng(seed)
    inst = random_instrument(rng, d, n)
    ext = ms.canonical_naimark(inst)
    assert linalg.unitarity_deviation(ext.global_unitary) < 1e-9
    for got, want in zip(ext.recovered_povm(), ms.detection_to_povm(inst).elements):
        assert np.max(np.abs(got - want)) < 1e-8
    for got, want in zip(ext.detection_ops(), inst.detection_ops):
        assert np.max(np.abs(got - want)) < 1e-9
    rho = states.assert_density(rand.random_density(d, rng=rng))
    direct = {r.label: r for r in ms.measure(rho, inst)}
    for label, (p, post) in zip(ext.labels, ms.extension_conditional_states(ext, rho)):
        if post is None:
            assert label not in direct
            continue
        assert abs(p - direct[label].probability) < 1e-9
        assert np.max(np.abs(post.mat - direct[label].conditional_state.mat)) < 1e-8


def test_naimark_with_custom_ancilla_state(rng):
    inst = random_instrument(rng, 2, 3)
    omega = rand.random_state_vector(3, rng)
    ext = ms.canonical_naimark(inst, omega)
    for got, want in zip(ext.recovered_povm(), ms.detection_to_povm(inst).elements):
        assert np.max(np.abs(got - want)) < 1e-10


def test_extension_statistics_on_maximally_mixed(rng):
    inst = random_instrument(rng, 3, 4)
    ext = ms.canonical_naimark(inst)
    rho = states.maximally_mixed(3)
    p = ms.extension_statistics(ext, rho)
    assert np.max(np.abs(p - ms.born_rule(rho, ms.detection_to_povm(inst)))) < 1e-9


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_naimark_remote_conditional_states(seed):
    rng = np.random.default_rng(seed)
    inst = random_instrument(rng, 2, 3)
    ext = ms.canonical_naimark(inst)
    rho_ab = states.assert_density(rand.random_density(6, rng=rng), (2, 3))
    povm = ms.detection_to_povm(inst)
    for e, (p, post) in zip(povm.elements, ms.extension_remote_states(ext, rho_ab)):
        q, want = states.conditional_state(rho_ab, e)
        assert abs(p - q) < 1e-9
        assert np.max(np.abs(post.mat - want.mat)) < 1e-9


def test_roulette_single_basis_is_projective(rng):
    u = rand.random_unitary(3, rng)
    povm, probe = ms.quantum_roulette([u], [1.0])
    assert povm.is_projective()
    assert probe.probe_dim == 1


def test_roulette_sigma_z_sigma_x():
    povm, probe = ms.quantum_roulette([np.eye(2), SIGMA_X_BASIS], [0.5, 0.5])
    e0 = povm.elements[0]
    assert np.max(np.abs(e0 - np.array([[0.75, 0.25], [0.25, 0.25]]))) < 1e-15
    assert np.linalg.norm(e0 @ e0 - e0) > 0.1
    assert probe.projector_defect() < 1e-10
    assert np.allclose(probe.probe_state, [np.sqrt(0.5)] * 2)


def test_roulette_discretized_sigma_alpha():
    bases = ms.sigma_alpha_bases(8)
    povm, probe = ms.quantum_roulette(bases, np.full(8, 1 / 8))
    assert np.max(np.abs(sum(povm.elements) - np.eye(2))) < 1e-12
    assert probe.projector_defect() < 1e-10
    # Pi_0 = (I + c sigma_1 + s sigma_2) / 2 with c, s the mean cosine / sine of the angles
    angles = np.arange(8) * np.pi / 8
    c, s = np.cos(angles).mean(), np.sin(angles).mean()
    want = (np.eye(2) + c * linalg.SIGMA_1 + s * linalg.SIGMA_2) / 2
    assert np.max(np.abs(povm.elements[0] - want)) < 1e-12
    assert not povm.is_projective()


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(1, 4))
def test_roulette_probe_reproduces_mixture(seed, k):
    rng = np.random.default_rng(seed)
    bases = [rand.random_unitary(3, rng) for _ in range(k)]
    z = rng.dirichlet(np.ones(k))
    povm, probe = ms.quantum_roulette(bases, z)
    rho = states.assert_density(rand.random_density(3, rng=rng))
    assert np.max(np.abs(probe.statistics(rho) - ms.born_rule(rho, povm))) < 1e-10
    for x in range(3):
        p, post = probe.post_state(rho, x)
        q, mixed = ms.roulette_mixed_post_state(bases, z, rho, x)
        assert abs(p - q) < 1e-10
        assert np.max(np.abs(post.mat - mixed.mat)) < 1e-9


def test_roulette_rejects_bad_weights():
    with pytest.raises(NormalizationError):
        ms.quantum_roulette([np.eye(2), SIGMA_X_BASIS], [0.6, 0.6])
    with pytest.raises(DimensionMismatchError):
        ms.quantum_roulette([np.eye(2)], [0.5, 0.5])


def test_heisenberg_instrument_qubit(rng):
    inst = ms.heisenberg_instrument(np.eye(2), SIGMA_X_BASIS, target=0)
    rho = states.assert_density(rand.random_density(2, rng=rng))
    p = ms.born_rule(rho, ms.detection_to_povm(inst))
    assert np.max(np.abs(p - np.diag(rho.mat).real)) < 1e-12
    for r in ms.measure(rho, inst):
        assert np.max(np.abs(r.conditional_state.mat - linalg.projector(PLUS))) < 1e-12


def test_heisenberg_instrument_same_bases_and_random_d3(rng):
    u = rand.random_unitary(3, rng)
    inst = ms.heisenberg_instrument(u, u, target=2)
    rho = states.assert_density(rand.random_density(3, rng=rng))
    for r in ms.measure(rho, inst):
        assert np.max(np.abs(r.conditional_state.mat - linalg.projector(u[:, 2]))) < 1e-12
    inst = ms.heisenberg_instrument(rand.random_unitary(3, rng), rand.random_unitary(3, rng))
    assert np.max(np.abs(sum(linalg.dag(m) @ m for m in inst.detection_ops) - np.eye(3))) < 1e-12


def test_sampling_examples():
    inst = ms.projective_instrument(np.eye(2))
    rep = ms.sample_outcomes(states.pure(KET0), inst, 1000, seed=3)
    assert rep.counts.tolist() == [1000, 0]
    rho = states.pure(PLUS)
    a = ms.sample_outcomes(rho, inst, 10_000, seed=11)
    b = ms.sample_outcomes(rho, inst, 10_000, seed=11)
    assert np.array_equal(a.counts, b.counts)
    assert a.counts.sum() == 10_000
    with pytest.raises(ValueError):
        ms.sample_outcomes(rho, inst, 0, seed=1)


def test_sampling_trine_within_five_sigma():
    rep = ms.sample_outcomes(states.pure(KET0), ms.trine_instrument(), 100_000, seed=2024)
    assert np.max(np.abs(rep.probabilities - trine_oracle_probabilities())) < 1e-12
    assert rep.within_bound(5.0).all()
