import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collective_lab.errors import NegativeProbability, OutOfRange, ShapeMismatch
from collective_lab.linalg import proj
from collective_lab.povm import (
    Povm,
    e7_decomposition,
    e7_decomposition_check,
    measured_povm_fidelity,
    octahedron_projectors3,
    optimal_povm,
    outcome_probabilities,
    povm_fidelity,
    povm_fidelity_dense,
    reference_probabilities,
    reference_state_fidelity,
    symmetric_povm,
    symmetry_kit,
    validate_povm,
)
from collective_lab.states import make_rng, octahedron_states, three_copy

from conftest import unit_kets


def test_optimal_povm_traces_and_validation():
    p = optimal_povm()
    assert p.labels == tuple(f"E{j}" for j in range(1, 8))
    np.testing.assert_allclose([np.trace(e).real for e in p.elements], [2 / 3] * 6 + [4], atol=1e-12)
    report = validate_povm(p)
    assert report.passed
    assert report.completeness_residual <= 1e-10


def test_e7_annihilates_symmetric_subspace():
    kit = symmetry_kit()
    e7 = optimal_povm().element("E7")
    assert np.abs(kit.P3 @ e7 @ kit.P3).max() <= 1e-12


def test_octahedron_projectors_sum_to_symmetrizer():
    np.testing.assert_allclose(sum(octahedron_projectors3()), 1.5 * symmetry_kit().P3, atol=1e-12)


def test_doubled_element_fails_completeness():
    p = optimal_povm()
    bad = Povm((2 * p.elements[0],) + p.elements[1:], p.labels)
    report = validate_povm(bad)
    assert not report.passed
    assert abs(report.completeness_residual - 2 / 3) < 1e-12


def test_validation_report_json_keys():
    out = validate_povm(optimal_povm()).to_json()
    assert list(out) == ["element_label", "herm_residual", "min_eig", "completeness_residual", "pass"]
    assert out["pass"] is True
    json.dumps(out)


def test_empty_povm_fails():
    assert not validate_povm(Povm((), (), np.eye(8))).passed


def test_symmetry_kit_invariants():
    kit = symmetry_kit()
    np.testing.assert_allclose(kit.P3 @ kit.P3, kit.P3, atol=1e-15)
    assert abs(np.trace(kit.P3) - 4) < 1e-12
    np.testing.assert_allclose(kit.P2A @ kit.P2A, kit.P2A, atol=1e-15)
    assert abs(np.trace(kit.P2A) - 1) < 1e-12
    np.testing.assert_allclose(kit.W @ kit.W.conj().T, np.eye(8))
    np.testing.assert_allclose(kit.W @ kit.W @ kit.W, np.eye(8))
    np.testing.assert_allclose(kit.W12 @ kit.W12, np.eye(8))


def test_cyclic_permutation_moves_tensor_factors():
    kit = symmetry_kit()
    a, b, c = np.array([1, 0]), np.array([0, 1]), np.array([1, 1]) / np.sqrt(2)
    out = kit.W @ np.kron(np.kron(a, b), c)
    assert abs(abs(np.vdot(out, np.kron(np.kron(c, a), b))) - 1) < 1e-12


@settings(max_examples=100)
@given(unit_kets(2))
def test_symmetrizer_fixes_three_copies(k):
    v = three_copy(k)
    np.testing.assert_allclose(symmetry_kit().P3 @ v, v, atol=1e-12)


def test_e7_decomposition():
    assert e7_decomposition_check() <= 1e-12
    kit = symmetry_kit()
    e7 = optimal_povm().element("E7")
    np.testing.assert_allclose(kit.W.conj().T @ e7 @ kit.W, e7, atol=1e-12)
    assert abs(np.trace(kit.Pi) - 2) < 1e-12
    assert abs(np.trace((2 / 3) * sum(e7_decomposition())) - 4) < 1e-12


def test_probabilities_basis_state():
    rho = proj(np.eye(8)[0])
    probs = outcome_probabilities(optimal_povm(), rho)
    np.testing.assert_allclose(probs, [2 / 3, 0, 1 / 12, 1 / 12, 1 / 12, 1 / 12, 0], atol=1e-12)


def test_probabilities_plus_state():
    rho = proj(three_copy(octahedron_states()[2].ket))
    probs = outcome_probabilities(optimal_povm(), rho)
    np.testing.assert_allclose(probs, [1 / 12, 1 / 12, 2 / 3, 0, 1 / 12, 1 / 12, 0], atol=1e-12)


def test_probabilities_maximally_mixed():
    probs = outcome_probabilities(optimal_povm(), np.eye(8) / 8)
    assert abs(probs[6] - 0.5) < 1e-12


def test_negative_probability_raises():
    p = Povm((-np.eye(8),), ("bad",))
    with pytest.raises(NegativeProbability):
        outcome_probabilities(p, np.eye(8) / 8)


def test_small_negative_probability_clamped():
    p = Povm((-1e-12 * np.eye(8),), ("tiny",))
    assert outcome_probabilities(p, np.eye(8) / 8)[0] == 0.0


@settings(max_examples=100)
@given(unit_kets(2))
def test_pure_three_copy_never_hits_e7(k):
    probs = outcome_probabilities(optimal_povm(), proj(three_copy(k)))
    assert probs[6] <= 1e-12
    assert abs(probs.sum() - 1) < 1e-9


def test_reference_table_rows():
    table = reference_probabilities(optimal_povm())
    for j in range(6):
        for k in range(6):
            want = 2 / 3 if j == k else (0 if j // 2 == k // 2 else 1 / 12)
            assert abs(table[j, k] - want) < 1e-12
    np.testing.assert_allclose(table[:, :6].sum(axis=1), 1, atol=1e-12)


def test_self_fidelity_symmetric_support():
    p = symmetric_povm()
    assert p.support_dim == 4
    assert abs(povm_fidelity(p, p) - 1) < 1e-12


def test_swapped_labels_lower_fidelity():
    p = symmetric_povm()
    el = list(p.elements)
    el[2], el[3] = el[3], el[2]
    swapped = Povm(tuple(el), p.labels, p.support)
    assert povm_fidelity(p, swapped) < 1 - 0.1


def test_fidelity_against_flat_povm_matches_dense_oracle():
    p = symmetric_povm()
    flat = Povm(tuple((2 / 3) * p.support / 4 for _ in range(6)), p.labels, p.support)
    blockwise = povm_fidelity(p, flat)
    dense = povm_fidelity_dense(p, flat)
    # each block: tr sqrt(sqrt(A) B sqrt(A)) = sqrt(2/3 * 2/3 * 1/4) for rank-1 A along a Sym3 vector
    closed = (6 * np.sqrt((2 / 3) * (2 / 3) / 4) / 4) ** 2
    assert abs(blockwise - dense) < 1e-12
    assert abs(blockwise - closed) < 1e-12


def _random_perturbed(seed, strength=0.05):
    rng = make_rng(seed)
    ideal = optimal_povm()
    els = []
    for e in ideal.elements[:6]:
        v = np.linalg.eigh(e)[1][:, -1]
        w = v + strength * (rng.standard_normal(8) + 1j * rng.standard_normal(8))
        w /= np.linalg.norm(w)
        els.append(rng.uniform(0.5, 0.7) * proj(w))
    return ideal, els


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_blockwise_matches_dense(seed):
    ideal, els = _random_perturbed(seed)
    a = Povm(ideal.elements[:6], ideal.labels[:6], symmetry_kit().P3)
    b = Povm(tuple(els), ideal.labels[:6], symmetry_kit().P3)
    f = povm_fidelity(a, b)
    assert 0 <= f <= 1
    assert abs(f - povm_fidelity_dense(a, b)) < 1e-9
    assert abs(f - povm_fidelity(b, a)) < 1e-9


def test_reference_shortcut_matches_blockwise():
    # rank-1 elements along |psi_j>^3 with weights at most 2/3 (a sub-normalized measurement):
    # the shortcut equals the blockwise fidelity on Sym3 with d = 4
    ideal = symmetric_povm()
    rng = make_rng(11)
    for _ in range(100):
        c = rng.uniform(0.3, 2 / 3, size=6)
        b = Povm(tuple(cj * proj(three_copy(e.ket)) for cj, e in zip(c, octahedron_states())), ideal.labels, ideal.support)
        diag = np.diag(reference_probabilities(Povm(b.elements, b.labels))[:, :6])
        assert abs(povm_fidelity(ideal, b) - reference_state_fidelity(diag)) < 1e-9


def test_reference_state_fidelity_values():
    assert abs(reference_state_fidelity([2 / 3] * 6) - 1) < 1e-15
    assert abs(reference_state_fidelity([0.5] * 6) - 0.75) < 1e-15
    assert abs(measured_povm_fidelity(optimal_povm()) - 1) < 1e-12


def test_reference_state_fidelity_errors():
    with pytest.raises(OutOfRange):
        reference_state_fidelity([1.2] + [0.5] * 5)
    with pytest.raises(ShapeMismatch):
        reference_state_fidelity([0.5] * 5)


def test_fidelity_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        povm_fidelity(optimal_povm(), symmetric_povm())
