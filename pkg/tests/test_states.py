import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from collective_lab.errors import NotUnit
from collective_lab.linalg import proj
from collective_lab.povm import symmetry_kit
from collective_lab.states import (
    GOLDEN,
    bell_states,
    bloch_vector,
    haar_random_ket,
    haar_random_kets,
    icosahedron_states,
    icosahedron_vectors,
    ket_from_bloch,
    make_rng,
    octahedron_states,
    psi_theta,
    three_copy,
)

from conftest import unit_kets

s = 1 / np.sqrt(2)


def test_octahedron_entries():
    states = octahedron_states()
    assert [e.label for e in states] == [f"psi{j}" for j in range(1, 7)]
    np.testing.assert_allclose(states[0].ket, [1, 0])
    np.testing.assert_allclose(states[4].ket, [s, 1j * s])


def test_octahedron_overlaps():
    kets = [e.ket for e in octahedron_states()]
    for j in range(6):
        for k in range(j + 1, 6):
            want = 0.0 if (j // 2 == k // 2) else 0.5
            assert abs(abs(np.vdot(kets[j], kets[k])) ** 2 - want) < 1e-15


def test_octahedron_resolution():
    total = sum(proj(e.ket) for e in octahedron_states())
    np.testing.assert_allclose(total, 3 * np.eye(2), atol=1e-12)


def test_icosahedron_first_vector():
    np.testing.assert_allclose(icosahedron_vectors()[0], np.array([1, GOLDEN, 0]) / np.sqrt(1 + GOLDEN**2))


def test_icosahedron_unit_and_angles():
    n = icosahedron_vectors()
    np.testing.assert_allclose(np.linalg.norm(n, axis=1), 1, atol=1e-15)
    dots = [n[i] @ n[j] for i in range(12) for j in range(i + 1, 12)]
    assert len(dots) == 66
    np.testing.assert_allclose(np.arccos(max(dots)), np.arccos(1 / np.sqrt(5)), atol=1e-12)


def test_icosahedron_kets_roundtrip():
    for e, n in zip(icosahedron_states(), icosahedron_vectors()):
        assert abs(np.linalg.norm(e.ket) - 1) < 1e-12
        np.testing.assert_allclose(bloch_vector(e.ket), n, atol=1e-12)
        np.testing.assert_allclose(ket_from_bloch(bloch_vector(e.ket)), e.ket, atol=1e-12)


@pytest.mark.parametrize(
    "n, ket",
    [((0, 0, 1), (1, 0)), ((1, 0, 0), (s, s)), ((0, 0, -1), (0, 1))],
)
def test_ket_from_bloch_poles(n, ket):
    np.testing.assert_allclose(ket_from_bloch(n), ket, atol=1e-15)


def test_ket_from_bloch_rejects_non_unit():
    with pytest.raises(NotUnit):
        ket_from_bloch((0, 0, 1.1))


@given(unit_kets(2))
def test_bloch_roundtrip_up_to_phase(k):
    back = ket_from_bloch(bloch_vector(k))
    assert abs(abs(np.vdot(back, k)) - 1) < 1e-9


def test_psi_theta():
    np.testing.assert_allclose(psi_theta(0), [1, 0])
    np.testing.assert_allclose(psi_theta(np.pi / 4), [s, s])
    np.testing.assert_allclose(psi_theta(np.pi / 2), [0, 1], atol=1e-16)


def test_haar_moments():
    kets = haar_random_kets(make_rng(3), 100_000)
    p0 = np.abs(kets[:, 0]) ** 2
    assert abs(np.mean(p0 - np.abs(kets[:, 1]) ** 2)) < 0.01
    assert abs(np.mean(p0) - 0.5) < 0.005
    assert abs(np.mean(p0**4) - 0.2) < 0.005


def test_haar_single_normalized():
    k = haar_random_ket(make_rng(0))
    assert k.shape == (2,) and abs(np.linalg.norm(k) - 1) < 1e-12


def test_substreams_independent_of_order():
    a = make_rng(5, 1, 2).random(4)
    make_rng(5, 0, 0).random(100)
    np.testing.assert_array_equal(a, make_rng(5, 1, 2).random(4))
    assert not np.array_equal(a, make_rng(5, 2, 1).random(4))


def test_three_copy_basis_and_uniform():
    np.testing.assert_array_equal(three_copy([1, 0]), np.eye(8)[0])
    np.testing.assert_array_equal(three_copy([0, 1]), np.eye(8)[7])
    np.testing.assert_allclose(three_copy([s, s]), np.full(8, 1 / (2 * np.sqrt(2))))


@given(unit_kets(2))
def test_three_copy_is_symmetric(k):
    v = three_copy(k)
    assert abs(np.linalg.norm(v) - 1) < 1e-12
    np.testing.assert_allclose(symmetry_kit().P3 @ v, v, atol=1e-12)


def test_bell_states():
    b = bell_states()
    np.testing.assert_allclose(b[0].ket, [s, 0, 0, s])
    gram = np.array([[np.vdot(x.ket, y.ket) for y in b] for x in b])
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-15)
    np.testing.assert_allclose(proj(b[3].ket), symmetry_kit().P2A, atol=1e-15)
