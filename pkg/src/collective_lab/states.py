"""Qubit state catalog, Bloch conversions, Haar sampling and three-copy lifting."""

from typing import NamedTuple

import numpy as np

from .errors import NotUnit
from .linalg import kron

SQRT2 = np.sqrt(2.0)
GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


class CatalogEntry(NamedTuple):
    label: str
    ket: np.ndarray


def fix_phase(ket, tol=1e-14):
    """Rotate the global phase so the first nonzero amplitude is real and positive."""
    ket = np.asarray(ket, dtype=complex)
    nz = np.flatnonzero(np.abs(ket) > tol)
    if nz.size == 0:
        return ket.copy()
    a = ket[nz[0]]
    return ket * (abs(a) / a)


def ket_from_bloch(n):
    """Pure qubit state with Bloch vector ``n``.

    The global phase is fixed by making the first nonzero amplitude real and
    nonnegative.
    """
    n = np.asarray(n, dtype=float)
    norm = np.linalg.norm(n)
    if abs(norm - 1.0) > 1e-9:
        raise NotUnit(f"Bloch vector norm {norm!r} is not 1")
    nx, ny, nz = n / norm
    theta = np.arccos(np.clip(nz, -1.0, 1.0))
    phi = np.arctan2(ny, nx)
    ket = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    return fix_phase(ket)


def bloch_vector(ket):
    ket = np.asarray(ket, dtype=complex)
    return np.array([np.real(np.vdot(ket, p @ ket)) for p in PAULIS])


def octahedron_states():
    """The six states |0>, |1>, |+>, |->, |+i>, |-i>, labelled psi1..psi6."""
    kets = [
        [1, 0],
        [0, 1],
        [1 / SQRT2, 1 / SQRT2],
        [1 / SQRT2, -1 / SQRT2],
        [1 / SQRT2, 1j / SQRT2],
        [1 / SQRT2, -1j / SQRT2],
    ]
    return [CatalogEntry(f"psi{j + 1}", np.array(k, dtype=complex)) for j, k in enumerate(kets)]


def icosahedron_vectors():
    """Bloch vectors n1..n12 of a regular icosahedron (rows of a 12x3 array)."""
    g = GOLDEN
    raw = [
        (1, g, 0), (1, -g, 0), (-1, g, 0), (-1, -g, 0),
        (0, 1, g), (0, 1, -g), (0, -1, g), (0, -1, -g),
        (g, 0, 1), (-g, 0, 1), (g, 0, -1), (-g, 0, -1),
    ]
    return np.array(raw, dtype=float) / np.sqrt(1 + g * g)


def icosahedron_states():
    return [CatalogEntry(f"n{j + 1}", ket_from_bloch(n)) for j, n in enumerate(icosahedron_vectors())]


def psi_theta(theta):
    """cos(theta)|0> + sin(theta)|1>."""
    return np.array([np.cos(theta), np.sin(theta)], dtype=complex)


def bell_states():
    s = 1 / SQRT2
    return [
        CatalogEntry("Phi+", np.array([s, 0, 0, s], dtype=complex)),
        CatalogEntry("Phi-", np.array([s, 0, 0, -s], dtype=complex)),
        CatalogEntry("Psi+", np.array([0, s, s, 0], dtype=complex)),
        CatalogEntry("Psi-", np.array([0, s, -s, 0], dtype=complex)),
    ]


def make_rng(seed, *key):
    """Counter-based generator for the substream ``key`` of ``seed``.

    Streams for different keys are statistically independent, so work can be
    split and reordered without changing any draw.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def haar_random_kets(rng, size):
    """``size`` Haar-random qubit kets as rows of a ``(size, 2)`` array."""
    z = rng.standard_normal((size, 2)) + 1j * rng.standard_normal((size, 2))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_random_ket(rng):
    return haar_random_kets(rng, 1)[0]


def three_copy(ket):
    """k (x) k (x) k as an 8-dim ket; qubit 1 is the most significant index."""
    ket = np.asarray(ket, dtype=complex)
    return kron(ket, ket, ket)
