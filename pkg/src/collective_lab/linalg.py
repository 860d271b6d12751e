"""Small dense complex linear algebra.

Operators are plain ``numpy`` complex arrays of shape ``(d, d)`` and kets are
arrays of shape ``(d,)``. Everything here is pure and works on the small
dimensions used by the package (8x8 three-qubit operators, at most 64).
"""

from functools import reduce

import numpy as np

from .errors import NotHermitian, NotPSD

HERMITIAN_TOL = 1e-12
PSD_CLAMP = 1e-10
PSD_REJECT = 1e-8


def as_operator(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"operator must be square, got shape {a.shape}")
    return a


def dagger(a):
    return np.conj(np.asarray(a)).T


def kron(*ops):
    """Tensor product of any number of operators or kets, left to right."""
    return reduce(np.kron, (np.asarray(op, dtype=complex) for op in ops))


def proj(ket):
    """Rank-1 projector ``|k><k|``."""
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def hermitian_residual(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a - dagger(a)))) if a.size else 0.0


def _round_robin(n):
    """Rounds of disjoint index pairs covering every pair once (circle method)."""
    players = list(range(n)) + ([None] if n % 2 else [])
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            if p is not None and q is not None:
                pairs.append((min(p, q), max(p, q)))
        rounds.append(pairs)
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _round_rotation(a, pairs):
    """Unitary that annihilates ``a[p, q]`` for each disjoint pair at once."""
    n = a.shape[0]
    g = np.eye(n, dtype=complex)
    for p, q in pairs:
        apq = a[p, q]
        mag = abs(apq)
        if mag < 1e-300:
            continue
        phase = apq / mag
        tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
        t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
        c = 1.0 / np.sqrt(1.0 + t * t)
        s = t * c
        # diag(1, conj(phase)) @ [[c, s], [-s, c]] restricted to (p, q)
        g[p, p] = c
        g[p, q] = s
        g[q, p] = -s * np.conj(phase)
        g[q, q] = c * np.conj(phase)
    return g


def herm_eig(a, max_sweeps=50):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Rotations on disjoint index pairs are applied together, one round-robin
    round at a time. Returns ``(eigenvalues, vectors)`` with eigenvalues
    ascending and the eigenvectors as the columns of a unitary matrix.

    Raises
    ------
    NotHermitian
        If ``a`` deviates from its adjoint by more than ``1e-12`` (max norm).
    """
    a = as_operator(a)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if hermitian_residual(a) > HERMITIAN_TOL * scale:
        raise NotHermitian(f"hermitian residual {hermitian_residual(a):.3e}")
    n = a.shape[0]
    work = (a + dagger(a)) / 2
    v = np.eye(n, dtype=complex)
    tol = 1e-15 * max(np.linalg.norm(work), 1e-300)
    offdiag = ~np.eye(n, dtype=bool)
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        if np.sqrt(np.sum(np.abs(work[offdiag]) ** 2)) <= tol:
            break
        for pairs in rounds:
            g = _round_rotation(work, pairs)
            work = dagger(g) @ work @ g
            v = v @ g
    w = np.real(np.diag(work))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def clamp_spectrum(w, rel=1e-13):
    """Zero eigenvalues that are negative or below ``rel`` times the largest."""
    w = np.asarray(w, dtype=float)
    floor = rel * max(1.0, float(np.max(np.abs(w)))) if w.size else 0.0
    return np.where(w > floor, w, 0.0)


def psd_sqrt(a):
    """Principal square root of a positive semidefinite operator.

    Eigenvalues in ``[-1e-8, 0)`` are treated as roundoff and clamped to zero.
    """
    w, v = herm_eig(a)
    if w.size and w[0] < -PSD_REJECT:
        raise NotPSD(f"minimum eigenvalue {w[0]:.3e}")
    return (v * np.sqrt(clamp_spectrum(w))) @ dagger(v)


def min_eigenvalue(a):
    return float(herm_eig(a)[0][0])


def rank(a, tol=1e-8):
    """Number of eigenvalues of a Hermitian operator above ``tol``."""
    return int(np.sum(herm_eig(a)[0] > tol))
