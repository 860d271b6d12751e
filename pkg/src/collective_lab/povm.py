"""The seven-outcome three-copy POVM, symmetric-subspace operators and POVM fidelity."""

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import NegativeProbability, OutOfRange, ShapeMismatch
from .linalg import clamp_spectrum, dagger, hermitian_residual, herm_eig, kron, proj, psd_sqrt
from .states import bell_states, octahedron_states, three_copy

HERM_TOL = 1e-12
PSD_TOL = 1e-10
COMPLETENESS_TOL = 1e-10
PROB_CLAMP = 1e-10

I2 = np.eye(2, dtype=complex)
I8 = np.eye(8, dtype=complex)


@dataclass(frozen=True)
class Povm:
    """Ordered list of effects, optionally complete only on a support projector."""

    elements: tuple
    labels: tuple
    support: np.ndarray = None

    def __post_init__(self):
        elements = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != len(elements):
            raise ShapeMismatch("one label per element required")
        if self.support is None and elements:
            object.__setattr__(self, "support", np.eye(elements[0].shape[0], dtype=complex))

    def __len__(self):
        return len(self.elements)

    @property
    def dim(self):
        if self.support is not None:
            return self.support.shape[0]
        return self.elements[0].shape[0] if self.elements else 0

    @property
    def support_dim(self):
        """Dimension of the declared support (the d in the POVM fidelity)."""
        return int(round(np.trace(self.support).real)) if self.support is not None else 0

    def element(self, label):
        return self.elements[self.labels.index(label)]


@dataclass
class ValidationReport:
    element_label: list
    herm_residual: list
    min_eig: list
    completeness_residual: float
    passed: bool = field(default=False)

    def to_json(self):
        return {
            "element_label": list(self.element_label),
            "herm_residual": [float(r) for r in self.herm_residual],
            "min_eig": [float(m) for m in self.min_eig],
            "completeness_residual": float(self.completeness_residual),
            "pass": bool(self.passed),
        }


def validate_povm(p, support=None):
    """Check Hermiticity, positivity and completeness of every element.

    Never raises; the report's ``passed`` flag carries the verdict. A POVM
    with no elements (or no declared support) fails completeness.
    """
    support = p.support if support is None else support
    herm, mins = [], []
    for e in p.elements:
        herm.append(hermitian_residual(e))
        mins.append(float(np.linalg.eigvalsh((e + dagger(e)) / 2)[0]))
    if support is None:
        completeness = float("inf")
    else:
        total = sum(p.elements, np.zeros_like(support))
        completeness = float(np.max(np.abs(total - support)))
    if not p.elements:
        completeness = max(completeness, 1.0)
    ok = (
        all(h <= HERM_TOL for h in herm)
        and all(m >= -PSD_TOL for m in mins)
        and completeness <= COMPLETENESS_TOL
    )
    return ValidationReport(list(p.labels), herm, mins, completeness, ok)


def octahedron_projectors3():
    """(|psi_j><psi_j|)^{(x)3} for the six octahedron states."""
    return [proj(three_copy(e.ket)) for e in octahedron_states()]


def optimal_povm():
    """E_j = 2/3 (|psi_j><psi_j|)^{(x)3} for j = 1..6 and E_7 = I - sum_j E_j."""
    six = [(2.0 / 3.0) * p for p in octahedron_projectors3()]
    e7 = I8 - sum(six)
    return Povm(tuple(six) + (e7,), tuple(f"E{j}" for j in range(1, 8)))


def symmetric_povm():
    """{E_1..E_6} as a POVM on the symmetric subspace (support P_3, d = 4)."""
    full = optimal_povm()
    return Povm(full.elements[:6], full.labels[:6], symmetry_kit().P3)


def permutation_operator(sigma):
    """Unitary sending the state of party ``k`` to position ``sigma[k]`` (three qubits)."""
    op = np.zeros((8, 8), dtype=complex)
    for bits in product((0, 1), repeat=3):
        out = [0, 0, 0]
        for k, b in enumerate(bits):
            out[sigma[k]] = b
        op[4 * out[0] + 2 * out[1] + out[2], 4 * bits[0] + 2 * bits[1] + bits[2]] = 1.0
    return op


@dataclass(frozen=True)
class SymmetryKit:
    P3: np.ndarray
    P2A: np.ndarray
    W: np.ndarray
    W12: np.ndarray
    Pi: np.ndarray


def symmetry_kit():
    w = permutation_operator((1, 2, 0))
    w12 = permutation_operator((1, 0, 2))
    w2 = w @ w
    p3 = (I8 + w + w2 + w12 + w @ w12 + w2 @ w12) / 6.0
    swap = np.zeros((4, 4), dtype=complex)
    for a, b in product((0, 1), repeat=2):
        swap[2 * b + a, 2 * a + b] = 1.0
    p2a = (np.eye(4) - swap) / 2.0
    return SymmetryKit(P3=p3, P2A=p2a, W=w, W12=w12, Pi=kron(p2a, I2))


def e7_decomposition(kit=None):
    """The three antisymmetric-pair terms whose sum (times 2/3) gives E_7."""
    kit = kit or symmetry_kit()
    w, pi = kit.W, kit.Pi
    return [pi, dagger(w) @ pi @ w, w @ pi @ dagger(w)]


def e7_decomposition_check():
    """max-norm residual of E_7 - 2/3 (Pi + W^+ Pi W + W Pi W^+)."""
    e7 = optimal_povm().element("E7")
    rhs = (2.0 / 3.0) * sum(e7_decomposition())
    return float(np.max(np.abs(e7 - rhs)))


def outcome_probabilities(p, rho):
    """tr(E_j rho) for every element, with roundoff negatives clamped to zero.

    Raises
    ------
    NegativeProbability
        If any probability is below ``-1e-10``.
    """
    rho = np.asarray(rho, dtype=complex)
    probs = np.array([np.real(np.sum(e.T * rho)) for e in p.elements])
    if probs.size and probs.min() < -PROB_CLAMP:
        raise NegativeProbability(f"probability {probs.min():.3e}")
    return np.clip(probs, 0.0, None)


def _trace_sqrt_sandwich(a, b):
    """tr sqrt(sqrt(a) b sqrt(a)) for PSD a, b."""
    s = psd_sqrt(a)
    m = s @ b @ s
    w, _ = herm_eig((m + dagger(m)) / 2)
    return float(np.sum(np.sqrt(clamp_spectrum(w))))


def _check_pair(a, b):
    if len(a) != len(b):
        raise ShapeMismatch(f"{len(a)} vs {len(b)} elements")
    if a.dim != b.dim:
        raise ShapeMismatch(f"dimension {a.dim} vs {b.dim}")


def povm_fidelity(a, b):
    """Fidelity between two POVMs with the same outcome set.

    Both are embedded as block-diagonal states ``sigma = (1/d) sum_j A_j (x) |j><j|``
    with ``d`` the dimension of ``a``'s declared support; the state fidelity
    then factorises over the outcome blocks.
    """
    _check_pair(a, b)
    d = a.support_dim
    total = sum(_trace_sqrt_sandwich(x, y) for x, y in zip(a.elements, b.elements))
    return float(min((total / d) ** 2, 1.0))


def _eigh_sqrt(m):
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    w = np.where(w > 1e-13 * max(1.0, np.abs(w).max()), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def povm_fidelity_dense(a, b):
    """Same quantity as :func:`povm_fidelity` from the full ancilla-extended states.

    Kept as an independent cross-check: builds the ``(n d) x (n d)`` matrices
    and uses LAPACK rather than the package eigensolver.
    """
    _check_pair(a, b)
    d = a.support_dim
    n = len(a)

    def embed(p):
        out = np.zeros((n * p.dim, n * p.dim), dtype=complex)
        for j, e in enumerate(p.elements):
            out[j * p.dim:(j + 1) * p.dim, j * p.dim:(j + 1) * p.dim] = e / d
        return out

    sa = _eigh_sqrt(embed(a))
    inner = _eigh_sqrt(sa @ embed(b) @ sa)
    return float(np.real(np.trace(inner)) ** 2)


def reference_state_fidelity(diag_probs):
    """POVM fidelity from the six probabilities p'_jj of outcome j on |psi_j>^{(x)3}.

    F = (sum_j sqrt(p'_jj))^2 / 24.
    """
    p = np.asarray(diag_probs, dtype=float)
    if p.shape != (6,):
        raise ShapeMismatch(f"expected 6 probabilities, got shape {p.shape}")
    if np.any(p < 0) or np.any(p > 1):
        raise OutOfRange(f"probabilities outside [0, 1]: {p}")
    return float(np.sum(np.sqrt(p)) ** 2 / 24.0)


def reference_probabilities(p):
    """6x|p| table: row j holds the outcome distribution for |psi_j>^{(x)3}."""
    return np.array([outcome_probabilities(p, r) for r in octahedron_projectors3()])


def measured_povm_fidelity(p):
    """reference_state_fidelity of a realised 7-outcome POVM."""
    table = reference_probabilities(p)
    return reference_state_fidelity(np.clip(np.diag(table[:, :6]), 0.0, 1.0))


def bell_projectors():
    return [proj(e.ket) for e in bell_states()]
