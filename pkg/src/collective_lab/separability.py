"""Bipartite product checks and a rank certificate for genuinely collective three-qubit POVMs.

A POVM is biseparable if it is a coarse-graining of a mixture of POVMs that
are each separable across one bipartition of the three parties. The
certificate here covers POVMs whose elements are each supported on the
symmetric subspace or on its complement:

1. every product vector across a cut ``(ab|c)`` that is orthogonal to the
   symmetric subspace is ``|singlet>_ab (x) |phi>_c``, so these span a
   two-dimensional space;
2. a separable resolution of the complement would therefore have rank at
   most two, and a complement part of larger rank rules biseparability out.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedStructure
from .linalg import dagger, kron, proj, rank
from .povm import I8, Povm, e7_decomposition, permutation_operator, symmetry_kit
from .states import bell_states, haar_random_kets, make_rng

RANK_TOL = 1e-8
SUPPORT_TOL = 1e-10
SCHMIDT_TOL = 1e-10
LEMMA_TOL = 1e-12

# Party order kept inside each block; the lone party is last.
BIPARTITIONS = {
    "12|3": ((0, 1), (2,)),
    "13|2": ((0, 2), (1,)),
    "23|1": ((1, 2), (0,)),
}

CERTIFIED = "genuinely-collective-certified"
BISEPARABLE = "biseparable-construction-found"
INCONCLUSIVE = "inconclusive"


def _blocks(p):
    return BIPARTITIONS[p] if isinstance(p, str) else p


def bipartition_reshape(v, p):
    """Amplitudes of a three-qubit ket as a matrix: rows index the first block of ``p``."""
    first, second = _blocks(p)
    t = np.asarray(v, dtype=complex).reshape(2, 2, 2).transpose(first + second)
    return t.reshape(2 ** len(first), 2 ** len(second))


def schmidt_rank_one(v, p, tol=SCHMIDT_TOL):
    s = np.linalg.svd(bipartition_reshape(v, p), compute_uv=False)
    return bool(s.size < 2 or s[1] <= tol)


def lemma1_trace(Phi, phi):
    """tr[P3 (|Phi><Phi| (x) |phi><phi|)] for a two-qubit ``Phi`` and a qubit ``phi``."""
    v = kron(Phi, phi)
    return float(max(np.real(np.vdot(v, symmetry_kit().P3 @ v)), 0.0))


def to_last_party_order(p):
    """Unitary relabeling parties so the blocks of ``p`` appear as (pair, lone)."""
    first, second = _blocks(p)
    order = first + second
    sigma = [0, 0, 0]
    for pos, party in enumerate(order):
        sigma[party] = pos
    return permutation_operator(tuple(sigma))


def reduced_symmetrizer(phi):
    """R_phi = <phi|_3 P3 |phi>_3, a 4x4 operator on the first two parties."""
    iso = kron(np.eye(4), np.asarray(phi, dtype=complex).reshape(2, 1))
    return dagger(iso) @ symmetry_kit().P3 @ iso


def singlet():
    return bell_states()[3].ket


def orthogonal_product_space(p, n_random=64, seed=0):
    """Facts showing product vectors across ``p`` orthogonal to Sym3 span singlet (x) C^2.

    For each sampled ``phi`` the kernel of ``R_phi`` is checked to be exactly
    the singlet (dimension one); the span of ``singlet (x) phi`` over all
    ``phi`` then has rank two. Sampling the three basis-like directions plus
    random kets suffices because ``R_{U phi} = (U (x) U) R_phi (U (x) U)^+``
    and the singlet is invariant under ``U (x) U`` up to a phase.
    """
    rng = make_rng(seed, 1)
    phis = [np.array([1, 0]), np.array([0, 1]), np.array([1, 1]) / np.sqrt(2)]
    phis += list(haar_random_kets(rng, n_random))
    s = singlet()
    kernel_dims, singlet_resid = [], 0.0
    for phi in phis:
        w, v = np.linalg.eigh(reduced_symmetrizer(phi))
        kernel = v[:, w <= RANK_TOL]
        kernel_dims.append(kernel.shape[1])
        singlet_resid = max(singlet_resid, float(np.linalg.norm(s - kernel @ (dagger(kernel) @ s))))
    relabel = to_last_party_order(p)
    allowed = sum(proj(dagger(relabel) @ kron(s, phi)) for phi in phis)
    return {
        "kernel_dims": sorted(set(kernel_dims)),
        "singlet_kernel_residual": singlet_resid,
        "allowed_rank": rank(allowed, RANK_TOL),
        "n_phi": len(phis),
    }


def operator_product_factors(op, p, tol=SCHMIDT_TOL):
    """If ``op`` is ``A (x) B`` across ``p`` with PSD factors, return them; else None."""
    relabel = to_last_party_order(p)
    m = (relabel @ op @ dagger(relabel)).reshape(4, 2, 4, 2).transpose(0, 2, 1, 3).reshape(16, 4)
    u, s, vh = np.linalg.svd(m)
    if s.size > 1 and s[1] > tol:
        return None
    a = (u[:, 0] * np.sqrt(s[0])).reshape(4, 4)
    b = (vh[0] * np.sqrt(s[0])).reshape(2, 2)
    # fix the arbitrary phase so both factors are Hermitian with nonnegative trace
    ta, tb = np.trace(a), np.trace(b)
    if abs(ta) > tol:
        ph = ta / abs(ta)
        a, b = a / ph, b * ph
    if np.trace(a).real < 0:
        a, b = -a, -b
    if min(np.linalg.eigvalsh((a + dagger(a)) / 2)[0], np.linalg.eigvalsh((b + dagger(b)) / 2)[0]) < -1e-10:
        return None
    return a, b


@dataclass
class ElementFacts:
    label: str
    classification: str
    rank: int
    cuts: list = field(default_factory=list)

    def to_json(self):
        return {"label": self.label, "classification": self.classification, "rank": self.rank, "cuts": list(self.cuts)}


@dataclass
class SeparabilityReport:
    verdict: str
    elements: list
    facts: list
    tolerances: dict

    def fact(self, name):
        return next(f["value"] for f in self.facts if f["name"] == name)

    def to_json(self):
        return {
            "verdict": self.verdict,
            "elements": [e.to_json() for e in self.elements],
            "facts": self.facts,
            "tolerances": self.tolerances,
        }


TOLERANCES = {"rank": RANK_TOL, "support": SUPPORT_TOL, "schmidt": SCHMIDT_TOL, "lemma1": LEMMA_TOL}


def _fact(facts, name, value, tol=None):
    entry = {"name": name, "value": value}
    if tol is not None:
        entry["tol"] = tol
    facts.append(entry)


def classify_element(label, e):
    """Per-element classification: product, P-separable, biseparable or unknown."""
    w, v = np.linalg.eigh((e + dagger(e)) / 2)
    r = int(np.sum(w > RANK_TOL))
    if r == 0:
        return ElementFacts(label, "product", 0, list(BIPARTITIONS))
    if r == 1:
        top = v[:, -1]
        cuts = [p for p in BIPARTITIONS if schmidt_rank_one(top, p)]
        if len(cuts) == len(BIPARTITIONS):
            return ElementFacts(label, "product", 1, cuts)
        if cuts:
            return ElementFacts(label, "P-separable", 1, cuts)
        return ElementFacts(label, "unknown", 1, [])
    cuts = [p for p in BIPARTITIONS if operator_product_factors(e, p) is not None]
    if cuts:
        return ElementFacts(label, "P-separable", r, cuts)
    return ElementFacts(label, "unknown", r, [])


def product_cut(op):
    """First bipartition across which ``op`` is a PSD product, or None."""
    return next((c for c in BIPARTITIONS if operator_product_factors(op, c) is not None), None)


def e7_witness():
    """The three parts of E7, each paired with the cut across which it is a PSD product."""
    return [(product_cut(part), part) for part in ((2.0 / 3.0) * t for t in e7_decomposition())]


def certify_genuinely_collective(p, strict=False, construction=None):
    """Run the rank certificate on an eight-dimensional POVM.

    Parameters
    ----------
    p : Povm
        Three-qubit POVM.
    strict : bool
        Raise :class:`UnsupportedStructure` instead of returning an
        inconclusive report when an element straddles Sym3 and its complement.
    construction : dict, optional
        Output of :func:`verify_coarse_graining`, attached as a fact.

    Returns
    -------
    SeparabilityReport
        Verdict ``genuinely-collective-certified`` iff every element is split
        by the symmetric projector and the complement part has rank above two.
    """
    if p.dim != 8:
        raise UnsupportedStructure(f"three-qubit POVM required, got dimension {p.dim}")
    kit = symmetry_kit()
    comp = I8 - kit.P3
    facts = []
    elements = [classify_element(lbl, e) for lbl, e in zip(p.labels, p.elements)]
    if construction is not None:
        _fact(facts, "biseparable_construction", construction)

    in_sym, in_comp, straddling = [], [], []
    for lbl, e in zip(p.labels, p.elements):
        off_sym = float(np.max(np.abs(comp @ e))) if e.size else 0.0
        off_comp = float(np.max(np.abs(kit.P3 @ e))) if e.size else 0.0
        if off_sym <= SUPPORT_TOL:
            in_sym.append(lbl)
        elif off_comp <= SUPPORT_TOL:
            in_comp.append(lbl)
        else:
            straddling.append(lbl)
    _fact(facts, "sym_supported", in_sym, SUPPORT_TOL)
    _fact(facts, "complement_supported", in_comp, SUPPORT_TOL)
    _fact(facts, "straddling", straddling, SUPPORT_TOL)

    if straddling:
        if strict:
            raise UnsupportedStructure(f"elements {straddling} straddle Sym3 and its complement")
        return SeparabilityReport(INCONCLUSIVE, elements, facts, dict(TOLERANCES))

    comp_sum = sum((p.element(lbl) for lbl in in_comp), np.zeros((8, 8), dtype=complex))
    r_c = rank(comp_sum, RANK_TOL)
    _fact(facts, "complement_rank", r_c, RANK_TOL)
    _fact(facts, "rank_identity_minus_P3", rank(comp, RANK_TOL), RANK_TOL)

    singlet_trace = max(lemma1_trace(singlet(), phi) for phi in (np.array([1, 0]), np.array([0, 1]), np.array([1, 1j]) / np.sqrt(2)))
    _fact(facts, "lemma1_singlet_trace", singlet_trace, LEMMA_TOL)
    allowed = {}
    for cut in BIPARTITIONS:
        info = orthogonal_product_space(cut)
        allowed[cut] = info["allowed_rank"]
        _fact(facts, f"orthogonal_product_space[{cut}]", info, RANK_TOL)
    max_allowed = max(allowed.values())

    if "E7" in p.labels and len(p) == 7:
        witness = e7_witness()
        e7_resid = float(np.max(np.abs(p.element("E7") - sum(part for _, part in witness))))
        cuts = [c for c, _ in witness]
        _fact(facts, "e7_decomposition_residual", e7_resid, 1e-12)
        _fact(facts, "e7_part_cuts", cuts, SCHMIDT_TOL)
        if e7_resid <= 1e-12 and None not in cuts:
            idx = p.labels.index("E7")
            elements[idx] = ElementFacts("E7", "biseparable", elements[idx].rank, cuts)

    lemma_ok = singlet_trace <= LEMMA_TOL and all(
        f["value"]["kernel_dims"] == [1] and f["value"]["singlet_kernel_residual"] <= 1e-8
        for f in facts if f["name"].startswith("orthogonal_product_space")
    )
    certified = lemma_ok and r_c > max_allowed
    return SeparabilityReport(CERTIFIED if certified else INCONCLUSIVE, elements, facts, dict(TOLERANCES))


def example_povms(p_mix):
    """Bell-measurement fixtures A, B and their mixtures K1 (disjoint union) and K2 (coarse-grained)."""
    if not 0 < p_mix < 1:
        raise ValueError("p_mix must lie in (0, 1)")
    bells = bell_states()
    z = [proj(np.array([1, 0])), proj(np.array([0, 1]))]
    a_el, a_lab, b_el, b_lab = [], [], [], []
    for b in bells:
        for k, zk in enumerate(z):
            a_el.append(kron(proj(b.ket), zk))
            a_lab.append(f"{b.label}|{k}")
    for k, zk in enumerate(z):
        for b in bells:
            b_el.append(kron(zk, proj(b.ket)))
            b_lab.append(f"{k}|{b.label}")
    A = Povm(tuple(a_el), tuple(a_lab))
    B = Povm(tuple(b_el), tuple(b_lab))
    K1 = Povm(
        tuple(p_mix * e for e in a_el) + tuple((1 - p_mix) * e for e in b_el),
        tuple(f"A:{l}" for l in a_lab) + tuple(f"B:{l}" for l in b_lab),
    )
    K2 = Povm(tuple(p_mix * x + (1 - p_mix) * y for x, y in zip(a_el, b_el)), tuple(f"K{j + 1}" for j in range(8)))
    return {"A": A, "B": B, "K1": K1, "K2": K2}


def verify_coarse_graining(p_mix):
    """Check that K2 is the outcome-wise sum of p A and (1-p) B with A, B separable across fixed cuts.

    Returns a JSON-ready dict; ``holds`` is the overall flag.
    """
    ex = example_povms(p_mix)
    a_cut = all(operator_product_factors(e, "12|3") is not None for e in ex["A"].elements)
    b_cut = all(operator_product_factors(e, "23|1") is not None for e in ex["B"].elements)
    resid = max(
        float(np.max(np.abs(k - (p_mix * a + (1 - p_mix) * b))))
        for k, a, b in zip(ex["K2"].elements, ex["A"].elements, ex["B"].elements)
    )
    return {
        "p_mix": p_mix,
        "A_separable_12|3": a_cut,
        "B_separable_23|1": b_cut,
        "coarse_graining_residual": resid,
        "holds": bool(a_cut and b_cut and resid <= SUPPORT_TOL),
    }


def biseparable_report(p_mix):
    """Report for K2 built from its explicit construction."""
    info = verify_coarse_graining(p_mix)
    k2 = example_povms(p_mix)["K2"]
    elements = [classify_element(l, e) for l, e in zip(k2.labels, k2.elements)]
    facts = []
    _fact(facts, "biseparable_construction", info, SUPPORT_TOL)
    verdict = BISEPARABLE if info["holds"] else INCONCLUSIVE
    return SeparabilityReport(verdict, elements, facts, dict(TOLERANCES))
