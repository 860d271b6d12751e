"""Closed-form intermediate maps of the ideal walk and schedule validation against them.

An anchor at step ``t`` lists, for every lattice slot ``(y, x, c)`` that is
occupied after step ``t``, the amplitude it receives from each encoded input
slot. Detectors at earlier steps are already absorbed; detectors at ``t``
itself are not. Slots that are not listed must carry no amplitude.
"""

from dataclasses import dataclass

import numpy as np

from .engine import ENCODED_SLOTS, Lattice, encode, run_with_detectors
from .schedule import DEFAULT_PLAN

ANCHOR_TOL = 1e-10
ANCHOR_STEPS = (1, 2, 3, 6, 8, 9)

_R = np.sqrt(1 / 12)
_Q = np.sqrt(1 / 6)
_H = np.sqrt(1 / 2)
_T1 = np.sqrt(1 / 3)
_T2 = np.sqrt(2 / 3)


def _scaled(scale, row):
    return {k: scale * v for k, v in row.items()}


_U1 = {
    (2, 1, 0): {(1, 1, 0): 1},
    (0, 1, 0): {(-1, 1, 1): 1},
    (0, 1, 1): {(1, 1, 1): -1},
    (-2, 1, 1): {(-1, 1, 0): 1},
    (2, -1, 0): {(1, -1, 1): 1},
    (0, -1, 0): {(-1, -1, 0): 1},
    (0, -1, 1): {(1, -1, 0): 1},
    (-2, -1, 1): {(-1, -1, 1): -1},
}

_U2 = {
    (3, 1, 0): {(1, 1, 0): _T2},
    (1, 1, 1): {(1, 1, 0): _T1},
    (1, 1, 0): {(-1, 1, 1): 1},
    (-1, 1, 1): {(1, 1, 1): 1},
    (-1, 1, 0): {(-1, 1, 0): 1},
    (1, -1, 1): {(1, -1, 1): 1},
    (1, -1, 0): {(-1, -1, 0): 1},
    (-1, -1, 1): {(1, -1, 0): -1},
    (-1, -1, 0): {(-1, -1, 1): -_T1},
    (-3, -1, 1): {(-1, -1, 1): _T2},
}

_U3 = {
    (1, 2, 0): _scaled(_R, {(1, 1, 0): 1, (-1, 1, 1): -3}),
    (1, 0, 1): {(1, 1, 0): 0.5, (-1, 1, 1): 0.5},
    (-1, 2, 0): _scaled(_H, {(1, 1, 1): 1, (-1, 1, 0): -1}),
    (-1, 0, 1): _scaled(_H, {(1, 1, 1): 1, (-1, 1, 0): 1}),
    (1, 0, 0): _scaled(_H, {(1, -1, 1): 1, (-1, -1, 0): 1}),
    (1, -2, 1): _scaled(_H, {(-1, -1, 0): 1, (1, -1, 1): -1}),
    (-1, 0, 0): {(1, -1, 0): 0.5, (-1, -1, 1): 0.5},
    (-1, -2, 1): _scaled(_R, {(-1, -1, 1): 1, (1, -1, 0): -3}),
}

_U6 = {
    (1, 1, 1): _scaled(_R, {(1, 1, 0): 1, (-1, 1, 1): -3}),
    (-1, -1, 0): _scaled(_R, {(-1, -1, 1): 1, (1, -1, 0): -3}),
    (1, 1, 0): _scaled(_R, {(1, 1, 0): 1, (1, -1, 1): -2, (-1, 1, 1): 1, (-1, -1, 0): -2}),
    (-1, -1, 1): _scaled(_R, {(-1, -1, 1): 1, (-1, 1, 0): -2, (1, -1, 0): 1, (1, 1, 1): -2}),
    (-1, 1, 0): {slot: _R for slot in ENCODED_SLOTS},
    (1, -1, 1): _scaled(_R, {
        (1, 1, 1): -1, (1, 1, 0): 1, (1, -1, 1): 1, (1, -1, 0): -1,
        (-1, 1, 1): 1, (-1, 1, 0): -1, (-1, -1, 1): -1, (-1, -1, 0): 1,
    }),
}

_U8 = {
    (2, 2, 0): _scaled(_Q, {(1, -1, 1): 1, (-1, 1, 1): -2, (-1, -1, 0): 1}),
    (-2, -2, 1): _scaled(-1j * _Q, {(-1, 1, 0): 1, (1, -1, 0): -2, (1, 1, 1): 1}),
    (0, 0, 1): _scaled(-_Q, {(1, 1, 0): -1, (1, -1, 1): 1, (-1, 1, 1): 1, (-1, -1, 0): 1}),
    (0, 0, 0): _scaled(1j * _Q, {(-1, -1, 1): -1, (-1, 1, 0): 1, (1, -1, 0): 1, (1, 1, 1): 1}),
}

# As printed. Read through the detector-element formula these rows give the
# |-i> and |+i> projectors at (1,0) and (-1,0), the reverse of the detector
# labels; ANCHORS uses the complex conjugate, which matches the labels.
U9_AS_PRINTED = {
    (1, 0, 0): _scaled(_R, {
        (1, 1, 1): 1j, (1, 1, 0): 1, (1, -1, 1): -1, (1, -1, 0): 1j,
        (-1, 1, 1): -1, (-1, 1, 0): 1j, (-1, -1, 1): -1j, (-1, -1, 0): -1,
    }),
    (-1, 0, 1): _scaled(-_R, {
        (1, 1, 1): 1j, (1, 1, 0): -1, (1, -1, 1): 1, (1, -1, 0): 1j,
        (-1, 1, 1): 1, (-1, 1, 0): 1j, (-1, -1, 1): -1j, (-1, -1, 0): 1,
    }),
}


def conjugate_anchor(anchor):
    return {slot: {k: np.conj(v) for k, v in row.items()} for slot, row in anchor.items()}


ANCHORS = {1: _U1, 2: _U2, 3: _U3, 6: _U6, 8: _U8, 9: conjugate_anchor(U9_AS_PRINTED)}


def anchor_matrix(anchor, lattice=None):
    """Dense ``(8, ny, nx, 2)`` amplitude map: entry ``[i, ...]`` is the image of input ``i``."""
    lattice = lattice or Lattice()
    index = {slot: i for i, slot in enumerate(ENCODED_SLOTS)}
    out = lattice.zeros((len(ENCODED_SLOTS),))
    for (y, x, c), row in anchor.items():
        iy, ix = lattice.index(y, x)
        for slot, value in row.items():
            out[index[slot], iy, ix, c] = value
    return out


def anchor_map(sched, t, plan=DEFAULT_PLAN, lattice=None):
    """Numerical counterpart of an anchor: after step ``t``, earlier detectors absorbed."""
    lattice = lattice or Lattice()
    earlier = tuple(d for d in plan if d.t < t)
    return run_with_detectors(encode(np.eye(len(ENCODED_SLOTS)), lattice), sched, earlier, lattice, stop=t).final


def _best_phase(actual, expected):
    """Unit phase minimizing ``|actual - phase * expected|`` over the given entries."""
    overlap = np.vdot(expected, actual)
    return overlap / abs(overlap) if abs(overlap) > 1e-300 else 1.0


def branch_deviation(actual, expected):
    """Max deviation after removing one phase per lattice site (y, x).

    Both coin slots of a site form one detector branch: they are recorded by
    the same detector or continue as one path, so a common phase on them is
    unobservable downstream.
    """
    worst = 0.0
    ny, nx = actual.shape[1:3]
    for iy in range(ny):
        for ix in range(nx):
            a = actual[:, iy, ix, :]
            e = expected[:, iy, ix, :]
            phase = _best_phase(a, e)
            worst = max(worst, float(np.max(np.abs(a - phase * e))))
    return worst


@dataclass
class AnchorCheck:
    t: int
    max_deviation: float
    exact_deviation: float
    passed: bool

    def to_json(self):
        return {"t": self.t, "max_deviation": self.max_deviation, "pass": self.passed}


@dataclass
class AnchorReport:
    checks: list

    @property
    def passed(self):
        return bool(self.checks) and all(c.passed for c in self.checks)

    def check(self, t):
        return next(c for c in self.checks if c.t == t)

    def to_json(self):
        return [c.to_json() for c in self.checks]


def validate_against_anchors(sched, plan=DEFAULT_PLAN, lattice=None, anchors=None, tol=ANCHOR_TOL):
    """Compare a schedule's intermediate maps with the closed-form anchors.

    ``max_deviation`` quotients one phase per lattice site; ``exact_deviation``
    is the raw entrywise maximum. Never raises: a schedule that leaks or
    cannot be propagated fails every anchor with infinite deviation.
    """
    lattice = lattice or Lattice()
    anchors = ANCHORS if anchors is None else anchors
    checks = []
    for t in sorted(anchors):
        expected = anchor_matrix(anchors[t], lattice)
        try:
            actual = anchor_map(sched, t, plan, lattice)
        except (RuntimeError, ValueError, IndexError):
            checks.append(AnchorCheck(t, float("inf"), float("inf"), False))
            continue
        dev = branch_deviation(actual, expected)
        exact = float(np.max(np.abs(actual - expected)))
        checks.append(AnchorCheck(t, dev, exact, dev <= tol))
    return AnchorReport(checks)
