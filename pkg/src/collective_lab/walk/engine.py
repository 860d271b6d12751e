"""Two-dimensional discrete-time walk with site-dependent coins and absorbing detectors.

A walk state is a complex array of shape ``(..., ny, nx, 2)``: any leading
axes are a batch (typically the eight encoded basis inputs propagated
together), then lattice row ``y``, column ``x`` and the coin value.
"""

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from ..errors import Leakage
from ..povm import Povm
from ..states import make_rng
from .schedule import DEFAULT_PLAN, SiteCoin

LEAK_TOL = 1e-12
N_ENCODED = 8


@dataclass(frozen=True)
class Lattice:
    y_half: int = 4
    x_half: int = 3

    def __post_init__(self):
        if self.y_half < 3 or self.x_half < 2:
            raise ValueError("lattice must have y_half >= 3 and x_half >= 2")

    @property
    def shape(self):
        return (2 * self.y_half + 1, 2 * self.x_half + 1, 2)

    def index(self, y, x):
        if abs(y) > self.y_half or abs(x) > self.x_half:
            raise IndexError(f"site ({y}, {x}) outside lattice {self}")
        return y + self.y_half, x + self.x_half

    def site(self, iy, ix):
        return iy - self.y_half, ix - self.x_half

    def contains(self, y, x):
        return abs(y) <= self.y_half and abs(x) <= self.x_half

    def zeros(self, batch=()):
        return np.zeros(tuple(batch) + self.shape, dtype=complex)

    @classmethod
    def for_schedule(cls, sched):
        """A lattice wide enough that no amplitude can leave within the schedule."""
        n_v = sum(d == "V" for d in sched.directions)
        n_h = len(sched.directions) - n_v
        return cls(y_half=max(4, n_v + 2), x_half=max(3, n_h + 2))


def encoded_site(index):
    """Lattice slot ``(y, x, c)`` holding basis ket ``|abc>`` (index ``4a + 2b + c``)."""
    a, b, c = (index >> 2) & 1, (index >> 1) & 1, index & 1
    return 1 - 2 * a, 1 - 2 * b, c


ENCODED_SLOTS = tuple(encoded_site(i) for i in range(N_ENCODED))


def encode(k3, lattice=None):
    """Place the eight amplitudes of a three-qubit ket on the walker.

    Qubit 1 sits in the row (logical 0 at y=+1), qubit 2 in the column
    (0 at x=+1) and qubit 3 in the coin. ``k3`` may carry leading batch axes.
    """
    lattice = lattice or Lattice()
    k3 = np.asarray(k3, dtype=complex)
    state = lattice.zeros(k3.shape[:-1])
    for i, (y, x, c) in enumerate(ENCODED_SLOTS):
        iy, ix = lattice.index(y, x)
        state[..., iy, ix, c] = k3[..., i]
    return state


def apply_coins(state, coins, lattice):
    out = state.copy()
    for (y, x), sc in coins.items():
        iy, ix = lattice.index(y, x)
        out[..., iy, ix, :] = out[..., iy, ix, :] @ sc.unitary().T
    return out


def translate(state, direction):
    """Conditional shift: coin 0 moves to +y (V) or +x (H), coin 1 the other way.

    Raises
    ------
    Leakage
        If amplitude larger than ``1e-12`` would be pushed off the lattice.
    """
    axis = -3 if direction == "V" else -2
    up = np.moveaxis(state[..., 0], axis + 1, -1)
    down = np.moveaxis(state[..., 1], axis + 1, -1)
    lost = max(np.max(np.abs(up[..., -1]), initial=0.0), np.max(np.abs(down[..., 0]), initial=0.0))
    if lost > LEAK_TOL:
        raise Leakage(f"amplitude {lost:.3e} leaves the lattice on a {direction} step")
    out = np.zeros_like(state)
    out_up = np.moveaxis(out[..., 0], axis + 1, -1)
    out_down = np.moveaxis(out[..., 1], axis + 1, -1)
    out_up[..., 1:] = up[..., :-1]
    out_down[..., :-1] = down[..., 1:]
    return out


def step(state, sched, t, lattice=None):
    """One walk step ``U(t) = T(t) C(t)`` (steps are numbered from 1)."""
    if not 1 <= t <= sched.n_steps:
        raise ValueError(f"step {t} outside 1..{sched.n_steps}")
    lattice = lattice or Lattice()
    return translate(apply_coins(state, sched.coins_at(t), lattice), sched.directions[t - 1])


class RunResult(NamedTuple):
    records: dict
    final: np.ndarray


def run_with_detectors(initial, sched, plan=DEFAULT_PLAN, lattice=None, stop=None):
    """Propagate ``initial`` and absorb each detector's two coin amplitudes at its step.

    Returns the recorded amplitudes (``records[label]`` has shape ``(..., 2)``)
    and the state left on the lattice after ``stop`` steps (default: all).
    """
    lattice = lattice or Lattice()
    stop = sched.n_steps if stop is None else stop
    state = np.asarray(initial, dtype=complex)
    records = {}
    for t in range(1, stop + 1):
        state = step(state, sched, t, lattice)
        for det in plan:
            if det.t == t:
                iy, ix = lattice.index(det.y, det.x)
                records[det.label] = state[..., iy, ix, :].copy()
                state[..., iy, ix, :] = 0.0
    return RunResult(records, state)


def _gram(amps):
    """Effect from recorded amplitudes ``amps[input, ...]``: sum_c conj(A[a,c]) A[b,c]."""
    a = amps.reshape(N_ENCODED, -1)
    return a.conj() @ a.T


def detector_elements(sched, plan=DEFAULT_PLAN, lattice=None):
    """Effect of every individual detector on the eight-dimensional encoded space."""
    res = run_with_detectors(encode(np.eye(N_ENCODED), lattice), sched, plan, lattice)
    return {label: _gram(amps) for label, amps in res.records.items()}, _gram(res.final)


def _outcome_key(label):
    digits = "".join(ch for ch in label if ch.isdigit())
    return (int(digits) if digits else 0, label)


def extract_effective_povm(sched, plan=DEFAULT_PLAN, lattice=None, fold_loss=True):
    """Effective POVM E1..E7 realised by the walk on the encoded subspace.

    Detectors sharing an outcome (the four E7 ports) are summed. Amplitude
    still on the lattice after the last step never reaches a detector; with
    ``fold_loss`` it is counted as outcome E7 (no click in ports 1-6),
    otherwise it is dropped and the POVM is incomplete. For the ideal
    schedule nothing is left over and both choices agree.
    """
    per_detector, loss = detector_elements(sched, plan, lattice)
    grouped = {}
    for det in plan:
        grouped.setdefault(det.outcome, np.zeros((N_ENCODED, N_ENCODED), dtype=complex))
        grouped[det.outcome] = grouped[det.outcome] + per_detector[det.label]
    labels = sorted(grouped, key=_outcome_key)
    if fold_loss and "E7" in grouped:
        grouped["E7"] = grouped["E7"] + loss
    return Povm(tuple(grouped[k] for k in labels), tuple(labels))


def random_rotation(rng, sigma):
    """exp(-i delta n.sigma / 2) with delta ~ N(0, sigma) and n uniform on the sphere."""
    delta = rng.normal(0.0, sigma)
    n = rng.standard_normal(3)
    n /= np.linalg.norm(n)
    nx, ny, nz = n
    ns = np.array([[nz, nx - 1j * ny], [nx + 1j * ny, -nz]])
    return np.cos(delta / 2) * np.eye(2) - 1j * np.sin(delta / 2) * ns


def perturb_schedule(sched, sigma, rng):
    """Imperfect copy of ``sched``.

    Every non-identity coin is left-multiplied by a random small rotation and
    every listed site phase picks up ``exp(i eps)``, ``eps ~ N(0, sigma)``.
    Draw order follows the canonical (t, y, x) order.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        return sched
    new = {}
    for t, site, sc in sched.items():
        matrix = sc.matrix
        if sc.coin != "IDENTITY":
            base = sc.unitary() / sc.phase
            matrix = random_rotation(rng, sigma) @ base
        phase = sc.phase * np.exp(1j * rng.normal(0.0, sigma))
        new.setdefault(t, {})[site] = SiteCoin(sc.coin, phase, matrix)
    return replace(sched, assignments=new)


def noisy_povm(sched, plan, sigma, seed, *key):
    """Effective POVM of one perturbed copy of ``sched`` drawn from substream ``key``."""
    noisy = perturb_schedule(sched, sigma, make_rng(seed, *key))
    return extract_effective_povm(noisy, plan, Lattice.for_schedule(sched))
