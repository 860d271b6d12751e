"""Search for coin assignments between two anchored steps.

Between anchors the walk is a product of local unitaries, so a mode (the
amplitude of one lattice slot as a linear function of the eight inputs)
present after step ``s`` must be a combination of the target modes it can
still reach. That test is independent for every site, which lets each step
be solved site by site and the search run as a DFS over steps.
"""

from collections import Counter
from itertools import product

import numpy as np

from ..errors import Leakage, NoSolution
from .anchors import ANCHORS, ANCHOR_TOL, anchor_matrix
from .coins import COIN_LABELS, COIN_MULTIPLICITY, COINS, SITE_PHASES
from .engine import N_ENCODED, Lattice, encode
from .schedule import DEFAULT_PLAN, CoinSchedule, SiteCoin, coin_multiset

AMP_TOL = 1e-12
SPAN_TOL = 1e-9


def _occupied_sites(state, lattice):
    mask = np.any(np.abs(state) > AMP_TOL, axis=(0, 3))
    return [lattice.site(int(iy), int(ix)) for iy, ix in zip(*np.nonzero(mask))]


def _absorb(state, t, plan, lattice):
    state = state.copy()
    for det in plan:
        if det.t == t:
            iy, ix = lattice.index(det.y, det.x)
            state[:, iy, ix, :] = 0.0
    return state


def _destinations(y, x, direction):
    if direction == "V":
        return (y + 1, x), (y - 1, x)
    return (y, x + 1), (y, x - 1)


class _Target:
    """Rows of an anchored frame, queried by light cone."""

    def __init__(self, t, frame, lattice):
        self.t = t
        self.frame = frame
        self.lattice = lattice

    def row(self, y, x, c):
        if not self.lattice.contains(y, x):
            return np.zeros(N_ENCODED, dtype=complex)
        iy, ix = self.lattice.index(y, x)
        return self.frame[:, iy, ix, c]

    def basis_near(self, y, x, dy, dx):
        """Orthonormal basis of the target rows within ``|Δy| <= dy, |Δx| <= dx``."""
        rows = []
        for ty in range(y - dy, y + dy + 1):
            for tx in range(x - dx, x + dx + 1):
                for c in (0, 1):
                    r = self.row(ty, tx, c)
                    if np.max(np.abs(r)) > AMP_TOL:
                        rows.append(r)
        if not rows:
            return np.zeros((N_ENCODED, 0), dtype=complex)
        u, s, _ = np.linalg.svd(np.array(rows).T, full_matrices=False)
        return u[:, s > SPAN_TOL]


def _in_span(vec, basis):
    if np.max(np.abs(vec)) <= AMP_TOL:
        return True
    resid = vec - basis @ (basis.conj().T @ vec)
    return float(np.max(np.abs(resid))) <= SPAN_TOL


def _match(out, want, mode):
    if mode == "exact":
        return float(np.max(np.abs(out - want))) <= ANCHOR_TOL
    overlap = np.vdot(want, out)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-300 else 1.0
    return float(np.max(np.abs(out - phase * want))) <= ANCHOR_TOL


def _site_options(modes, y, x, direction, choices, check):
    """Coins at one site whose two output modes pass ``check``."""
    options = []
    for label, phase in choices:
        u = phase * COINS[label]
        out = modes @ u.T
        if all(check(dest, c, out[:, c]) for c, dest in enumerate(_destinations(y, x, direction))):
            options.append(SiteCoin(label, phase))
    return options


def _apply(state, coins, direction, lattice):
    out = lattice.zeros((N_ENCODED,))
    for (y, x), sc in coins.items():
        iy, ix = lattice.index(y, x)
        moved = state[:, iy, ix, :] @ sc.unitary().T
        for c, (dy, dx) in enumerate(_destinations(y, x, direction)):
            if not lattice.contains(dy, dx) or abs(dy) == lattice.y_half or abs(dx) == lattice.x_half:
                if np.max(np.abs(moved[:, c])) > AMP_TOL:
                    raise Leakage(f"amplitude reaches the boundary at ({dy}, {dx})")
                continue
            jy, jx = lattice.index(dy, dx)
            out[:, jy, jx, c] += moved[:, c]
    return out


def _within_budget(counts, budget):
    return all(n <= budget.get(label, 0) for label, n in counts.items() if label != "IDENTITY")


def synthesize_segment_coins(
    t_from,
    t_to,
    sched_partial=None,
    plan=DEFAULT_PLAN,
    lattice=None,
    phases="final",
    match="exact",
    budget=None,
    anchors=None,
    limit=None,
):
    """Complete schedules for steps ``t_from+1 .. t_to`` that reproduce the anchors.

    Parameters
    ----------
    t_from, t_to : int
        Anchored steps (``t_from = 0`` starts from the encoded inputs).
    sched_partial : CoinSchedule, optional
        Coins outside the segment; they count against ``budget``.
    phases : {"final", "all"}
        Steps at which site phases other than 1 are tried. Phases before the
        last step cannot be seen by the span test, so "all" multiplies the
        search and is only needed when an intermediate phase is physical.
    match : {"exact", "branch"}
        Exact comparison, or one free phase per site at anchored steps.
    budget : dict, optional
        Maximum total count per coin label (default: the 30-coin multiset).
    limit : int, optional
        Stop after this many solutions.

    Returns
    -------
    list of CoinSchedule
        Sorted by their canonical (t, y, x, coin, phase) listing.

    Raises
    ------
    NoSolution
        If no assignment reproduces the anchors.
    """
    anchors = ANCHORS if anchors is None else anchors
    lattice = lattice or Lattice()
    budget = COIN_MULTIPLICITY if budget is None else budget
    base = sched_partial or CoinSchedule()
    if t_to not in anchors or (t_from != 0 and t_from not in anchors) or not t_from < t_to:
        raise ValueError(f"segment {t_from}->{t_to} must join two anchored steps")
    segment = range(t_from + 1, t_to + 1)
    outside = coin_multiset(base.without_steps(set(segment)))
    if not _within_budget(outside, budget):
        raise NoSolution("coins outside the segment already exceed the budget")

    start = encode(np.eye(N_ENCODED), lattice) if t_from == 0 else anchor_matrix(anchors[t_from], lattice)
    start = _absorb(start, t_from, plan, lattice)
    checkpoints = {t: _Target(t, anchor_matrix(anchors[t], lattice), lattice) for t in segment if t in anchors}
    directions = base.directions
    unit = [(label, 1.0 + 0j) for label in COIN_LABELS]
    phased = [(label, ph) for label in COIN_LABELS for ph in SITE_PHASES]

    def remaining(s, target):
        moves = directions[s:target.t]
        return moves.count("V"), moves.count("H")

    solutions = []

    def dfs(s, state, chosen, counts):
        if limit is not None and len(solutions) >= limit:
            return
        if s > t_to:
            sched = base
            for t, coins in chosen.items():
                sched = sched.with_step(t, coins)
            solutions.append(sched)
            return
        direction = directions[s - 1]
        target = checkpoints[min(t for t in checkpoints if t >= s)]
        dy, dx = remaining(s, target)
        choices = phased if (phases == "all" or s == target.t) else unit

        if s == target.t:
            def check(dest, c, vec):
                return _match(vec, target.row(*dest, c), match)
        else:
            cache = {}

            def check(dest, c, vec):
                if dest not in cache:
                    cache[dest] = target.basis_near(*dest, dy, dx)
                return _in_span(vec, cache[dest])

        sites = _occupied_sites(state, lattice)
        per_site = []
        for y, x in sites:
            iy, ix = lattice.index(y, x)
            opts = _site_options(state[:, iy, ix, :], y, x, direction, choices, check)
            if not opts:
                return
            per_site.append(opts)
        for combo in product(*per_site):
            step_counts = counts + Counter(sc.coin for sc in combo)
            if not _within_budget(step_counts, budget):
                continue
            coins = dict(zip(sites, combo))
            try:
                nxt = _apply(state, coins, direction, lattice)
            except Leakage:
                continue
            if s == target.t:
                if not _frame_matches(nxt, target.frame, match):
                    continue
                nxt = _absorb(nxt, s, plan, lattice)
            dfs(s + 1, nxt, {**chosen, s: coins}, step_counts)

    dfs(t_from + 1, start, {}, Counter(outside))
    if not solutions:
        raise NoSolution(f"no coin assignment reproduces the anchors for steps {t_from}->{t_to}")
    return sorted(solutions, key=_canonical_key)


def _frame_matches(actual, expected, mode):
    if mode == "exact":
        return float(np.max(np.abs(actual - expected))) <= ANCHOR_TOL
    ny, nx = actual.shape[1:3]
    for iy in range(ny):
        for ix in range(nx):
            if not _match(actual[:, iy, ix, :].ravel(), expected[:, iy, ix, :].ravel(), mode):
                return False
    return True


def _canonical_key(sched):
    return tuple(
        (t, site, sc.coin, round(complex(sc.phase).real, 12), round(complex(sc.phase).imag, 12))
        for t, site, sc in sched.items()
    )


def select_canonical(solutions):
    """Solution with the fewest non-unit phases, ties broken by canonical order."""
    def cost(sched):
        n_phase = sum(abs(sc.phase - 1) > 1e-12 for _, _, sc in sched.items())
        return n_phase, _canonical_key(sched)

    return min(solutions, key=cost)


DEFAULT_SEGMENTS = ((0, 1), (1, 2), (2, 3), (3, 6), (6, 9))


def synthesize_schedule(segments=DEFAULT_SEGMENTS, plan=DEFAULT_PLAN, lattice=None, budget=None, **kwargs):
    """Chain segment searches into full schedules that use the coin budget exactly.

    Every combination of segment solutions is kept while its coin counts
    stay within budget; the canonical one among those hitting it exactly is
    returned.
    """
    budget = COIN_MULTIPLICITY if budget is None else budget
    partial = [CoinSchedule()]
    for t_from, t_to in segments:
        grown = []
        for sched in partial:
            try:
                grown.extend(synthesize_segment_coins(t_from, t_to, sched, plan, lattice, budget=budget, **kwargs))
            except NoSolution:
                continue
        if not grown:
            raise NoSolution(f"no schedule survives segment {t_from}->{t_to}")
        partial = grown
    exact = [s for s in partial if dict(coin_multiset(s)) == dict(budget)]
    if not exact:
        raise NoSolution("no schedule uses the coin budget exactly")
    return select_canonical(exact)
