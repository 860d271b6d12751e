"""Single-qubit state estimation from three copies: closed forms, Monte Carlo and noise calibration.

Protocol: measure the three-copy state with the seven-outcome POVM; outcome
``j <= 6`` guesses the octahedron state ``psi_j`` and outcome 7 guesses a
Haar-random state. The score is the overlap ``|<psi|guess>|^2``.
"""

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import NoBracket
from .linalg import proj
from .povm import measured_povm_fidelity, optimal_povm, outcome_probabilities
from .states import haar_random_kets, icosahedron_states, make_rng, octahedron_states, psi_theta, three_copy

THREADS_ENV = "COLLECTIVE_LAB_THREADS"
# substream tag for drawing a noisy POVM, kept apart from the (state, repetition) trial streams
NOISE_STREAM = 2**32 - 1
DEFAULT_SIGMA_GRID = tuple(round(0.0025 * k, 4) for k in range(33))


class Bounds(NamedTuple):
    local: float
    biseparable: float
    collective: float


def bounds():
    """Best average fidelities for local, biseparable and collective measurements on three copies."""
    return Bounds((3 + np.sqrt(3)) / 6, (8 + np.sqrt(22)) / 16, 4 / 5)


@dataclass(frozen=True)
class EstimationConfig:
    trials_per_rep: int = 50000
    repetitions: int = 10
    master_seed: int = 42
    noise_sigma: float = 0.0
    source: str = "ideal"

    def __post_init__(self):
        if self.trials_per_rep < 1 or self.repetitions < 1:
            raise ValueError("trials_per_rep and repetitions must be at least 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        if self.source not in ("ideal", "walk"):
            raise ValueError(f"source must be 'ideal' or 'walk', got {self.source!r}")

    @property
    def n_trials(self):
        return self.trials_per_rep * self.repetitions


@dataclass
class StateStats:
    label: str
    f_analytic: float
    f_mc: float
    std: float
    stderr: float
    n_trials: int
    rep_means: list = field(repr=False, default_factory=list)

    def to_json(self):
        return {
            "label": self.label,
            "f_analytic": self.f_analytic,
            "f_mc": self.f_mc,
            "std": self.std,
            "stderr": self.stderr,
            "n_trials": self.n_trials,
        }


@dataclass
class EstimationResult:
    states: list
    mean: float
    stderr: float
    n_trials: int

    @property
    def analytic_mean(self):
        return float(np.mean([s.f_analytic for s in self.states]))

    def exceeds(self):
        b = bounds()
        return {name: bool(self.mean > getattr(b, name)) for name in b._fields}

    def separation(self, bound="biseparable"):
        """(mean - bound) in units of the aggregate standard error."""
        gap = self.mean - getattr(bounds(), bound)
        return float(gap / self.stderr) if self.stderr > 0 else float("inf") * np.sign(gap)

    def to_json(self):
        b = bounds()
        return {
            "states": [s.to_json() for s in self.states],
            "aggregate": {
                "f_mc": self.mean,
                "stderr": self.stderr,
                "f_analytic": self.analytic_mean,
                "n_trials": self.n_trials,
            },
            "bounds": b._asdict(),
            "exceeds": self.exceeds(),
            "stderrs_above_biseparable": self.separation("biseparable"),
        }


def octahedron_overlaps(k):
    """|<k|psi_j>|^2 for the six octahedron states."""
    k = np.asarray(k, dtype=complex)
    return np.array([abs(np.vdot(e.ket, k)) ** 2 for e in octahedron_states()])


def analytic_fidelity(k):
    """Mean score of the ideal protocol on a pure state: (2/3) sum_j |<k|psi_j>|^8."""
    return float((2.0 / 3.0) * np.sum(octahedron_overlaps(k) ** 4))


def expected_fidelity(k, p, rho=None):
    """Mean score of any seven-outcome POVM, outcome 7 contributing 1/2 per event."""
    rho = proj(three_copy(k)) if rho is None else rho
    probs = outcome_probabilities(p, rho)
    return float(np.dot(probs[:6], octahedron_overlaps(k)) + 0.5 * probs[6])


def worker_count():
    """Thread count from COLLECTIVE_LAB_THREADS, else the CPU count."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1


def _rep_mean(k, probs, overlaps, trials, rng):
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    outcomes = np.minimum(np.searchsorted(cdf, rng.random(trials), side="right"), len(probs) - 1)
    scores = np.empty(trials)
    guessed = outcomes < 6
    scores[guessed] = overlaps[outcomes[guessed]]
    n_random = int(trials - np.count_nonzero(guessed))
    if n_random:
        guesses = haar_random_kets(rng, n_random)
        scores[~guessed] = np.abs(guesses @ np.conj(k)) ** 2
    return float(np.mean(scores))


def run_trials(k, p, cfg, state_index=0, rho=None, label="state"):
    """Monte Carlo estimate of the protocol's mean score on ``k``.

    Repetition ``r`` draws from the substream ``(master_seed, state_index, r)``,
    so results do not depend on which worker runs what.

    Parameters
    ----------
    k : array_like
        True qubit state, used for scoring.
    p : Povm
        Seven-outcome POVM, outcomes ordered E1..E7.
    rho : array_like, optional
        Measured three-copy density matrix; defaults to the pure ``k (x) k (x) k``.
    """
    k = np.asarray(k, dtype=complex)
    if len(p) != 7:
        raise ValueError(f"seven-outcome POVM required, got {len(p)}")
    rho = proj(three_copy(k)) if rho is None else np.asarray(rho, dtype=complex)
    probs = outcome_probabilities(p, rho)
    overlaps = octahedron_overlaps(k)
    means = [
        _rep_mean(k, probs, overlaps, cfg.trials_per_rep, make_rng(cfg.master_seed, state_index, r))
        for r in range(cfg.repetitions)
    ]
    std = float(np.std(means, ddof=1)) if len(means) > 1 else 0.0
    return StateStats(
        label=label,
        f_analytic=expected_fidelity(k, p, rho),
        f_mc=float(np.mean(means)),
        std=std,
        stderr=float(std / np.sqrt(len(means))),
        n_trials=cfg.n_trials,
        rep_means=means,
    )


def povm_for_config(cfg):
    """The POVM a config measures with: ideal, the walk's, or one noisy walk realisation."""
    if cfg.source == "ideal" and cfg.noise_sigma == 0:
        return optimal_povm()
    from .walk.engine import extract_effective_povm, noisy_povm
    from .walk.schedule import default_schedule

    sched, plan = default_schedule()
    if cfg.noise_sigma == 0:
        return extract_effective_povm(sched, plan)
    return noisy_povm(sched, plan, cfg.noise_sigma, cfg.master_seed, NOISE_STREAM)


def _run_many(kets, labels, cfg, p):
    jobs = list(enumerate(zip(kets, labels)))
    n = min(worker_count(), len(jobs))

    def job(item):
        i, (k, lbl) = item
        return run_trials(k, p, cfg, state_index=i, label=lbl)

    if n <= 1:
        return [job(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(job, jobs))


def _aggregate(stats, cfg):
    mean = float(np.mean([s.f_mc for s in stats]))
    stderr = float(np.sqrt(np.sum([s.stderr ** 2 for s in stats])) / len(stats))
    return EstimationResult(stats, mean, stderr, cfg.n_trials * len(stats))


def sweep_angles():
    return [k * np.pi / 16 for k in range(17)]


def sweep_theta(cfg, p=None):
    """Scores of cos(theta)|0> + sin(theta)|1> for theta = k pi/16, k = 0..16."""
    p = povm_for_config(cfg) if p is None else p
    thetas = sweep_angles()
    stats = _run_many([psi_theta(t) for t in thetas], [f"theta={k}pi/16" for k in range(17)], cfg, p)
    local = bounds().local
    return [
        {
            "theta": float(t),
            "f_analytic": s.f_analytic,
            "f_mc": s.f_mc,
            "std": s.std,
            "stderr": s.stderr,
            "n_trials": s.n_trials,
            "exceeds_local": bool(s.f_mc > local),
        }
        for t, s in zip(thetas, stats)
    ]


def icosahedron_average(cfg, p=None):
    """Monte Carlo scores for the twelve icosahedron states and their average."""
    p = povm_for_config(cfg) if p is None else p
    entries = icosahedron_states()
    stats = _run_many([e.ket for e in entries], [e.label for e in entries], cfg, p)
    return _aggregate(stats, cfg)


SWEEP_COLUMNS = ("theta", "f_analytic", "f_mc", "std", "stderr", "n_trials", "exceeds_local")


def sweep_to_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


@dataclass
class Calibration:
    sigma: float
    target: float
    table: list

    def to_json(self):
        return {"sigma": self.sigma, "target": self.target, "table": self.table}


def noisy_reference_fidelity(sigma, n_seeds=50, seed=0, sched=None, plan=None):
    """Mean reference-state POVM fidelity of noisy walk realisations and its standard error."""
    from .walk.engine import noisy_povm
    from .walk.schedule import default_schedule

    if sched is None:
        sched, plan = default_schedule()
    vals = [measured_povm_fidelity(noisy_povm(sched, plan, sigma, seed, i)) for i in range(n_seeds)]
    se = float(np.std(vals, ddof=1) / np.sqrt(n_seeds)) if n_seeds > 1 else 0.0
    return float(np.mean(vals)), se


def calibrate_noise(target_fidelity, sigma_grid=DEFAULT_SIGMA_GRID, n_seeds=50, seed=0, sched=None, plan=None):
    """Grid sigma whose mean noisy-walk POVM fidelity is closest to ``target_fidelity``.

    Raises
    ------
    NoBracket
        If the target lies outside the range of mean fidelities on the grid.
    """
    if n_seeds < 1 or not sigma_grid:
        raise ValueError("need at least one seed and one grid point")
    table = []
    for sigma in sigma_grid:
        mean, se = noisy_reference_fidelity(sigma, n_seeds, seed, sched, plan)
        table.append({"sigma": float(sigma), "fidelity": mean, "stderr": se})
    values = [row["fidelity"] for row in table]
    slack = 1e-9
    if not min(values) - slack <= target_fidelity <= max(values) + slack:
        raise NoBracket(f"target {target_fidelity} outside achieved range [{min(values)}, {max(values)}]")
    best = min(table, key=lambda row: (abs(row["fidelity"] - target_fidelity), row["sigma"]))
    return Calibration(best["sigma"], float(target_fidelity), table)
