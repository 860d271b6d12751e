"""Coin schedules, detector plans and their JSON file format."""

import json
from collections import Counter
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import NamedTuple

import numpy as np

from .coins import COINS

SCHEDULE_VERSION = 1
DIRECTIONS = ("V", "V", "H", "V", "V", "H", "H", "V", "V")


@dataclass(frozen=True)
class SiteCoin:
    """Coin placed at one site for one step: ``phase * matrix``.

    ``matrix`` overrides the dictionary entry for ``coin`` (used by noisy
    schedules); the label is kept for bookkeeping.
    """

    coin: str = "IDENTITY"
    phase: complex = 1.0 + 0j
    matrix: np.ndarray = field(default=None, compare=False)

    def unitary(self):
        base = COINS[self.coin] if self.matrix is None else self.matrix
        return self.phase * base

    def is_trivial(self):
        return self.coin == "IDENTITY" and self.matrix is None and abs(self.phase - 1) < 1e-15


class Detector(NamedTuple):
    t: int
    y: int
    x: int
    label: str

    @property
    def outcome(self):
        """Outcome the detector contributes to: 'E7b' -> 'E7'."""
        return self.label.rstrip("abcdefgh")


DEFAULT_PLAN = (
    Detector(2, 3, 1, "E1"),
    Detector(2, -3, -1, "E2"),
    Detector(3, 1, -2, "E7a"),
    Detector(3, -1, 2, "E7b"),
    Detector(6, -1, 1, "E3"),
    Detector(6, 1, -1, "E4"),
    Detector(8, 2, 2, "E7c"),
    Detector(8, -2, -2, "E7d"),
    Detector(9, 1, 0, "E5"),
    Detector(9, -1, 0, "E6"),
)


@dataclass
class CoinSchedule:
    """Per-step walking direction plus the coins at each site.

    ``assignments[t]`` maps ``(y, x)`` to a :class:`SiteCoin`; sites that are
    not listed get the identity coin with phase 1.
    """

    directions: tuple = DIRECTIONS
    assignments: dict = field(default_factory=dict)

    @property
    def n_steps(self):
        return len(self.directions)

    def coins_at(self, t):
        return self.assignments.get(t, {})

    def with_step(self, t, coins):
        new = {k: dict(v) for k, v in self.assignments.items()}
        kept = {(int(y), int(x)): sc for (y, x), sc in coins.items() if not sc.is_trivial()}
        if kept:
            new[t] = kept
        else:
            new.pop(t, None)
        return replace(self, assignments=new)

    def without_steps(self, steps):
        return replace(
            self,
            assignments={t: dict(v) for t, v in self.assignments.items() if t not in steps},
        )

    def items(self):
        """(t, (y, x), SiteCoin) in canonical order."""
        for t in sorted(self.assignments):
            for site in sorted(self.assignments[t]):
                yield t, site, self.assignments[t][site]


def coin_multiset(sched):
    """Count of non-identity coins by label."""
    return Counter(sc.coin for _, _, sc in sched.items() if sc.coin != "IDENTITY")


def _encode_complex(z):
    z = complex(z)
    return [z.real, z.imag]


def schedule_to_dict(sched, plan=DEFAULT_PLAN):
    rows = []
    for t, (y, x), sc in sched.items():
        row = {"t": t, "y": y, "x": x, "coin": sc.coin, "phase": _encode_complex(sc.phase)}
        if sc.matrix is not None:
            row["matrix"] = [[_encode_complex(z) for z in r] for r in sc.matrix]
        rows.append(row)
    return {
        "version": SCHEDULE_VERSION,
        "directions": list(sched.directions),
        "assignments": rows,
        "detectors": [d._asdict() for d in plan],
    }


def schedule_from_dict(data):
    """Parse the JSON-shaped schedule format; returns ``(schedule, plan)``."""
    if data.get("version") != SCHEDULE_VERSION:
        raise ValueError(f"unsupported schedule version {data.get('version')!r}")
    directions = tuple(data["directions"])
    if any(d not in ("V", "H") for d in directions):
        raise ValueError(f"directions must be 'V' or 'H': {directions}")
    assignments = {}
    for row in data["assignments"]:
        if row["coin"] not in COINS:
            raise ValueError(f"unknown coin {row['coin']!r}")
        matrix = None
        if "matrix" in row:
            matrix = np.array([[complex(*z) for z in r] for r in row["matrix"]])
        sc = SiteCoin(row["coin"], complex(*row.get("phase", (1.0, 0.0))), matrix)
        site = (int(row["y"]), int(row["x"]))
        step = assignments.setdefault(int(row["t"]), {})
        if site in step:
            raise ValueError(f"duplicate assignment at t={row['t']} site={site}")
        step[site] = sc
    plan = tuple(Detector(int(d["t"]), int(d["y"]), int(d["x"]), str(d["label"])) for d in data["detectors"])
    if len({(d.t, d.y, d.x) for d in plan}) != len(plan):
        raise ValueError("two detectors share (t, y, x)")
    return CoinSchedule(directions, assignments), plan


def load_schedule(path):
    with open(path) as fh:
        return schedule_from_dict(json.load(fh))


def schedule_to_json(sched, plan=DEFAULT_PLAN):
    """JSON text with one assignment or detector per line."""
    data = schedule_to_dict(sched, plan)
    lines = ["{"]
    lines.append(f'  "version": {data["version"]},')
    lines.append(f'  "directions": {json.dumps(data["directions"])},')
    for key, closing in (("assignments", ","), ("detectors", "")):
        rows = [f"    {json.dumps(r)}" for r in data[key]]
        lines.append(f'  "{key}": [')
        lines.append(",\n".join(rows))
        lines.append(f"  ]{closing}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dump_schedule(sched, path, plan=DEFAULT_PLAN):
    with open(path, "w") as fh:
        fh.write(schedule_to_json(sched, plan))


def default_schedule():
    """The shipped 30-coin schedule and its detector plan."""
    text = resources.files("collective_lab.data").joinpath("default_schedule.json").read_text()
    return schedule_from_dict(json.loads(text))
