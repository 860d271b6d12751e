# %% The shipped coin schedule
from collections import Counter

import numpy as np

from collective_lab.povm import optimal_povm, povm_fidelity
from collective_lab.states import octahedron_states, three_copy
from collective_lab.walk import default_schedule, encode, extract_effective_povm, run_with_detectors
from collective_lab.walk.anchors import validate_against_anchors
from collective_lab.walk.engine import noisy_povm
from collective_lab.walk.schedule import coin_multiset

sched, plan = default_schedule()
print("directions:", "".join(sched.directions))
print("coins:", dict(Counter(coin_multiset(sched)).most_common()))
for det in plan:
    print(f"  t={det.t} ({det.y:+d},{det.x:+d}) -> {det.label}")

# %% anchors and the extracted POVM
for c in validate_against_anchors(sched, plan).checks:
    print(f"t={c.t}: deviation {c.max_deviation:.1e}")
walk = extract_effective_povm(sched, plan)
print("fidelity vs ideal:", povm_fidelity(walk, optimal_povm()))

# %% one input state through the detectors
res = run_with_detectors(encode(three_copy(octahedron_states()[4].ket)), sched, plan)
for label, amps in res.records.items():
    print(f"{label:4s} {np.linalg.norm(amps) ** 2:.4f}")

# %% coin noise
for sigma in (0.0, 0.01, 0.02, 0.04):
    fids = [povm_fidelity(noisy_povm(sched, plan, sigma, seed), optimal_povm()) for seed in range(20)]
    print(f"sigma {sigma:.2f}: mean fidelity {np.mean(fids):.5f}")
