# %% Genuine collectiveness
import json

from collective_lab.povm import optimal_povm
from collective_lab.separability import (
    biseparable_report,
    certify_genuinely_collective,
    e7_witness,
    example_povms,
    lemma1_trace,
    singlet,
)
from collective_lab.states import haar_random_kets, make_rng

rep = certify_genuinely_collective(optimal_povm())
print(rep.verdict)
print("complement rank:", rep.fact("complement_rank"))
print([(e.label, e.classification) for e in rep.elements])

# %% E7 as a sum of three pair-singlet products
for cut, part in e7_witness():
    print(cut, round(float(part.trace().real), 6))

# %% the singlet is the only pair state orthogonal to Sym3 after adding a third qubit
phis = haar_random_kets(make_rng(0), 5)
print([round(lemma1_trace(singlet(), phi), 16) for phi in phis])

# %% a mixture of Bell measurements on different pairs
k2 = certify_genuinely_collective(example_povms(0.5)["K2"])
print("K2:", k2.verdict, "straddling:", k2.fact("straddling"))
print(json.dumps(biseparable_report(0.5).facts, indent=1))
