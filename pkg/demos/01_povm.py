# %% Seven-outcome three-copy POVM
import numpy as np

from collective_lab.linalg import proj
from collective_lab.povm import optimal_povm, outcome_probabilities, symmetry_kit, validate_povm
from collective_lab.states import octahedron_states, three_copy

p = optimal_povm()
print(validate_povm(p).to_json())
print("traces:", np.round([np.trace(e).real for e in p.elements], 12))

# %% E7 lives on the complement of the symmetric subspace
kit = symmetry_kit()
print("P3 E7 P3 max:", np.abs(kit.P3 @ p.element("E7") @ kit.P3).max())
print("rank E7:", np.linalg.matrix_rank(p.element("E7")))

# %% outcome table for the six octahedron states
table = np.array([outcome_probabilities(p, proj(three_copy(e.ket))) for e in octahedron_states()])
np.set_printoptions(precision=4, suppress=True)
print(table)
print("row sums:", table.sum(axis=1))
