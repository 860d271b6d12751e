"""Three-copy collective qubit measurement: construction, quantum-walk realisation, certificate, estimation."""

from .estimation import EstimationConfig, analytic_fidelity, bounds, icosahedron_average, run_trials, sweep_theta
from .povm import Povm, optimal_povm, povm_fidelity, validate_povm
from .separability import certify_genuinely_collective
from .walk import default_schedule, extract_effective_povm

__version__ = "0.1.0"
