"""Numerical workbench for multisetting two-outcome correlation inequalities.

The package covers the full pipeline: coefficient tensors and classical
bounds (`scenario`), the matching quantum operator and reference states
(`quantum`), measurement-frame optimization and strength factors
(`analysis`), a distributed guessing game scored by the same coefficients
(`ccp`), and the supporting dense linear algebra (`linalg`).  The `bellwb`
console script exposes the common reports.
"""

from .errors import BudgetExceededError, StateFormatError
from .rng import DEFAULT_SEED, SEED_ENV_VAR, make_rng, resolve_seed
from .scenario import BellScenario, brute_force_classical_bound

__version__ = "0.1.0"

__all__ = [
    "BellScenario",
    "BudgetExceededError",
    "DEFAULT_SEED",
    "SEED_ENV_VAR",
    "StateFormatError",
    "__version__",
    "brute_force_classical_bound",
    "make_rng",
    "resolve_seed",
]
