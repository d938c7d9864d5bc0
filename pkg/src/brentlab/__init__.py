"""Average-case analysis of the binary Euclidean algorithm.

Exact tracing and enumeration, the invariant density of the associated
transfer operator, and the constants and series identities built on it.
"""

from .gcd import (
    BUILTIN_COSTS,
    COST_E,
    COST_N,
    COST_S,
    COST_T,
    Branch,
    CostFunction,
    OddPair,
    StepRecord,
    Trace,
    binary_gcd_trace,
    binary_step,
    reduce_to_odd,
    strip_twos,
    total_cost,
)
from .ensembles import EnsembleId, EnsembleStats, ensemble_census, enumerate_pairs, mean_cost, slope_fit

__version__ = "0.1.0"
