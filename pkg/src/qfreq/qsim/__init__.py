from .amplitude import (
    AEResult,
    ae_distribution,
    ae_error_bound,
    ae_statevector_distribution,
    amplitude_estimate,
    bernoulli_operator,
    iterations_for_error,
)
from .emulators import (
    HONEST,
    CostModel,
    KDistinctnessOutcome,
    d_smallest_distinct,
    k_distinctness,
    kdist_charge,
    kdist_exponent,
    mean_estimate_rel_var,
    mean_estimation_charge,
)
from .ledger import LEDGER_COLUMNS, ResourceLedger
from .search import durr_hoyer_min, durr_hoyer_min_statevector, min_finding_budget
from .statevector import (
    OracleLayout,
    Statevector,
    apply_query_oracle,
    grover_search_statevector,
    oracle_query,
)

__all__ = [
    "AEResult",
    "CostModel",
    "HONEST",
    "KDistinctnessOutcome",
    "LEDGER_COLUMNS",
    "OracleLayout",
    "ResourceLedger",
    "Statevector",
    "ae_distribution",
    "ae_error_bound",
    "ae_statevector_distribution",
    "amplitude_estimate",
    "apply_query_oracle",
    "bernoulli_operator",
    "d_smallest_distinct",
    "durr_hoyer_min",
    "durr_hoyer_min_statevector",
    "grover_search_statevector",
    "iterations_for_error",
    "k_distinctness",
    "kdist_charge",
    "kdist_exponent",
    "mean_estimate_rel_var",
    "mean_estimation_charge",
    "min_finding_budget",
    "oracle_query",
]
