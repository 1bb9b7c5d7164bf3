"""Durr-Hoyer minimum finding with exponentially growing Grover runs.

The emulated tier never builds a state: each Grover run with j iterations
succeeds with probability sin^2((2j+1) theta), theta = asin(sqrt(t/N)), where
t is the number of items below the current threshold (known to the emulator).
The statevector tier runs the same control loop on actual amplitudes and is
used to validate the emulator on small N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .ledger import ResourceLedger
from .statevector import Statevector, grover_iterate

DEFAULT_BUDGET_MULTIPLIER = 22.5
GROWTH = 8 / 7


@dataclass(frozen=True)
class MinFindResult:
    index: int  # 1-based
    queries: int
    grover_iterations: int
    threshold_updates: int


def grover_success_probability(N: int, t: int, iterations: int) -> float:
    if t <= 0:
        return 0.0
    theta = math.asin(math.sqrt(t / N))
    return math.sin((2 * iterations + 1) * theta) ** 2


def min_finding_budget(N: int, budget_multiplier: float = DEFAULT_BUDGET_MULTIPLIER) -> int:
    """Total oracle uses the search runs for; zero when N = 1."""
    if N <= 1:
        return 0
    return math.ceil(budget_multiplier * math.sqrt(N))


class _EmulatedMeasurement:
    def __init__(self, values: np.ndarray):
        self.order = np.argsort(values, kind="stable")
        self.sorted = values[self.order]
        self.N = values.size

    def __call__(self, threshold: float, iterations: int, rng: np.random.Generator) -> int:
        t = int(np.searchsorted(self.sorted, threshold, side="left"))
        if rng.random() < grover_success_probability(self.N, t, iterations):
            return int(self.order[rng.integers(0, t)])
        return int(self.order[t + rng.integers(0, self.N - t)])


class _StatevectorMeasurement:
    def __init__(self, values: np.ndarray):
        self.values = values
        self.N = values.size
        self.q = max(1, math.ceil(math.log2(self.N)))
        self.start = Statevector.uniform(self.q, self.N).amplitudes.copy()

    def __call__(self, threshold: float, iterations: int, rng: np.random.Generator) -> int:
        marked = np.zeros(1 << self.q, dtype=bool)
        marked[: self.N] = self.values < threshold
        state = Statevector(self.start)
        grover_iterate(state, marked, self.start, iterations)
        return state.measure(rng)


def _durr_hoyer(
    values: np.ndarray,
    measure: Callable[[float, int, np.random.Generator], int],
    rng: np.random.Generator,
    budget: int,
    growth: float,
) -> MinFindResult:
    N = values.size
    if N == 1:
        return MinFindResult(1, 0, 0, 0)
    cap = math.sqrt(N)
    y = int(rng.integers(0, N))
    used = 1
    iterations_total = 0
    updates = 0
    while used < budget:
        limit = 1.0
        while used < budget:
            j = int(rng.integers(0, max(1, math.ceil(limit))))
            # a final run is cut short so the total lands exactly on the budget
            j = min(j, budget - used - 1)
            i = measure(values[y], j, rng)
            used += j + 1
            iterations_total += j
            if values[i] < values[y]:
                y = i
                updates += 1
                break
            limit = min(growth * limit, cap)
    return MinFindResult(y + 1, used, iterations_total, updates)


def durr_hoyer_min(
    values: Sequence[float] | np.ndarray,
    rng: np.random.Generator,
    *,
    budget_multiplier: float = DEFAULT_BUDGET_MULTIPLIER,
    ledger: ResourceLedger | None = None,
    growth: float = GROWTH,
) -> MinFindResult:
    """Emulated minimum finding over the value oracle `values` (index i+1 -> values[i])."""
    values = np.asarray(values, dtype=float)
    if values.size < 1:
        raise ValueError("need at least one value")
    budget = max(min_finding_budget(values.size, budget_multiplier), 1)
    result = _durr_hoyer(values, _EmulatedMeasurement(values), rng, budget, growth)
    if ledger is not None:
        ledger.charge_queries(result.queries, by="durr_hoyer")
    return result


def durr_hoyer_min_statevector(
    values: Sequence[float] | np.ndarray,
    rng: np.random.Generator,
    *,
    budget_multiplier: float = DEFAULT_BUDGET_MULTIPLIER,
    growth: float = GROWTH,
) -> MinFindResult:
    values = np.asarray(values, dtype=float)
    if values.size > 1 << 12:
        raise ValueError("statevector minimum finding is limited to 4096 items")
    budget = max(min_finding_budget(values.size, budget_multiplier), 1)
    return _durr_hoyer(values, _StatevectorMeasurement(values), rng, budget, growth)
