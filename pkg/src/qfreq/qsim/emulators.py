"""Cost-charged emulators for the quantum subroutines the algorithms invoke.

Each emulator honours its subroutine's input/output contract with a classical
computation and charges the ledger the quantum cost from the corresponding
complexity bound, with the constants exposed through CostModel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np

from .ledger import ResourceLedger

MEAN_EST_GROUPS = 18


@dataclass(frozen=True)
class CostModel:
    c_kdist: float = 1.0
    c_dsmall: float = 1.0
    c_ae_passes_per_iteration: int = 4
    budget_multiplier: float = 22.5
    failure_injection: bool = False

    def __post_init__(self):
        if min(self.c_kdist, self.c_dsmall, self.budget_multiplier) <= 0:
            raise ValueError("cost constants must be positive")
        if self.c_ae_passes_per_iteration != 4:
            raise ValueError("amplitude estimation costs 4 passes per iteration")


HONEST = CostModel()


def _note_injection(ledger: ResourceLedger | None) -> None:
    if ledger is not None:
        ledger.notes["injected_failures"] = str(int(ledger.notes.get("injected_failures", "0")) + 1)


# -- d smallest distinct values ---------------------------------------------------


def d_smallest_charge(d: int, n: int, cost: CostModel = HONEST) -> int:
    return math.ceil(cost.c_dsmall * math.sqrt(d * n))


def _as_lookup(oracle, n: int) -> Callable[[int], int]:
    if callable(oracle):
        return oracle
    seq = list(oracle)
    if len(seq) != n:
        raise ValueError("oracle sequence length must equal n")
    return lambda i: seq[i - 1]


def d_smallest_distinct(
    f_oracle,
    g_oracle,
    d: int,
    n: int,
    delta: float,
    rng: np.random.Generator,
    *,
    ledger: ResourceLedger | None = None,
    cost: CostModel = HONEST,
) -> list[int]:
    """Indices (1-based) of the d smallest f-values subject to pairwise-distinct g-types.

    f and g are charged once per index even when they are the same function.
    With failure injection on, the emulator returns the d' *largest* types
    with probability delta.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    f = _as_lookup(f_oracle, n)
    g = _as_lookup(g_oracle, n)
    best: dict[int, int] = {}
    for i in range(1, n + 1):
        key = g(i)
        if key not in best or f(i) < f(best[key]):
            best[key] = i
    ranked = sorted(best.values(), key=lambda i: (f(i), i))
    d_prime = min(d, len(ranked))
    chosen = ranked[:d_prime]
    if cost.failure_injection and rng.random() < delta:
        chosen = ranked[len(ranked) - d_prime :]
        _note_injection(ledger)
    if ledger is not None:
        ledger.charge_queries(d_smallest_charge(d, n, cost), by="d_smallest")
    return sorted(chosen, key=lambda i: (f(i), i))


# -- k-distinctness ---------------------------------------------------------------


def kdist_exponent(k: int) -> float:
    """1 - 2^(k-2)/(2^k - 1), written to stay finite for large k."""
    if k < 2:
        raise ValueError("k must be at least 2")
    return 1.0 - 1.0 / (4.0 - 2.0 ** (2 - k))


def _ceil(x: float) -> int:
    return math.ceil(x - 1e-12)


def kdist_charge(length: int, k: int, delta: float, cost: CostModel = HONEST) -> int:
    """ceil(c * L^alpha) * max(1, ceil(log_3(1/delta))), excluding witness checks."""
    if length <= 0:
        return 0
    base = _ceil(cost.c_kdist * length ** kdist_exponent(k))
    reps = max(1, _ceil(math.log(1.0 / delta) / math.log(3.0)))
    return base * reps


@dataclass(frozen=True)
class KDistinctnessOutcome:
    """Either a witness (positions into the queried sequence, 0-based) or "no"."""

    witness: tuple[int, ...] | None
    value: int | None = None

    @property
    def found(self) -> bool:
        return self.witness is not None


NO = KDistinctnessOutcome(None)


def _first_collision(values: Sequence[int], k: int) -> tuple[int, ...] | None:
    seen: dict[int, list[int]] = {}
    for pos, v in enumerate(values):
        bucket = seen.setdefault(v, [])
        bucket.append(pos)
        if len(bucket) == k:
            return tuple(bucket)
    return None


def k_distinctness(
    values: Sequence[int],
    k: int,
    delta: float,
    rng: np.random.Generator,
    *,
    ledger: ResourceLedger | None = None,
    cost: CostModel = HONEST,
) -> KDistinctnessOutcome:
    """Find k positions holding equal values, or report "no".

    The witness returned is the earliest-completing k-tuple; its last position
    is the one whose k-th occurrence closed the tuple.  Any claimed witness is
    re-checked at k extra queries, so an injected false positive degrades to
    "no".
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    values = list(values)
    if ledger is not None:
        ledger.charge_queries(kdist_charge(len(values), k, delta, cost), by="k_distinctness")
    witness = _first_collision(values, k)
    if cost.failure_injection and rng.random() < delta:
        _note_injection(ledger)
        if witness is not None:
            return NO
        if len(values) < k:
            return NO
        witness = tuple(sorted(rng.choice(len(values), size=k, replace=False).tolist()))
    if witness is None:
        return NO
    if ledger is not None:
        ledger.charge_queries(k, by="k_distinctness")
    checked = [values[pos] for pos in witness]
    if len(set(checked)) != 1:
        return NO
    return KDistinctnessOutcome(witness, checked[0])


# -- mean estimation with a relative-variance bound ---------------------------------


class Sampler(Protocol):
    passes_per_use: int
    queries_per_use: int

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray: ...


def mean_estimation_charge(B: float, eps: float) -> int:
    """Sampler uses charged for one run: (B/e)(ln(B/e)+1)^1.5 (ln(ln(B/e)+2)+1)."""
    x = B / eps
    return math.ceil(x * (math.log(x) + 1) ** 1.5 * (math.log(math.log(x) + 2) + 1))


def mean_estimation_samples(B: float, eps: float) -> tuple[int, int]:
    """(groups, draws per group) used by the classical median-of-means backend."""
    return MEAN_EST_GROUPS, math.ceil(9 * B / eps**2)


def mean_estimate_rel_var(
    sampler: Sampler,
    B: float,
    eps: float,
    rng: np.random.Generator,
    *,
    ledger: ResourceLedger | None = None,
    chunk: int = 4096,
) -> float:
    """Estimate E[v] to relative error eps given E[v^2]/E[v]^2 <= B.

    Median of 18 group means, each over ceil(9B/eps^2) draws; a group fails with
    probability at most 1/9 by Chebyshev.  The ledger is charged the quantum
    rate while classical_samples records the draws actually made.
    """
    if B < 1:
        raise ValueError("relative-variance bound B must be at least 1")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    groups, per_group = mean_estimation_samples(B, eps)
    means = np.empty(groups)
    for g in range(groups):
        total = 0.0
        left = per_group
        while left:
            take = min(chunk, left)
            draws = np.asarray(sampler.draw(rng, take), dtype=float)
            if np.any(draws < 0):
                raise ValueError("sampler produced a negative value")
            total += float(draws.sum())
            left -= take
        means[g] = total / per_group
    if ledger is not None:
        uses = mean_estimation_charge(B, eps)
        ledger.charge_queries(uses * sampler.queries_per_use, by="mean_estimation")
        ledger.charge_passes(uses * sampler.passes_per_use, by="mean_estimation")
        ledger.charge_samples(groups * per_group)
    return float(np.median(means))
