"""Query-model algorithms: distinct elements, F_k for k >= 2, and F_infinity."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import MomentEstimate, Stream, sequence_collision_count
from .hashfam import make_family
from .qsim.emulators import HONEST, CostModel, d_smallest_distinct, k_distinctness
from .qsim.ledger import ResourceLedger


class IntegrityError(RuntimeError):
    """Witnesses disagree about the value at a sample position."""


# -- F_0 ---------------------------------------------------------------------------


def f0_sketch_size(eps: float) -> int:
    return math.ceil(96 / eps**2)


def approx_f0_query(
    stream: Stream,
    eps: float,
    rng: np.random.Generator,
    *,
    ledger: ResourceLedger | None = None,
    cost: CostModel = HONEST,
) -> MomentEstimate:
    """Distinct elements from the d smallest distinct hash values.

    h: [m] -> [m^3] is pairwise independent; if v is the d-th smallest distinct
    value of h(a_i), the estimate is d m^3 / v.  When fewer than d distinct
    values exist the subroutine has listed all of them and their count is exact.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    ledger = ledger if ledger is not None else ResourceLedger()
    d = f0_sketch_size(eps)
    M = stream.m**3
    h = make_family(2, stream.m, M).sample(rng)
    table = {v: h(v) for v in set(stream.items)}
    hashed = [table[a] for a in stream.items]
    chosen = d_smallest_distinct(
        hashed, hashed, d, stream.n, 1 / 15, rng, ledger=ledger, cost=cost
    )
    ledger.notes["f_g_charge"] = "combined f=g query charged once"
    confidence = 3 / 5 - 1 / stream.m
    if len(chosen) < d:
        return MomentEstimate(float(len(chosen)), 0, eps, confidence, ("exact_branch",))
    v = max(hashed[i - 1] for i in chosen)
    return MomentEstimate(d * M / v, 0, eps, confidence)


# -- F_k, k >= 2 -------------------------------------------------------------------


def proof_constants(k: int) -> tuple[float, float, float]:
    """(A, B, K) from the correctness argument; M = ceil(K / eps^2)."""
    A = (k / math.e) * 20 ** (-1 / k)
    B = 20.0 * k ** (2 * k + 1)
    K = 5 * k ** (2 * k + 1) * B ** (4 * k - 2) / A ** (2 * k)
    return A, B, K


@dataclass
class FkQueryConfig:
    k: int
    eps: float
    K: float | None = None  # None: the (astronomical) constant from the proof
    cost: CostModel = field(default_factory=CostModel)
    forced_ell: int | None = None
    max_rounds: int = 10**6

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        A, B, K = proof_constants(self.k)
        self.A, self.B = A, B
        if self.K is None:
            self.K = K

    @property
    def rounds(self) -> int:
        return math.ceil(self.K / self.eps**2)


def reconstruct_consistent_sequence(
    ell: int, witnesses: list[tuple[tuple[int, ...], int]], *, fresh_start: int
) -> list[int]:
    """Build a length-ell sequence consistent with the witnessed equalities.

    `witnesses` holds (positions, value) pairs, positions 0-based into the
    sample.  Witnessed positions carry their values first; every other slot
    gets a fresh value starting at `fresh_start` (kept above the universe).
    """
    known: dict[int, int] = {}
    for positions, value in witnesses:
        for pos in positions:
            if not 0 <= pos < ell:
                raise IntegrityError(f"witness position {pos} outside the sample")
            if known.setdefault(pos, value) != value:
                raise IntegrityError(f"position {pos} witnessed with two values")
    seq = [known[pos] for pos in sorted(known)]
    fresh = fresh_start
    while len(seq) < ell:
        seq.append(fresh)
        fresh += 1
    return seq


def _sample(stream: Stream, size: int, rng: np.random.Generator) -> list[int]:
    idx = rng.integers(0, stream.n, size=size)
    return [stream.items[i] for i in idx]


def collision_round(
    sample: list[int],
    config: FkQueryConfig,
    rng: np.random.Generator,
    ledger: ResourceLedger,
    fresh_start: int,
) -> int:
    """One pass of step 3: strip witnesses until "no", rebuild, count collisions."""
    ell = len(sample)
    delta = min(config.eps**2 / (8 * config.K * ell), 0.5)
    live = list(range(ell))
    witnesses: list[tuple[tuple[int, ...], int]] = []
    # each truthful iteration removes one position, so ell iterations always suffice
    for _ in range(ell):
        outcome = k_distinctness(
            [sample[p] for p in live], config.k, delta, rng, ledger=ledger, cost=config.cost
        )
        if not outcome.found:
            break
        positions = tuple(live[p] for p in outcome.witness)
        witnesses.append((positions, outcome.value))
        live.remove(positions[-1])
    rebuilt = reconstruct_consistent_sequence(ell, witnesses, fresh_start=fresh_start)
    return sequence_collision_count(rebuilt, config.k)


def choose_sample_size(
    stream: Stream, config: FkQueryConfig, rng: np.random.Generator, ledger: ResourceLedger
) -> int:
    """Doubling search for the first sample size holding a k-wise collision."""
    n = stream.n
    delta = min(1 / (8 * max(math.log2(n), 1.0)), 0.5)
    for i in range(math.ceil(math.log2(n)) + 1 if n > 1 else 1):
        size = 2**i
        outcome = k_distinctness(
            _sample(stream, size, rng), config.k, delta, rng, ledger=ledger, cost=config.cost
        )
        if outcome.found:
            return size
    return n


def approx_fk_query(
    stream: Stream,
    config: FkQueryConfig,
    rng: np.random.Generator,
    *,
    ledger: ResourceLedger | None = None,
) -> MomentEstimate:
    ledger = ledger if ledger is not None else ResourceLedger()
    n, k = stream.n, config.k
    if config.forced_ell is not None:
        ell = config.forced_ell
    else:
        ell = choose_sample_size(stream, config, rng, ledger)
    rounds = config.rounds
    if rounds > config.max_rounds:
        raise ValueError(
            f"{rounds} rounds exceed max_rounds={config.max_rounds}; lower K for a runnable profile"
        )
    total = 0
    for _ in range(rounds):
        total += collision_round(_sample(stream, ell, rng), config, rng, ledger, stream.m + 1)
    denom = rounds * math.comb(ell, k)
    value = n**k * total / denom if denom else 0.0
    return MomentEstimate(float(value), k, config.eps, 3 / 4)


def step4_estimate(n: int, k: int, ell: int, counts) -> float:
    """n^k / (M binom(ell, k)) * sum_r C^(r)."""
    counts = list(counts)
    return n**k * sum(counts) / (len(counts) * math.comb(ell, k))


# -- F_infinity ----------------------------------------------------------------------


def _has_k_equal(
    stream: Stream, threshold: int, delta: float, rng, ledger, cost
) -> bool:
    if threshold <= 1:
        return stream.n >= 1
    return k_distinctness(stream.items, threshold, delta, rng, ledger=ledger, cost=cost).found


def approx_f_infty_query(
    stream: Stream,
    eps: float,
    rng: np.random.Generator,
    *,
    ledger: ResourceLedger | None = None,
    cost: CostModel = HONEST,
) -> MomentEstimate:
    """Binary search on the threshold of k-distinctness decisions.

    Keeps lo <= F_inf < hi and stops once hi - 1 <= (1 + eps) lo, so lo is
    within relative error eps.  The first probe is at threshold n.  Each decision runs at failure probability
    1/(6 ceil(log2 n)).
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if stream.n == 0:
        raise ValueError("F_infinity is undefined for an empty stream")
    ledger = ledger if ledger is not None else ResourceLedger()
    n = stream.n
    delta = 1 / (6 * max(1, math.ceil(math.log2(n))))
    lo, hi = 1, n + 1
    steps = 1
    # probing the top threshold first makes the all-equal case exact
    if _has_k_equal(stream, n, delta, rng, ledger, cost):
        lo = n
    while hi - 1 > (1 + eps) * lo:
        mid = max(lo + 1, min(hi - 1, math.isqrt(lo * hi)))
        if _has_k_equal(stream, mid, delta, rng, ledger, cost):
            lo = mid
        else:
            hi = mid
        steps += 1
    ledger.notes["binary_search_steps"] = str(steps)
    return MomentEstimate(float(lo), math.inf, eps, 2 / 3)


def gapped_k_distinctness(
    stream: Stream,
    k: int,
    eps: float,
    rng: np.random.Generator,
    *,
    ledger: ResourceLedger | None = None,
    cost: CostModel = HONEST,
) -> int:
    """1 if the stream holds k equal elements, 2 if no (1-eps)k equal elements.

    Outside that promise the answer is unspecified.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    est = approx_f_infty_query(stream, eps / 3, rng, ledger=ledger, cost=cost)
    return 1 if est.value >= (1 - eps / 2) * k else 2
