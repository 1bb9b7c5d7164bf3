"""Multiple-pass streaming algorithms and their pass/space accounting.

The stream only replays forward.  A reversible map that needs undoing is
realised as a second forward pass applying the inverse per-element update, so
every compute/uncompute cycle costs two passes.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import MomentEstimate, Stream, frequency_vector
from .hashfam import (
    HashFamily,
    HashFunction,
    SignHashFunction,
    make_family,
    make_sign_family,
    sign_values,
)
from .qsim.amplitude import amplitude_estimate, iterations_for_error
from .qsim.emulators import HONEST, CostModel, mean_estimate_rel_var, mean_estimation_charge
from .qsim.ledger import ResourceLedger
from .qsim.search import durr_hoyer_min, min_finding_budget

ROUGH_SCALE = 8
ROUGH_HASHES = 9
ENUMERABLE_FAMILY = 1 << 16


def bits(x: int) -> int:
    """Width of a register holding values in [0, x]."""
    return max(1, math.ceil(math.log2(x + 1)))


class RegisterIntegrityError(RuntimeError):
    pass


@dataclass
class StreamSpaceBudget:
    """Live register widths; the ledger sees the high-water total."""

    ledger: ResourceLedger
    live: dict[str, int] = field(default_factory=dict)

    def allocate(self, name: str, width: int) -> None:
        self.live[name] = int(width)
        self.ledger.note_space(self.total)

    def release(self, name: str) -> None:
        self.live.pop(name, None)

    @property
    def total(self) -> int:
        return sum(self.live.values())


class PassRunner:
    """Delivers a_1..a_n in order; each full traversal is one charged pass."""

    def __init__(self, stream: Stream, ledger: ResourceLedger):
        self.stream = stream
        self.ledger = ledger
        self.passes = 0

    def replay(self, update: Callable[[int], None]) -> None:
        for a in self.stream.items:
            update(a)
        self.passes += 1
        self.ledger.charge_passes(1)

    def charge(self, passes: int, *, by: str | None = None) -> None:
        """Account passes whose per-element work is emulated in closed form."""
        self.passes += passes
        self.ledger.charge_passes(passes, by=by)


# -- distinct elements ----------------------------------------------------------------


class AnyHashOnePredicate:
    """f(j) = [exists i with h_j(a_i) = 1] as a two-pass reversible map.

    Pass one adds [h_j(a) = 1] into a counter for every element; the flag is
    XORed with [counter != 0]; pass two subtracts the same indicators so the
    counter returns to zero.
    """

    def __init__(self, stream: Stream, family: HashFamily):
        self.stream = stream
        self.family = family
        self.support = np.asarray(sorted(set(stream.items)), dtype=np.int64)

    def apply(self, j: int, flag: int, runner: PassRunner) -> int:
        h = self.family.member(j)
        reg = {"count": 0}

        def add(a):
            reg["count"] += h(a) == 1

        def sub(a):
            reg["count"] -= h(a) == 1

        runner.replay(add)
        flag ^= int(reg["count"] != 0)
        runner.replay(sub)
        if reg["count"] != 0:
            raise RegisterIntegrityError("counter register not restored after uncompute pass")
        return flag

    def truth_table(self) -> np.ndarray:
        """f(j) for every member j = 1..|H| (enumerable families only)."""
        fam = self.family
        if fam.cardinality > ENUMERABLE_FAMILY:
            raise ValueError("family too large to enumerate")
        j = np.arange(fam.cardinality, dtype=np.int64)
        coeffs = np.stack([(j // fam.p**i) % fam.p for i in range(fam.t)], axis=1)
        vals = fam.field_values(coeffs, self.support) % fam.R
        return (vals == 0).any(axis=1)

    def good_probability(self) -> float:
        """Exact for enumerable families, else the independent-values model.

        The model treats h(x) for distinct x as independent with the family's
        exact per-point probability of hitting 1; t-wise independence keeps
        the true value within eps/300 of it for the t chosen by the caller.
        """
        fam = self.family
        if fam.cardinality <= ENUMERABLE_FAMILY and fam.p * int(self.support.max()) < 2**62:
            return float(self.truth_table().mean())
        hit = -(-fam.p // fam.R) / fam.p
        return 1.0 - (1.0 - hit) ** self.support.size

    def operator(self) -> tuple[np.ndarray, np.ndarray]:
        """(A, good) on |j>|z>: uniform over members, then z ^= f(j)."""
        table = self.truth_table()
        J = table.size
        dim = 1 << max(1, math.ceil(math.log2(J)))
        u = np.zeros(dim, dtype=np.complex128)
        u[:J] = 1 / math.sqrt(J)
        w = -u
        w[0] += 1.0
        if np.linalg.norm(w) < 1e-15:
            prep = np.eye(dim, dtype=np.complex128)
        else:
            prep = np.eye(dim) - 2 * np.outer(w, w.conj()) / np.vdot(w, w)
        A = np.kron(prep, np.eye(2))
        flip = np.zeros(dim, dtype=bool)
        flip[:J] = table
        perm = np.arange(2 * dim).reshape(dim, 2)
        perm[flip] = perm[flip][:, ::-1]
        P = np.eye(2 * dim, dtype=np.complex128)[perm.ravel()]
        good = np.tile([False, True], dim)
        return P @ A, good


def boolean_any_hash_one(stream: Stream, family: HashFamily) -> AnyHashOnePredicate:
    return AnyHashOnePredicate(stream, family)


def estimate_any_hash_one(
    predicate: AnyHashOnePredicate,
    eps: float,
    rng: np.random.Generator,
    *,
    ledger: ResourceLedger,
    statevector: bool = False,
) -> float:
    """Amplitude-estimate Pr_j[f(j) = 1] to additive eps (probability >= 8/pi^2)."""
    M = iterations_for_error(eps)
    kwargs = {"operator": predicate.operator()} if statevector else {
        "probability": predicate.good_probability()
    }
    return amplitude_estimate(M, rng, ledger=ledger, passes_per_iteration=4, **kwargs).estimate


def rough_f0(
    stream: Stream,
    rng: np.random.Generator,
    *,
    ledger: ResourceLedger | None = None,
    scale: int = ROUGH_SCALE,
) -> int:
    """One-pass constant-factor estimate R with Pr[2 F0 <= R <= 50 F0] >= 3/5.

    Nine pairwise-independent hashes into [2^L]; for each, the largest number
    of trailing zeros seen; R = scale * 2^(median).
    """
    if stream.n == 0:
        raise ValueError("rough estimate needs a non-empty stream")
    L = bits(stream.m) + 4
    fam = make_family(2, stream.m, 1 << L)
    coeffs = fam.sample_coefficients(rng, ROUGH_HASHES)
    support = np.asarray(sorted(set(stream.items)), dtype=np.int64)
    v = fam.field_values(coeffs, support) % (1 << L)
    low = v & -v
    tz = np.where(v == 0, L, np.log2(np.where(low == 0, 1, low)).astype(np.int64))
    z = int(np.median(tz.max(axis=1)))
    if ledger is not None:
        ledger.charge_passes(1)
        ledger.note_space(ROUGH_HASHES * (fam.index_width + bits(L)))
    return scale * 2**z


def f0_from_probability(p: float, R: int) -> float:
    return math.log(1 - p) / math.log(1 - 1 / R)


def hash_independence(eps: float) -> int:
    return math.ceil(math.log(300 / eps) / math.log(5))


@dataclass(frozen=True)
class F0StreamProfile:
    rough_reps: int = 5
    ae_reps: int = 3


def f0_stream_pass_count(eps: float, profile: F0StreamProfile = F0StreamProfile()) -> int:
    M = iterations_for_error(eps / 300)
    return profile.rough_reps + profile.ae_reps * 4 * M


def approx_f0_stream(
    stream: Stream,
    eps: float,
    rng: np.random.Generator,
    *,
    ledger: ResourceLedger | None = None,
    profile: F0StreamProfile = F0StreamProfile(),
) -> MomentEstimate:
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    ledger = ledger if ledger is not None else ResourceLedger()
    runner = PassRunner(stream, ledger)
    R = int(np.median([rough_f0(stream, rng, ledger=ledger) for _ in range(profile.rough_reps)]))
    t = hash_independence(eps)
    family = make_family(t, stream.m, R)
    predicate = AnyHashOnePredicate(stream, family)
    p = predicate.good_probability()
    M = iterations_for_error(eps / 300)
    space = StreamSpaceBudget(ledger)
    space.allocate("R", bits(R))
    space.allocate("hash_index", family.index_width)
    space.allocate("counter", bits(stream.n))
    space.allocate("flag", 1)
    space.allocate("direction", 1)
    space.allocate("phase", bits(M - 1))
    estimates = []
    for _ in range(profile.ae_reps):
        res = amplitude_estimate(M, rng, probability=p)
        runner.charge(4 * M, by="amplitude_estimation")
        estimates.append(res.estimate)
    p_hat = float(np.median(estimates))
    flags: tuple[str, ...] = ()
    if p_hat >= 1.0:
        p_hat = 1 - 1 / (2 * R)
        flags = ("clamped",)
    ledger.notes["f0_stream_R"] = str(R)
    ledger.notes["f0_stream_M"] = str(M)
    return MomentEstimate(f0_from_probability(p_hat, R), 0, eps, 2 / 3, flags)


# -- F_2 and F_k ----------------------------------------------------------------------


class AMSSampler:
    """Random sign hash h, output (sum_i h(a_i))^2."""

    passes_per_use = 2
    queries_per_use = 0

    def __init__(self, stream: Stream, family: HashFamily | None = None):
        self.family = family if family is not None else make_sign_family(stream.m)
        fv = frequency_vector(stream)
        self.support = np.asarray(fv.support, dtype=np.int64)
        self.counts = np.asarray([fv.counts[v] for v in fv.support], dtype=np.int64)
        self.stream = stream

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        coeffs = self.family.sample_coefficients(rng, size)
        z = sign_values(self.family, coeffs, self.support) @ self.counts
        return (z * z).astype(float)

    def apply(self, coeffs, out: int, runner: PassRunner) -> int:
        """Coherent form: add f(h) into `out`, leaving the sum register at zero."""
        h = SignHashFunction(HashFunction(tuple(coeffs), self.family))
        reg = {"sum": 0}

        def add(a):
            reg["sum"] += h(a)

        def sub(a):
            reg["sum"] -= h(a)

        runner.replay(add)
        out += reg["sum"] ** 2
        runner.replay(sub)
        if reg["sum"] != 0:
            raise RegisterIntegrityError("sum register not restored after uncompute pass")
        return out


def f2_stream_pass_count(eps: float) -> int:
    return AMSSampler.passes_per_use * mean_estimation_charge(3, eps)


def approx_f2_stream(
    stream: Stream,
    eps: float,
    rng: np.random.Generator,
    *,
    ledger: ResourceLedger | None = None,
) -> MomentEstimate:
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if stream.n < 1:
        raise ValueError("stream must be non-empty")
    ledger = ledger if ledger is not None else ResourceLedger()
    sampler = AMSSampler(stream)
    space = StreamSpaceBudget(ledger)
    space.allocate("hash_index", sampler.family.index_width)
    space.allocate("sum", bits(2 * stream.n))
    space.allocate("output", bits(stream.n**2))
    space.allocate("mean_estimation", bits(math.ceil(3 / eps)))
    value = mean_estimate_rel_var(sampler, 3.0, eps, rng, ledger=ledger)
    return MomentEstimate(value, 2, eps, 2 / 3)


def suffix_counts(stream: Stream) -> np.ndarray:
    """N(i) = |{j >= i : a_j = a_i}|, counting i itself."""
    seen: Counter[int] = Counter()
    out = np.empty(stream.n, dtype=np.int64)
    for pos in range(stream.n - 1, -1, -1):
        a = stream.items[pos]
        seen[a] += 1
        out[pos] = seen[a]
    return out


class NkSampler:
    """Uniform i, output n (N(i)^k - (N(i) - 1)^k)."""

    passes_per_use = 2
    queries_per_use = 0

    def __init__(self, stream: Stream, k: int):
        self.n = stream.n
        self.k = k
        self.N = suffix_counts(stream)

    def values(self) -> list[int]:
        """Exact integer outputs for every i, for enumeration checks."""
        return [self.n * (int(c) ** self.k - (int(c) - 1) ** self.k) for c in self.N]

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        N = self.N[rng.integers(0, self.n, size=size)].astype(float)
        return self.n * (N**self.k - (N - 1) ** self.k)


def nk_relative_variance(k: int, m: int) -> float:
    return 1 + k * m ** (1 - 1 / k)


def fk_stream_pass_count(k: int, m: int, eps: float) -> int:
    return NkSampler.passes_per_use * mean_estimation_charge(nk_relative_variance(k, m), eps)


def approx_fk_stream(
    stream: Stream,
    k: int,
    eps: float,
    rng: np.random.Generator,
    *,
    ledger: ResourceLedger | None = None,
) -> MomentEstimate:
    if k <= 2:
        raise ValueError("use approx_f2_stream for k = 2; this estimator needs k > 2")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    ledger = ledger if ledger is not None else ResourceLedger()
    B = nk_relative_variance(k, stream.m)
    space = StreamSpaceBudget(ledger)
    space.allocate("index", bits(stream.n))
    space.allocate("count", bits(stream.n))
    space.allocate("output", bits(stream.n * stream.n**k))
    space.allocate("mean_estimation", bits(math.ceil(B / eps)))
    value = mean_estimate_rel_var(NkSampler(stream, k), B, eps, rng, ledger=ledger)
    return MomentEstimate(value, k, eps, 2 / 3)


# -- F_infinity -----------------------------------------------------------------------


def f_infty_pass_count(domain_size: int, restricted: bool, cost: CostModel = HONEST) -> int:
    return int(restricted) + 2 * min_finding_budget(domain_size, cost.budget_multiplier)


def f_infty_stream(
    stream: Stream,
    rng: np.random.Generator,
    *,
    ledger: ResourceLedger | None = None,
    cost: CostModel = HONEST,
) -> MomentEstimate:
    """Exact F_inf by maximum finding over the count oracle |j>|x> -> |j>|x + n_j>.

    When m > n the search domain is first restricted to the observed values
    (one classical pass), so the domain never exceeds n.
    """
    if stream.n == 0:
        raise ValueError("F_infinity is undefined for an empty stream")
    ledger = ledger if ledger is not None else ResourceLedger()
    runner = PassRunner(stream, ledger)
    counts = frequency_vector(stream).counts
    restricted = stream.m > stream.n
    if restricted:
        domain = sorted(counts)
        runner.charge(1, by="domain_restriction")
    else:
        domain = list(range(1, stream.m + 1))
    values = np.asarray([-counts.get(j, 0) for j in domain], dtype=float)
    inner = ResourceLedger()
    res = durr_hoyer_min(values, rng, budget_multiplier=cost.budget_multiplier, ledger=inner)
    runner.charge(2 * inner.oracle_queries, by="durr_hoyer")
    space = StreamSpaceBudget(ledger)
    space.allocate("index", bits(stream.m))
    space.allocate("count", bits(stream.n))
    space.allocate("threshold", bits(stream.n))
    space.allocate("schedule", bits(math.ceil(math.sqrt(len(domain)))))
    return MomentEstimate(float(-values[res.index - 1]), math.inf, 1.0, 2 / 3)


# -- classical baseline ---------------------------------------------------------------


def ams_f2_classical(
    stream: Stream,
    eps: float,
    rng: np.random.Generator,
    *,
    ledger: ResourceLedger | None = None,
    groups: int = 9,
) -> MomentEstimate:
    """Single pass: groups x ceil(16/eps^2) sign counters, median of group means."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    ledger = ledger if ledger is not None else ResourceLedger()
    per_group = math.ceil(16 / eps**2)
    sampler = AMSSampler(stream)
    z2 = sampler.draw(rng, groups * per_group).reshape(groups, per_group)
    ledger.charge_passes(1)
    ledger.charge_samples(groups * per_group)
    ledger.note_space(groups * per_group * (bits(2 * stream.n) + sampler.family.index_width))
    return MomentEstimate(float(np.median(z2.mean(axis=1))), 2, eps, 2 / 3)
