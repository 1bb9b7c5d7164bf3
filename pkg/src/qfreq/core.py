"""Stream data model, exact frequency moments and collision statistics.

Everything here is exact: moments are Python integers and the sample
enumeration oracle works in rationals, so identities can be asserted with
zero tolerance.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

ENUMERATION_LIMIT = 10**7


class StreamError(ValueError):
    """Invalid stream contents."""


class StreamFormatError(StreamError):
    """A stream file violates the `n m` + one-value-per-line format."""


class EnumerationTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Stream:
    """A sequence a_1..a_n with every item in {1, ..., m}."""

    items: tuple[int, ...]
    m: int

    def __init__(self, items: Iterable[int], m: int | None = None):
        items = tuple(int(a) for a in items)
        if m is None:
            m = max(items, default=1)
        if m < 1:
            raise StreamError(f"universe size must be positive, got {m}")
        for pos, a in enumerate(items, start=1):
            if not 1 <= a <= m:
                raise StreamError(f"item {pos} = {a} outside [1, {m}]")
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "m", int(m))

    @property
    def n(self) -> int:
        return len(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i: int) -> int:
        """1-based access, matching the query oracle's indexing."""
        if not 1 <= i <= self.n:
            raise IndexError(f"index {i} outside [1, {self.n}]")
        return self.items[i - 1]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.items, dtype=np.int64)


@dataclass(frozen=True)
class FrequencyVector:
    counts: Mapping[int, int]

    @property
    def support(self) -> list[int]:
        return sorted(self.counts)

    def __len__(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    k: int | float
    epsilon: float
    confidence: float
    # diagnostic flags raised by the producing algorithm (e.g. a clamp)
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError(f"estimate must be non-negative, got {self.value}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    def relative_error(self, truth: float) -> float:
        if truth == 0:
            return 0.0 if self.value == 0 else math.inf
        return abs(self.value - truth) / truth


def frequency_vector(stream: Stream | Sequence[int]) -> FrequencyVector:
    items = stream.items if isinstance(stream, Stream) else stream
    return FrequencyVector(dict(Counter(items)))


def exact_moment(stream: Stream | Sequence[int], k: int) -> int:
    """F_k = sum_j n_j^k, with F_0 the number of distinct values."""
    if k < 0 or int(k) != k:
        raise ValueError(f"k must be a non-negative integer, got {k}")
    counts = frequency_vector(stream).counts.values()
    if k == 0:
        return len(counts)
    return sum(c**k for c in counts)


def exact_f_infty(stream: Stream | Sequence[int]) -> int:
    counts = frequency_vector(stream).counts
    if not counts:
        raise StreamError("F_infinity is undefined for an empty stream")
    return max(counts.values())


def _sampled_values(stream: Stream, sample: Sequence[int]) -> list[int]:
    return [stream[i] for i in sample]


def collision_count(stream: Stream, sample: Sequence[int], k: int) -> int:
    """Number of k-subsets of sample positions whose stream values agree.

    Uses sum_v binom(c_v, k) over the multiplicities c_v in the sample.
    """
    if k < 2:
        raise ValueError("collision order k must be at least 2")
    counts = Counter(_sampled_values(stream, sample))
    return sum(math.comb(c, k) for c in counts.values())


def collision_count_bruteforce(stream: Stream, sample: Sequence[int], k: int) -> int:
    """Same quantity by walking every k-subset of positions. Test scale only."""
    values = _sampled_values(stream, sample)
    return sum(
        1
        for subset in itertools.combinations(range(len(values)), k)
        if len({values[p] for p in subset}) == 1
    )


def sequence_collision_count(values: Sequence[int], k: int) -> int:
    """k-wise collision count of a bare sequence (no stream indirection)."""
    return sum(math.comb(c, k) for c in Counter(values).values())


def collision_moments_enumerate(
    stream: Stream, ell: int, k: int
) -> tuple[Fraction, Fraction]:
    """Exact E[C_k] and E[C_k^2] over all n^ell equiprobable sample tuples."""
    n = stream.n
    if ell < 1 or n < 1:
        raise ValueError(f"need ell >= 1 and a non-empty stream, got ell={ell}, n={n}")
    total = n**ell
    if total > ENUMERATION_LIMIT:
        raise EnumerationTooLarge(f"n^ell = {total} exceeds {ENUMERATION_LIMIT}")
    first = 0
    second = 0
    values = stream.items
    for tup in itertools.product(range(n), repeat=ell):
        c = sequence_collision_count([values[s] for s in tup], k)
        first += c
        second += c * c
    return Fraction(first, total), Fraction(second, total)


def lemma1_mean(stream: Stream, ell: int, k: int) -> Fraction:
    """binom(ell, k) F_k / n^k as an exact rational."""
    return Fraction(math.comb(ell, k) * exact_moment(stream, k), stream.n**k)


def lemma1_variance_bound(stream: Stream, ell: int, k: int) -> float:
    base = ell * exact_moment(stream, k) ** (1.0 / k) / stream.n
    return sum(base**q for q in range(k, 2 * k))


def canonical_streams(n: int) -> Iterable[Stream]:
    """One representative per equality pattern of length n (restricted growth strings).

    Every moment and collision statistic depends only on the pattern, so this
    covers all streams of length n up to relabelling.
    """

    def grow(prefix: list[int], top: int):
        if len(prefix) == n:
            yield Stream(prefix, m=n)
            return
        for v in range(1, top + 2):
            yield from grow(prefix + [v], max(top, v))

    if n == 0:
        yield Stream([], m=1)
        return
    yield from grow([1], 1)


def universe_reduce(
    stream: Stream,
    target_size: int,
    rng_seed: int | np.random.Generator | None = None,
    *,
    c: int = 100,
    family=None,
) -> Stream:
    """Hash every item into [target_size] with one pairwise-independent hash.

    target_size must be at least c * n^2; with the default c = 100 the birthday
    bound puts the chance of any collision on the support below 1/200.
    """
    n = stream.n
    if target_size < c * n * n:
        raise ValueError(
            f"target_size {target_size} below {c}*n^2 = {c * n * n}; refusing reduction"
        )
    if family is None:
        from .hashfam import make_family

        family = make_family(2, stream.m, target_size)
    rng = np.random.default_rng(rng_seed) if not isinstance(rng_seed, np.random.Generator) else rng_seed
    h = family.sample(rng)
    table = {v: h(v) for v in set(stream.items)}
    return Stream([table[a] for a in stream.items], m=target_size)


def is_injective_on_support(original: Stream, reduced: Stream) -> bool:
    """True when the reduction merged no two distinct values."""
    pairs = set(zip(original.items, reduced.items))
    return len({b for _, b in pairs}) == len({a for a, _ in pairs})


def write_stream(stream: Stream, path: str | Path) -> None:
    lines = [f"{stream.n} {stream.m}"] + [str(a) for a in stream.items]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_stream(path: str | Path) -> Stream:
    return parse_stream(Path(path).read_text(encoding="utf-8"))


def parse_stream(text: str) -> Stream:
    lines = text.splitlines()
    if not lines:
        raise StreamFormatError("line 1: missing header `n m`")
    header = lines[0].split()
    if len(header) != 2:
        raise StreamFormatError(f"line 1: expected `n m`, got {lines[0]!r}")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        raise StreamFormatError(f"line 1: non-integer header {lines[0]!r}") from None
    if n < 0 or m < 1:
        raise StreamFormatError(f"line 1: invalid header n={n}, m={m}")
    body = lines[1:]
    # tolerate one trailing blank line, nothing else
    while body and not body[-1].strip() and len(body) > n:
        body.pop()
    if len(body) != n:
        raise StreamFormatError(f"expected {n} item lines, found {len(body)}")
    items = []
    for lineno, raw in enumerate(body, start=2):
        try:
            a = int(raw.strip())
        except ValueError:
            raise StreamFormatError(f"line {lineno}: not an integer: {raw!r}") from None
        if not 1 <= a <= m:
            raise StreamFormatError(f"line {lineno}: value {a} outside [1, {m}]")
        items.append(a)
    return Stream(items, m=m)
