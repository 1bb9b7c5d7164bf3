"""t-wise independent hash families.

Members are polynomials of degree t-1 over GF(p), evaluated at the input and
reduced mod R.  Indexing a family member by j in [p^t] uses the base-p digits
of j-1 as coefficients, which gives an explicit (j, x) -> h_j(x) map.

Two sign-hash constructions are provided: the default takes the parity of a
degree-3 polynomial over an odd prime field (Pr[+1] = 1/2 + 1/(2p)); the exact
one evaluates over GF(2^r) and keeps the low bit, which is exactly 4-wise
independent and is used by the enumeration checks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sympy import isprime, nextprime

DEFAULT_BIAS_BUDGET = 2.0**-20
PRIME_CAP = 2**127


class HashConfigError(ValueError):
    pass


def uniform_below(rng: np.random.Generator, bound: int) -> int:
    """Uniform integer in [0, bound), reproducible for bounds beyond 64 bits."""
    if bound <= 2**62:
        return int(rng.integers(0, bound))
    nbytes = (bound.bit_length() + 7) // 8
    while True:
        v = int.from_bytes(rng.bytes(nbytes), "little") >> (8 * nbytes - bound.bit_length())
        if v < bound:
            return v


@lru_cache(maxsize=None)
def _prime_at_least(x: int) -> int:
    x = max(2, int(x))
    p = x if isprime(x) else int(nextprime(x))
    if p >= PRIME_CAP:
        raise HashConfigError(f"no prime below the 128-bit cap for lower bound {x}")
    return p


@dataclass(frozen=True)
class HashFamily:
    t: int
    m: int
    R: int
    p: int

    @property
    def cardinality(self) -> int:
        return self.p**self.t

    @property
    def exact(self) -> bool:
        return self.R == self.p

    @property
    def bias(self) -> float:
        """Upper bound on the deviation of any output probability from 1/R, times R."""
        return 0.0 if self.p % self.R == 0 else self.R / self.p

    @property
    def index_width(self) -> int:
        """Bits needed to hold one member's coefficients."""
        return self.t * max(1, math.ceil(math.log2(self.p)))

    def member(self, j: int) -> "HashFunction":
        if not 1 <= j <= self.cardinality:
            raise IndexError(f"member index {j} outside [1, {self.cardinality}]")
        rest = j - 1
        coeffs = []
        for _ in range(self.t):
            rest, c = divmod(rest, self.p)
            coeffs.append(c)
        return HashFunction(tuple(coeffs), self)

    def members(self):
        for coeffs in itertools.product(range(self.p), repeat=self.t):
            yield HashFunction(tuple(reversed(coeffs)), self)

    def sample(self, rng: np.random.Generator) -> "HashFunction":
        return HashFunction(tuple(uniform_below(rng, self.p) for _ in range(self.t)), self)

    def sample_coefficients(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """(size, t) int64 coefficient matrix; needs p below 2^62."""
        if self.p > 2**62:
            raise HashConfigError("vectorised sampling needs p < 2^62")
        return rng.integers(0, self.p, size=(size, self.t), dtype=np.int64)

    def field_values(self, coeffs: np.ndarray, xs: np.ndarray) -> np.ndarray:
        """Raw polynomial values mod p for every (member row, x) pair.

        Horner in int64; requires p * max(x) < 2^63.
        """
        xs = np.asarray(xs, dtype=np.int64) % self.p
        if self.p * (int(xs.max(initial=0)) + 1) >= 2**63:
            raise HashConfigError("field too large for vectorised evaluation")
        coeffs = np.asarray(coeffs, dtype=np.int64)
        acc = np.broadcast_to(coeffs[:, -1:], (coeffs.shape[0], xs.size)).copy()
        for i in range(self.t - 2, -1, -1):
            acc = (acc * xs[None, :] + coeffs[:, i : i + 1]) % self.p
        return acc


def make_family(
    t: int,
    m: int,
    R: int | None = None,
    *,
    bias_budget: float = DEFAULT_BIAS_BUDGET,
    exact: bool = False,
    p: int | None = None,
) -> HashFamily:
    """Build the degree-(t-1) polynomial family [m] -> [R].

    exact=True (or R=None) picks the smallest prime p >= m and sets R = p, so
    outputs are exactly t-wise independent.  Otherwise p is the smallest prime
    with R/p <= bias_budget.  An explicit p overrides the selection.
    """
    if t < 1:
        raise HashConfigError("independence t must be at least 1")
    if m < 1:
        raise HashConfigError("domain size must be positive")
    if p is not None:
        if not isprime(p) or p < m:
            raise HashConfigError(f"p={p} must be a prime >= m={m}")
        R = p if (exact or R is None) else R
    elif exact or R is None:
        p = _prime_at_least(m)
        R = p
    else:
        p = _prime_at_least(max(m, math.ceil(R / bias_budget)))
    if not 1 <= R <= p:
        raise HashConfigError(f"range {R} must lie in [1, p={p}]")
    return HashFamily(t=t, m=m, R=R, p=p)


@dataclass(frozen=True)
class HashFunction:
    coefficients: tuple[int, ...]
    family: HashFamily

    def __post_init__(self):
        if len(self.coefficients) != self.family.t:
            raise HashConfigError(
                f"expected {self.family.t} coefficients, got {len(self.coefficients)}"
            )

    def field_value(self, x: int) -> int:
        p = self.family.p
        acc = 0
        for c in reversed(self.coefficients):
            acc = (acc * x + c) % p
        return acc

    def __call__(self, x: int) -> int:
        return self.field_value(x) % self.family.R + 1

    eval = __call__

    def to_record(self) -> str:
        return " ".join(str(v) for v in (self.family.p, self.family.t, *self.coefficients))

    @classmethod
    def from_record(cls, record: str, m: int, R: int | None = None) -> "HashFunction":
        fields = [int(v) for v in record.split()]
        p, t, coeffs = fields[0], fields[1], tuple(fields[2:])
        fam = make_family(t, m, R, p=p)
        return cls(coeffs, fam)


def eval(h: HashFunction, x: int) -> int:  # noqa: A001 - mirrors the operation name
    return h(x)


@dataclass(frozen=True)
class SignHashFunction:
    """h(x) = +1 if the underlying field value is even, else -1."""

    base: HashFunction

    def __call__(self, x: int) -> int:
        return 1 if self.base.field_value(x) % 2 == 0 else -1


def sign_eval(h: SignHashFunction, x: int) -> int:
    return h(x)


def make_sign_family(m: int, *, min_prime: int = 2**20, p: int | None = None) -> HashFamily:
    """4-wise family whose parity drives the sign hash; p >= max(m, min_prime)."""
    if p is None:
        p = _prime_at_least(max(m, min_prime))
    if p == 2:
        raise HashConfigError("sign hash needs an odd prime")
    return make_family(4, m, p=p, exact=True)


def sign_values(family: HashFamily, coeffs: np.ndarray, xs: np.ndarray) -> np.ndarray:
    return 1 - 2 * (family.field_values(coeffs, xs) & 1)


# -- exact +-1 family over GF(2^r) -------------------------------------------


def _gf2_mul(a: int, b: int, modulus: int, r: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> r:
            a ^= modulus
    return out


@lru_cache(maxsize=None)
def irreducible_poly(r: int) -> int:
    """Lowest irreducible polynomial of degree r over GF(2), as a bit mask."""
    for cand in range(1 << r, 1 << (r + 1)):
        if not cand & 1:
            continue
        # a reducible degree-r polynomial has a factor of degree <= r/2
        if all(_gf2_poly_rem(cand, d) for d in range(2, 1 << (r // 2 + 1))):
            return cand
    raise HashConfigError(f"no irreducible polynomial of degree {r}")


def _gf2_poly_rem(a: int, b: int) -> int:
    db = b.bit_length() - 1
    while a and a.bit_length() - 1 >= db:
        a ^= b << (a.bit_length() - 1 - db)
    return a


@dataclass(frozen=True)
class BinaryFieldSignFamily:
    """All degree-3 polynomials over GF(2^r); sign is the low bit of h(x-1).

    Every field element is equally likely at each point, so the low bit is an
    exactly uniform +-1 and any 4 distinct points are jointly independent.
    """

    m: int
    r: int

    @classmethod
    def for_domain(cls, m: int) -> "BinaryFieldSignFamily":
        return cls(m=m, r=max(1, math.ceil(math.log2(m))))

    @property
    def cardinality(self) -> int:
        return 1 << (4 * self.r)

    def sign(self, coeffs: tuple[int, ...], x: int) -> int:
        mod = irreducible_poly(self.r)
        z = x - 1
        acc = 0
        for c in reversed(coeffs):
            acc = _gf2_mul(acc, z, mod, self.r) ^ c
        return 1 if acc & 1 == 0 else -1

    def members(self):
        size = 1 << self.r
        return itertools.product(range(size), repeat=4)

    def sign_table(self) -> np.ndarray:
        """(cardinality, m) array of signs for every member and input."""
        rows = [[self.sign(c, x) for x in range(1, self.m + 1)] for c in self.members()]
        return np.asarray(rows, dtype=np.int64)
