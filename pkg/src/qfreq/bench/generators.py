"""Named stream generators, including the hard instances behind the lower bounds.

Each generator returns a Stream; generators whose construction pins the
moments also report them through `advertised_moment`, and the test-suite
checks every such claim against exact_moment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..core import Stream


class GeneratorError(ValueError):
    pass


def _need(params: dict, *names: str) -> list[int]:
    missing = [k for k in names if k not in params]
    if missing:
        raise GeneratorError(f"missing parameter(s): {', '.join(missing)}")
    return [int(params[k]) for k in names]


def uniform(params: dict, rng: np.random.Generator) -> Stream:
    n, m = _need(params, "n", "m")
    return Stream(rng.integers(1, m + 1, size=n).tolist(), m=m)


def zipf(params: dict, rng: np.random.Generator) -> Stream:
    """Values drawn with Pr[j] proportional to j^-s, j in [m]."""
    n, m = _need(params, "n", "m")
    s = float(params.get("s", 1.2))
    w = np.arange(1, m + 1, dtype=float) ** -s
    return Stream((rng.choice(m, size=n, p=w / w.sum()) + 1).tolist(), m=m)


def all_equal(params: dict, rng: np.random.Generator) -> Stream:
    (n,) = _need(params, "n")
    m = int(params.get("m", 1))
    return Stream([int(params.get("value", 1))] * n, m=m)


def all_distinct(params: dict, rng: np.random.Generator) -> Stream:
    (n,) = _need(params, "n")
    m = int(params.get("m", n))
    if m < n:
        raise GeneratorError("all_distinct needs m >= n")
    values = rng.permutation(m)[:n] + 1 if params.get("shuffle", 1) else np.arange(1, n + 1)
    return Stream(values.tolist(), m=m)


def exact_f0(params: dict, rng: np.random.Generator) -> Stream:
    """Exactly f0 distinct values (random labels), each present at least once."""
    n, f0 = _need(params, "n", "f0")
    m = int(params.get("m", n))
    if not 1 <= f0 <= min(n, m):
        raise GeneratorError("need 1 <= f0 <= min(n, m)")
    labels = rng.permutation(m)[:f0] + 1
    body = np.concatenate([labels, rng.choice(labels, size=n - f0)])
    return Stream(rng.permutation(body).tolist(), m=m)


def pairs(params: dict, rng: np.random.Generator) -> Stream:
    """n/2 values, each occurring exactly twice: F_k = n 2^(k-1)."""
    (n,) = _need(params, "n")
    if n % 2:
        raise GeneratorError("pairs needs even n")
    m = int(params.get("m", n // 2))
    labels = rng.permutation(m)[: n // 2] + 1
    return Stream(rng.permutation(np.repeat(labels, 2)).tolist(), m=m)


def beame_machmouchi(params: dict, rng: np.random.Generator) -> Stream:
    """Perfect pairing (variant 1) or pairing with two unmatched positions (variant 2).

    Both variants have length n, so variant 2 holds n/2 - 1 pairs and two
    singletons: F_k = n 2^(k-1) - 2^k + 2.
    """
    (n,) = _need(params, "n")
    variant = int(params.get("variant", 1))
    if n % 2 or n < 4:
        raise GeneratorError("beame_machmouchi needs even n >= 4")
    m = int(params.get("m", n // 2 + 1))
    if m < n // 2 + 1:
        raise GeneratorError("beame_machmouchi needs m >= n/2 + 1")
    if variant == 1:
        labels = rng.permutation(m)[: n // 2] + 1
        body = np.repeat(labels, 2)
    elif variant == 2:
        labels = rng.permutation(m)[: n // 2 + 1] + 1
        body = np.concatenate([np.repeat(labels[:-2], 2), labels[-2:]])
    else:
        raise GeneratorError("variant must be 1 or 2")
    return Stream(rng.permutation(body).tolist(), m=m)


def equality(params: dict, rng: np.random.Generator) -> Stream:
    """S_x then S_y for n/4-subsets of [n]; equal, or overlapping in exactly n/8.

    Equal: F_k = n 2^(k-2).  Unequal: F_k = n/4 + n 2^(k-3), F_0 = 3n/8.
    """
    (n,) = _need(params, "n")
    if n % 8:
        raise GeneratorError("equality instance needs n divisible by 8")
    equal = int(params.get("equal", 1))
    perm = rng.permutation(n) + 1
    sx = perm[: n // 4]
    if equal:
        sy = sx.copy()
    else:
        sy = np.concatenate([sx[: n // 8], perm[n // 4 : n // 4 + n // 8]])
    return Stream(np.concatenate([rng.permutation(sx), rng.permutation(sy)]).tolist(), m=n)


def disjointness(params: dict, rng: np.random.Generator) -> Stream:
    """S_a then S_b, disjoint (F_inf = 1) or sharing one element (F_inf = 2)."""
    (n,) = _need(params, "n")
    size = int(params.get("size", n // 4))
    if 2 * size > n or size < 1:
        raise GeneratorError("need 1 <= size <= n/2")
    perm = rng.permutation(n) + 1
    sa, sb = perm[:size], perm[size : 2 * size].copy()
    if int(params.get("intersect", 0)):
        sb[0] = sa[int(rng.integers(0, size))]
    return Stream(np.concatenate([sa, rng.permutation(sb)]).tolist(), m=n)


@dataclass(frozen=True)
class Generator:
    build: Callable[[dict, np.random.Generator], Stream]
    moment: Callable[[dict, float], int | None] | None = None


INF = float("inf")


def _moments(f0, finf, fk: Callable[[int], int | None]):
    """Build a moment function from F_0, F_inf and a rule for integer k >= 1."""

    def moment(p: dict, k: float) -> int | None:
        if k == 0:
            return None if f0 is None else f0(p)
        if k == INF:
            return None if finf is None else finf(p)
        return fk(p, int(k))

    return moment


def _n(p: dict) -> int:
    return int(p["n"])


def _bm_fk(p: dict, k: int) -> int:
    n = _n(p)
    if int(p.get("variant", 1)) == 1:
        return n * 2 ** (k - 1)
    return n * 2 ** (k - 1) - 2**k + 2


def _eq_fk(p: dict, k: int) -> int:
    n = _n(p)
    if int(p.get("equal", 1)):
        # n/4 values, each twice
        return n // 4 * 2**k
    # n/8 shared values twice, n/4 singletons
    return n // 8 * 2**k + n // 4


GENERATORS: dict[str, Generator] = {
    "uniform": Generator(uniform),
    "zipf": Generator(zipf),
    "all_equal": Generator(all_equal, _moments(lambda p: 1, _n, lambda p, k: _n(p) ** k)),
    "all_distinct": Generator(all_distinct, _moments(_n, lambda p: 1, lambda p, k: _n(p))),
    "exact_f0": Generator(exact_f0, _moments(lambda p: int(p["f0"]), None, lambda p, k: None)),
    "pairs": Generator(
        pairs, _moments(lambda p: _n(p) // 2, lambda p: 2, lambda p, k: _n(p) // 2 * 2**k)
    ),
    "beame_machmouchi": Generator(
        beame_machmouchi,
        _moments(lambda p: _n(p) // 2 + (int(p.get("variant", 1)) == 2), lambda p: 2, _bm_fk),
    ),
    "equality": Generator(
        equality,
        _moments(
            lambda p: _n(p) // 4 if int(p.get("equal", 1)) else 3 * _n(p) // 8,
            lambda p: 2,
            _eq_fk,
        ),
    ),
    "disjointness": Generator(
        disjointness,
        _moments(
            lambda p: 2 * int(p.get("size", _n(p) // 4)) - int(p.get("intersect", 0)),
            lambda p: 1 + int(p.get("intersect", 0)),
            lambda p, k: None,
        ),
    ),
}


def generate_instance(name: str, params: dict, seed: int) -> Stream:
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise GeneratorError(
            f"unknown generator {name!r}; choose from {', '.join(sorted(GENERATORS))}"
        ) from None
    return gen.build(dict(params), np.random.default_rng(seed))


def advertised_moment(name: str, params: dict, k: float) -> int | None:
    """The moment the construction forces, or None when it is left random."""
    gen = GENERATORS[name]
    return None if gen.moment is None else gen.moment(dict(params), k)
