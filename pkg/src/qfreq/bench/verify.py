"""Exhaustive enumeration and property suites, runnable from the CLI.

Each check returns (name, passed, detail).  Nothing here samples: every
identity is decided by full enumeration, exactly or to a stated tolerance.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from ..core import (
    Stream,
    canonical_streams,
    collision_moments_enumerate,
    exact_f_infty,
    exact_moment,
    frequency_vector,
    lemma1_mean,
    lemma1_variance_bound,
)
from ..hashfam import BinaryFieldSignFamily, make_family
from ..qsim.amplitude import ae_distribution, ae_statevector_distribution, bernoulli_operator
from ..stream_algos import NkSampler
from .generators import advertised_moment, generate_instance

Check = tuple[str, bool, str]
VAR_TOL = 1e-9


def lemma1_suite(max_n: int = 5, max_ell: int = 4, ks=(2, 3)) -> Iterator[Check]:
    """Exact mean identity and variance bound over every equality pattern."""
    for n in range(1, max_n + 1):
        mean_ok = var_ok = True
        worst = -math.inf
        for stream in canonical_streams(n):
            for ell in range(1, max_ell + 1):
                for k in ks:
                    m1, m2 = collision_moments_enumerate(stream, ell, k)
                    mean_ok &= m1 == lemma1_mean(stream, ell, k)
                    gap = float(m2 - m1 * m1) - lemma1_variance_bound(stream, ell, k)
                    worst = max(worst, gap)
                    var_ok &= gap <= VAR_TOL
        yield f"lemma1 mean n={n}", mean_ok, "rational identity"
        yield f"lemma1 variance n={n}", var_ok, f"max(Var - bound) = {worst:.3g}"


def tuple_uniformity(values: np.ndarray, R: int, t: int) -> bool:
    """Every t distinct inputs take all R^t output tuples equally often."""
    members, width = values.shape
    if members % R**t:
        return False
    target = members // R**t
    for xs in itertools.combinations(range(width), t):
        code = np.zeros(members, dtype=np.int64)
        for x in xs:
            code = code * R + values[:, x]
        counts = np.bincount(code, minlength=R**t)
        if counts.min() != target or counts.max() != target:
            return False
    return True


def family_table(p: int, t: int) -> np.ndarray:
    """(p^t, p) field values of every member on every input 0..p-1."""
    fam = make_family(t, p, p=p, exact=True)
    j = np.arange(fam.cardinality, dtype=np.int64)
    coeffs = np.stack([(j // p**i) % p for i in range(t)], axis=1)
    return fam.field_values(coeffs, np.arange(p))


def hash_suite(primes=(2, 3, 5, 7, 11), max_t: int = 4) -> Iterator[Check]:
    for p in primes:
        for t in range(1, max_t + 1):
            table = family_table(p, t)
            ok = tuple_uniformity(table, p, min(t, p))
            yield f"hash exact {t}-wise p={p}", ok, f"{p**t} members"


def binary_sign_suite(rs=(2, 3)) -> Iterator[Check]:
    for r in rs:
        fam = BinaryFieldSignFamily(m=1 << r, r=r)
        bits = (fam.sign_table() < 0).astype(np.int64)
        yield f"binary sign 4-wise r={r}", tuple_uniformity(bits, 2, 4), f"{fam.cardinality} members"


def ae_suite(ps=(0.1, 0.3, 0.7), Ms=(16, 64), tol: float = 1e-9) -> Iterator[Check]:
    for p, M in itertools.product(ps, Ms):
        sv = ae_statevector_distribution(*bernoulli_operator(p), M)
        tv = 0.5 * float(np.abs(sv - ae_distribution(p, M)).sum())
        yield f"ae closed form p={p} M={M}", tv <= tol, f"TV = {tv:.2e}"


def ams_moments(stream: Stream) -> tuple[Fraction, Fraction]:
    """Exact E[f] and E[f^2] of the AMS sampler over the exact +-1 4-wise family."""
    fam = BinaryFieldSignFamily.for_domain(stream.m)
    fv = frequency_vector(stream)
    table = fam.sign_table()[:, [v - 1 for v in fv.support]]
    z = table @ np.asarray([fv.counts[v] for v in fv.support], dtype=np.int64)
    f = [int(v) ** 2 for v in z]
    return Fraction(sum(f), len(f)), Fraction(sum(v * v for v in f), len(f))


def nk_moments(stream: Stream, k: int) -> tuple[Fraction, Fraction]:
    vals = NkSampler(stream, k).values()
    return Fraction(sum(vals), len(vals)), Fraction(sum(v * v for v in vals), len(vals))


def estimator_suite(seed: int = 0, count: int = 12) -> Iterator[Check]:
    rng = np.random.default_rng(seed)
    streams = [Stream(rng.integers(1, 9, size=int(rng.integers(1, 17))).tolist(), m=8) for _ in range(count)]
    ams_ok = True
    for s in streams:
        e1, e2 = ams_moments(s)
        F2 = exact_moment(s, 2)
        ams_ok &= e1 == F2 and float(e2 - e1 * e1) <= 2 * F2**2 + VAR_TOL
    yield "ams enumeration mean = F2, Var <= 2 F2^2", ams_ok, f"{count} streams, m=8"
    nk_ok = True
    streams = [Stream(rng.integers(1, 33, size=int(rng.integers(1, 33))).tolist(), m=32) for _ in range(count)]
    for s, k in itertools.product(streams, (3, 4)):
        e1, e2 = nk_moments(s, k)
        Fk = exact_moment(s, k)
        bound = k * s.m ** (1 - 1 / k) * Fk**2
        nk_ok &= e1 == Fk and float(e2 - e1 * e1) <= bound + VAR_TOL
    yield "N_k enumeration mean = F_k, variance bound", nk_ok, f"{count} streams, k=3,4"


def generator_suite(seed: int = 0) -> Iterator[Check]:
    cases = {
        "all_equal": {"n": 9},
        "all_distinct": {"n": 12},
        "exact_f0": {"n": 40, "f0": 13},
        "pairs": {"n": 12},
        "beame_machmouchi": {"n": 12, "variant": 2},
        "equality": {"n": 32, "equal": 0},
        "disjointness": {"n": 32, "intersect": 1},
    }
    for name, params in cases.items():
        stream = generate_instance(name, params, seed)
        ok = True
        for k in (0, 1, 2, 3, 4, math.inf):
            claim = advertised_moment(name, params, k)
            if claim is not None:
                truth = exact_f_infty(stream) if k == math.inf else exact_moment(stream, int(k))
                ok &= claim == truth
        yield f"generator {name}", ok, "advertised moments"


SUITES: dict[str, Callable[[], Iterator[Check]]] = {
    "lemma1": lemma1_suite,
    "hash": lambda: itertools.chain(hash_suite(), binary_sign_suite()),
    "ae": ae_suite,
    "estimators": estimator_suite,
    "generators": generator_suite,
}


def run_suite(name: str) -> list[Check]:
    if name == "all":
        return [c for suite in SUITES.values() for c in suite()]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from all, {', '.join(SUITES)}")
    return list(SUITES[name]())
