import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qfreq.hashfam import (
    BinaryFieldSignFamily,
    HashConfigError,
    HashFunction,
    SignHashFunction,
    irreducible_poly,
    make_family,
    make_sign_family,
    sign_values,
    uniform_below,
)
from qfreq.bench.verify import family_table, tuple_uniformity


def joint_counts(fam, xs):
    """Brute force: output tuple of every member on inputs xs."""
    counts = {}
    for h in fam.members():
        key = tuple(h(x) for x in xs)
        counts[key] = counts.get(key, 0) + 1
    return counts


@pytest.mark.parametrize("p,t", [(3, 2), (5, 2), (5, 3), (7, 3), (11, 4)])
def test_exact_family_is_t_wise_uniform(p, t):
    assert tuple_uniformity(family_table(p, t), p, t)


def test_bruteforce_joint_distribution_p5_t2():
    fam = make_family(2, 5, p=5, exact=True)
    counts = joint_counts(fam, (1, 4))
    assert len(counts) == 25 and set(counts.values()) == {1}


def test_member_indexing_uses_base_p_digits():
    fam = make_family(2, 5, p=5, exact=True)
    h = fam.member(8)  # 7 = 2 + 1*5
    assert h.coefficients == (2, 1)
    assert [h(x) for x in range(5)] == [(2 + x) % 5 + 1 for x in range(5)]
    with pytest.raises(IndexError):
        fam.member(26)


def test_members_and_member_agree():
    fam = make_family(2, 3, p=3, exact=True)
    assert [h.coefficients for h in fam.members()] == [fam.member(j).coefficients for j in range(1, 10)]


def test_bias_budget_picks_large_prime():
    fam = make_family(3, 1000, 40)
    assert fam.p >= 40 * 2**20 and fam.bias <= 2**-20
    assert make_family(2, 7).exact


def test_rejects_bad_configs():
    with pytest.raises(HashConfigError):
        make_family(0, 5)
    with pytest.raises(HashConfigError):
        make_family(2, 10, p=7)
    with pytest.raises(HashConfigError):
        make_family(2, 10, p=12)


@given(st.integers(1, 4), st.integers(2, 10**6), st.data())
def test_record_roundtrip(t, m, data):
    fam = make_family(t, m, data.draw(st.integers(1, 1000)))
    h = fam.sample(np.random.default_rng(data.draw(st.integers(0, 2**32))))
    back = HashFunction.from_record(h.to_record(), m, fam.R)
    assert back == h


@given(st.integers(1, 2**200))
def test_uniform_below_range(bound):
    v = uniform_below(np.random.default_rng(bound % 991), bound)
    assert 0 <= v < bound


def test_field_values_match_scalar_eval():
    fam = make_family(4, 100, 17)
    rng = np.random.default_rng(1)
    coeffs = fam.sample_coefficients(rng, 5)
    xs = np.arange(1, 101)
    vals = fam.field_values(coeffs, xs)
    for row, c in zip(vals, coeffs):
        h = HashFunction(tuple(int(v) for v in c), fam)
        assert row.tolist() == [h.field_value(int(x)) for x in xs]


def test_sign_hash_moments_exact_p7():
    # parity of a uniform element of GF(7): Pr[+1] = 4/7, so E[s] = 1/7, E[s(x)s(y)] = 1/49
    fam = make_sign_family(7, min_prime=7)
    e1 = Fraction(0)
    e2 = Fraction(0)
    for h in fam.members():
        s = SignHashFunction(h)
        e1 += s(2)
        e2 += s(2) * s(5)
    assert e1 / fam.cardinality == Fraction(1, 7)
    assert e2 / fam.cardinality == Fraction(1, 49)
    # "bias" in the sense Pr[+1] - 1/2
    assert Fraction(1, 2) * (1 + e1 / fam.cardinality) - Fraction(1, 2) == Fraction(1, 14)


def test_sign_values_vectorised():
    fam = make_sign_family(20)
    coeffs = fam.sample_coefficients(np.random.default_rng(3), 4)
    sv = sign_values(fam, coeffs, np.arange(1, 21))
    for row, c in zip(sv, coeffs):
        s = SignHashFunction(HashFunction(tuple(int(v) for v in c), fam))
        assert row.tolist() == [s(x) for x in range(1, 21)]


def test_irreducible_polys():
    assert [irreducible_poly(r) for r in (1, 2, 3, 4, 8)] == [0b11, 0b111, 0b1011, 0b10011, 0b100011011]


@pytest.mark.parametrize("r", [2, 3])
def test_binary_sign_family_exactly_four_wise(r):
    fam = BinaryFieldSignFamily(m=1 << r, r=r)
    table = fam.sign_table()
    assert table.shape == (fam.cardinality, 1 << r)
    assert tuple_uniformity((table < 0).astype(np.int64), 2, min(4, 1 << r))
