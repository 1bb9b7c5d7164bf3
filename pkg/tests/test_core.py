import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qfreq.core import (
    EnumerationTooLarge,
    MomentEstimate,
    Stream,
    StreamError,
    StreamFormatError,
    canonical_streams,
    collision_count,
    collision_count_bruteforce,
    collision_moments_enumerate,
    exact_f_infty,
    exact_moment,
    is_injective_on_support,
    lemma1_mean,
    lemma1_variance_bound,
    parse_stream,
    read_stream,
    universe_reduce,
    write_stream,
)

streams = st.integers(1, 12).flatmap(
    lambda m: st.lists(st.integers(1, m), min_size=1, max_size=20).map(lambda xs: Stream(xs, m=m))
)


def test_stream_is_one_based():
    s = Stream([3, 1, 2], m=3)
    assert s[1] == 3 and s[3] == 2
    with pytest.raises(IndexError):
        s[0]


def test_stream_rejects_out_of_range():
    with pytest.raises(StreamError, match="item 2"):
        Stream([1, 5], m=4)


@pytest.mark.parametrize(
    "items,k,expected",
    [
        ([1, 1, 2], 0, 2),
        ([1, 1, 2], 1, 3),
        ([1, 1, 2], 2, 5),
        ([1, 1, 2], 3, 9),
        ([4, 4, 4, 4], 2, 16),
    ],
)
def test_exact_moment(items, k, expected):
    assert exact_moment(Stream(items), k) == expected


def test_f_infty():
    assert exact_f_infty(Stream([2, 1, 2, 3, 2])) == 3
    with pytest.raises(StreamError):
        exact_f_infty(Stream([], m=1))


def test_moment_estimate_validation():
    with pytest.raises(ValueError):
        MomentEstimate(-1.0, 2, 0.1, 0.6)
    assert MomentEstimate(11.0, 2, 0.1, 0.6).relative_error(10) == pytest.approx(0.1)


@given(streams, st.data())
def test_collision_count_matches_bruteforce(stream, data):
    sample = data.draw(st.lists(st.integers(1, stream.n), min_size=0, max_size=8))
    k = data.draw(st.integers(2, 4))
    assert collision_count(stream, sample, k) == collision_count_bruteforce(stream, sample, k)


def test_canonical_stream_counts_are_bell_numbers():
    # one stream per set partition of the positions
    assert [sum(1 for _ in canonical_streams(n)) for n in range(1, 7)] == [1, 2, 5, 15, 52, 203]


def test_lemma1_small_case_by_hand():
    # [1,1,2], ell=2: ordered pairs with equal values are (1,1),(2,2),(1,2),(2,1),(3,3)
    s = Stream([1, 1, 2])
    mean, second = collision_moments_enumerate(s, 2, 2)
    assert mean == Fraction(5, 9) == lemma1_mean(s, 2, 2)
    assert second == Fraction(5, 9)  # C is 0/1 for ell = k


@given(streams, st.integers(1, 3), st.integers(2, 3))
def test_lemma1_identity_property(stream, ell, k):
    if stream.n**ell > 20000:
        return
    mean, second = collision_moments_enumerate(stream, ell, k)
    assert mean == lemma1_mean(stream, ell, k)
    assert float(second - mean**2) <= lemma1_variance_bound(stream, ell, k) + 1e-9


def test_enumeration_limit():
    with pytest.raises(EnumerationTooLarge):
        collision_moments_enumerate(Stream(range(1, 31)), 6, 2)


def test_universe_reduce_refuses_small_target():
    s = Stream([1, 2, 3, 4])
    with pytest.raises(ValueError, match="refusing"):
        universe_reduce(s, 100 * 16 - 1, 0)


def test_universe_reduce_preserves_moments_when_injective():
    rng = np.random.default_rng(5)
    s = Stream(rng.integers(1, 50, size=30).tolist(), m=50)
    hits = 0
    for seed in range(40):
        r = universe_reduce(s, 100 * 30 * 30, seed)
        if is_injective_on_support(s, r):
            hits += 1
            for k in (0, 2, 3):
                assert exact_moment(r, k) == exact_moment(s, k)
    assert hits >= 38


@given(streams)
def test_stream_file_roundtrip(tmp_path_factory, stream):
    path = tmp_path_factory.mktemp("s") / "s.txt"
    write_stream(stream, path)
    assert read_stream(path) == stream


@pytest.mark.parametrize(
    "text,where",
    [
        ("", "line 1"),
        ("3\n1\n", "line 1"),
        ("2 4\n1\nx\n", "line 3"),
        ("2 4\n1\n9\n", "line 3"),
        ("3 4\n1\n2\n", "expected 3"),
    ],
)
def test_parse_errors_carry_location(text, where):
    with pytest.raises(StreamFormatError, match=where):
        parse_stream(text)
