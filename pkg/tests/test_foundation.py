"""Foundation invariants: rationals, enclosures, interval unions,
balanced expansions, tower heights, and the spacer-value measure.

The per-module suites use these types everywhere; this file checks the
contracts directly, including the brute-force uniqueness oracle for the
balanced expansion and containment of member arithmetic in enclosure
arithmetic.
"""

import io
import random

import pytest

from chaconlab.intervals import IntervalSet
from chaconlab.rationals import (Enclosure, ilog, floor_log_rat, rat,
                                 rat_dec, rat_from_str, rat_str, rceil,
                                 rfloor)
from chaconlab.words import (ParameterWord, balanced_digits,
                             balanced_reconstruct, balanced_weight,
                             cantor_measure_of_interval, sample_word)

W1 = ParameterWord(7)
W2 = ParameterWord(7, base=(2,), pattern=(2,))
W21 = ParameterWord(7, pattern=(2, 1))


def test_rat_lowest_terms_positive_denominator():
    x = rat(6, 4)
    assert (x.numerator, x.denominator) == (3, 2)
    y = rat(3, -6)
    assert y.denominator > 0
    assert y == rat(-1, 2)
    assert rat(0, 5).denominator == 1
    assert rat(1, 3) + rat(1, 6) == rat(1, 2)
    assert rat(1, 3) * 3 == 1
    assert rat(1, 10) + rat(2, 10) == rat(3, 10)


def test_rat_serialization_roundtrip():
    for text in ("0", "-7", "3/4", "-22/7", "13841287201/6"):
        assert rat_str(rat_from_str(text)) == text
    assert rat_from_str(" 4/6 ") == rat(2, 3)
    assert rat_str(rat(10, 5)) == "2"
    with pytest.raises(ZeroDivisionError):
        rat_from_str("1/0")
    assert rat_dec(rat(1, 3), 5) == "0.33333"
    assert rat_dec(rat(-1, 2), 3) == "-0.500"
    assert rat_dec(rat(22, 7), 4) == "3.1428"


def test_floor_ceil_log_helpers():
    assert rfloor(rat(7, 2)) == 3 and rceil(rat(7, 2)) == 4
    assert rfloor(rat(-1, 2)) == -1 and rceil(rat(-1, 2)) == 0
    assert rfloor(rat(4)) == rceil(rat(4)) == 4
    assert ilog(48, 7) == 1 and ilog(49, 7) == 2
    assert floor_log_rat(rat(50), 7) == 2
    assert floor_log_rat(rat(1, 49), 7) == -2
    assert floor_log_rat(rat(1, 50), 7) == -3
    with pytest.raises(ValueError):
        ilog(0, 7)


def _random_rat(rng):
    return rat(rng.randint(-20, 20), rng.randint(1, 12))


def test_enclosure_arithmetic_contains_member_arithmetic():
    rng = random.Random(11)
    for _ in range(300):
        a_lo, a_hi = sorted((_random_rat(rng), _random_rat(rng)))
        b_lo, b_hi = sorted((_random_rat(rng), _random_rat(rng)))
        A = Enclosure(a_lo, a_hi)
        B = Enclosure(b_lo, b_hi)
        # member points, including endpoints
        for a in (a_lo, a_hi, A.mid):
            for b in (b_lo, b_hi, B.mid):
                assert (A + B).contains(a + b)
                assert (A - B).contains(a - b)
                assert (A * B).contains(a * b)
            s = b_lo if b_lo != 0 else rat(1)
            assert (A * s).contains(a * s)
            assert (A / s).contains(a / s)
            if A.lo > 0 or A.hi < 0:
                assert A.inv().contains(1 / a)


def test_enclosure_basics():
    e = Enclosure(rat(1, 3))
    assert e.exact and e.width == 0 and e.mid == rat(1, 3)
    assert e == rat(1, 3)
    f = Enclosure(rat(0), rat(1, 2))
    assert not f.exact
    assert f.contains(rat(1, 4)) and not f.contains(rat(2, 3))
    assert f.overlaps(Enclosure(rat(1, 2), rat(1)))
    assert f.entirely_below(rat(2, 3))
    assert f.entirely_at_least(rat(0))
    assert f.hull(e) == Enclosure(rat(0), rat(1, 2))
    with pytest.raises(ValueError):
        Enclosure(rat(1), rat(0))
    with pytest.raises(ZeroDivisionError):
        Enclosure(rat(-1), rat(1)).inv()
    assert Enclosure(rat(1, 4), rat(1, 2)).inv() == Enclosure(rat(2),
                                                              rat(4))


def test_interval_set_normalization():
    s = IntervalSet([(rat(1), rat(2)), (rat(0), rat(1))])
    assert s.pairs == ((rat(0), rat(2)),)
    t = IntervalSet([(rat(0), rat(3)), (rat(1), rat(2))])
    assert t.pairs == ((rat(0), rat(3)),)
    # degenerate pieces vanish
    assert not IntervalSet([(rat(1), rat(1))])
    u = IntervalSet([(rat(0), rat(1)), (rat(2), rat(3))])
    assert len(u) == 2 and u.length() == 2
    assert u == IntervalSet([(rat(2), rat(3)), (rat(0), rat(1))])


def _random_set(rng):
    pieces = []
    for _ in range(rng.randint(0, 4)):
        a = rat(rng.randint(0, 40), 8)
        b = a + rat(rng.randint(1, 10), 8)
        pieces.append((a, b))
    return IntervalSet(pieces)


def test_interval_set_inclusion_exclusion():
    rng = random.Random(5)
    for _ in range(200):
        A = _random_set(rng)
        B = _random_set(rng)
        # length is a measure: |A| + |B| = |A u B| + |A n B| exactly
        assert A.length() + B.length() == \
            A.union(B).length() + A.intersect(B).length()


def test_interval_set_point_and_bounds():
    s = IntervalSet([(rat(0), rat(1)), (rat(2), rat(5, 2))])
    assert s.contains_point(rat(0))
    assert not s.contains_point(rat(1))
    assert s.contains_point(rat(9, 4))
    assert s.min() == 0 and s.max() == rat(5, 2)
    moved = s.translate(rat(1, 2))
    assert moved.length() == s.length()
    assert moved.min() == rat(1, 2)
    assert s.intersect_interval(rat(1, 2), rat(9, 4)).length() == rat(3, 4)


def test_interval_set_csv_roundtrip():
    s = IntervalSet([(rat(-1, 3), rat(1, 7)), (rat(2), rat(22, 7))])
    buf = io.StringIO()
    s.write_csv(buf)
    buf.seek(0)
    assert IntervalSet.read_csv(buf) == s


def test_balanced_expansion_roundtrip_to_ten_thousand():
    for d in (7, 9):
        half = (d - 1) // 2
        for ell in range(10001):
            digits = balanced_digits(ell, d)
            assert balanced_reconstruct(digits, d) == ell
            assert all(-half <= a <= half for a in digits)
            if digits:
                assert digits[-1] > 0
            assert balanced_weight(ell, d) == sum(1 for a in digits if a)
    with pytest.raises(ValueError):
        balanced_digits(10, 6)


def _brute_representations(d, length):
    """value -> set of trailing-zero-stripped digit vectors."""
    half = (d - 1) // 2
    reps = {}
    vecs = [()]
    for _ in range(length):
        vecs = [v + (a,) for v in vecs for a in range(-half, half + 1)]
    for v in vecs:
        trimmed = list(v)
        while trimmed and trimmed[-1] == 0:
            trimmed.pop()
        value = balanced_reconstruct(trimmed, d)
        reps.setdefault(value, set()).add(tuple(trimmed))
    return reps


def test_balanced_expansion_unique_against_brute_force():
    reps7 = _brute_representations(7, 4)
    for ell in range(1001):
        assert reps7[ell] == {tuple(balanced_digits(ell, 7))}
    reps9 = _brute_representations(9, 3)
    for ell in range(301):
        assert reps9[ell] == {tuple(balanced_digits(ell, 9))}


def test_tower_height_closed_form_matches_recursion():
    words = (W1, W2, W21, sample_word(7, 5))
    for word in words:
        for k in range(13):
            closed = 7 ** k + sum(7 ** (k - 1 - i) * word.digit(i)
                                  for i in range(k))
            assert word.tower_height(k) == closed


def test_cantor_measure_enclosures_tighten_with_depth():
    lo, hi = rat(0), rat(3, 14)
    prev = cantor_measure_of_interval(lo, hi, 7, depth=2)
    assert prev.lo <= prev.hi
    for depth in range(3, 11):
        cur = cantor_measure_of_interval(lo, hi, 7, depth=depth)
        assert cur.lo >= prev.lo
        assert cur.hi <= prev.hi
        prev = cur
    # aligned value intervals resolve exactly at finite depth
    branch = cantor_measure_of_interval(rat(1, 6), rat(3, 14), 7, depth=4)
    assert branch.exact and branch.lo == rat(1, 2)
    full = cantor_measure_of_interval(rat(1, 6), rat(1, 3), 7, depth=3)
    assert full.exact and full.lo == 1
