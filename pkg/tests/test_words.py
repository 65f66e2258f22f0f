import pytest

from chaconlab.errors import ConfigError
from chaconlab.rationals import rat
from chaconlab.words import (ParameterWord, balanced_digits,
                             balanced_reconstruct, balanced_weight,
                             cantor_measure_of_interval, q_addend,
                             sample_word)

W1 = ParameterWord(7)
W2 = ParameterWord(7, base=(2,), pattern=(2,))
W21 = ParameterWord(7, pattern=(2, 1))


def test_tower_heights_pinned():
    assert W1.tower_heights(4) == [1, 8, 57, 400, 2801]
    assert W2.tower_heights(2) == [1, 9, 65]
    assert W21.tower_heights(3) == [1, 9, 64, 450]


def test_alpha_exact_for_periodic_tails():
    assert W1.alpha_value().lo == W1.alpha_value().hi == rat(1, 6)
    assert W2.alpha_value().mid == rat(1, 3)
    assert W21.alpha_value().mid == rat(5, 16)


def test_alpha_partial_prefix_sums():
    assert W1.alpha_partial(-1) == 0
    assert W1.alpha_partial(1) == rat(8, 49)
    assert W21.alpha_partial(1) == rat(2, 7) + rat(1, 49)


def test_beta_moments():
    assert W1.beta(kappa=1).mid == rat(1, 6)
    assert W1.beta(kappa=2).mid == rat(1, 6)
    assert W2.beta(kappa=2).mid == rat(2, 3)
    # shifting a 2-periodic word by one swaps the digit roles
    assert W21.beta(k=1).mid == ParameterWord(7, pattern=(1, 2)).beta().mid


def test_digit_stream_and_shift():
    assert [W21.digit(j) for j in range(5)] == [2, 1, 2, 1, 2]
    s = W21.shift(3)
    assert [s.digit(j) for j in range(4)] == [W21.digit(3 + j)
                                              for j in range(4)]


def test_random_tail_deterministic():
    a = sample_word(7, 99)
    b = sample_word(7, 99)
    assert a.is_random
    assert [a.digit(j) for j in range(40)] == [b.digit(j)
                                               for j in range(40)]
    assert all(a.digit(j) in (1, 2) for j in range(40))
    assert sample_word(7, 100).digits(20) != a.digits(20)


def test_serialize_parse_roundtrip():
    for w in (W1, W2, W21, sample_word(7, 5), sample_word(7, 5).shift(3)):
        assert ParameterWord.parse(w.serialize()) == w
    assert ParameterWord.parse("periodic:21") == W21


def test_word_validation():
    with pytest.raises(ConfigError):
        ParameterWord(6)
    with pytest.raises(ConfigError):
        ParameterWord(7, pattern=(3,))
    with pytest.raises(ConfigError):
        ParameterWord(3)
    assert ParameterWord(3, allow_small=True).d == 3
    with pytest.raises(ConfigError):
        ParameterWord.parse("periodic:9")


def test_balanced_digits_roundtrip():
    for ell in range(1, 400):
        digs = balanced_digits(ell, 7)
        assert all(-3 <= a <= 3 for a in digs)
        assert digs[-1] > 0
        assert balanced_reconstruct(digs, 7) == ell
        assert balanced_weight(ell, 7) == sum(1 for a in digs if a)


def test_q_addend_is_nonnegative_step_count():
    for ell in (6, 8, 50, 342, 400):
        digs = balanced_digits(ell, 7)
        for j in range(len(digs)):
            q = q_addend(digs, 7, j)
            assert q >= 0
            assert q % 7 ** j == 0


def test_cantor_measure_of_first_digit_cylinder():
    # value interval of the w_0 = 1 cylinder is [1/6, 3/14]
    enc = cantor_measure_of_interval(rat(1, 6), rat(3, 14), 7)
    assert enc.lo == enc.hi == rat(1, 2)


def test_cantor_measure_full_range():
    enc = cantor_measure_of_interval(rat(1, 6), rat(1, 3), 7)
    assert enc.lo == enc.hi == rat(1)
    empty = cantor_measure_of_interval(rat(0), rat(1, 7), 7)
    assert empty.hi < rat(1, 100)
