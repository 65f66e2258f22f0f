import pytest

from chaconlab.errors import DomainError
from chaconlab.rationals import rat
from chaconlab.symbolic import (epsilon, first_return_map, from_odometer,
                                odometer_add, point_digit,
                                return_time_by_orbit,
                                return_time_by_recursion,
                                return_time_by_scan,
                                return_time_closed_form,
                                return_time_sequence, scan_reads,
                                shift_point, to_odometer)
from chaconlab.words import ParameterWord, sample_word

W1 = ParameterWord(7)
W21 = ParameterWord(7, pattern=(2, 1))


def test_point_digit_and_shift():
    y = rat(5, 7) + rat(3, 49)
    assert point_digit(y, 7) == 5
    assert shift_point(y, 7) == rat(3, 7)
    assert shift_point(y, 7, 2) == 0


def test_odometer_add_carries():
    assert odometer_add(rat(0), 1, 7) == rat(1, 7)
    assert odometer_add(rat(6, 7), 1, 7) == rat(1, 49)
    # adding d increments the second digit
    assert odometer_add(rat(3, 7), 7, 7) == rat(3, 7) + rat(1, 49)
    # a long carry chain lands past the block of 6s
    y = rat(6, 7) + rat(6, 49) + rat(6, 343)
    assert odometer_add(y, 1, 7) == rat(1, 7 ** 4)


def test_odometer_add_is_additive():
    y = rat(11, 49)
    a = odometer_add(odometer_add(y, 5, 7), 9, 7)
    assert a == odometer_add(y, 14, 7)


def test_odometer_coordinates_roundtrip():
    x = rat(3, 343)
    y = to_odometer(x, W1, 2)
    assert y == rat(3, 7)
    assert from_odometer(y, W1, 2) == x
    with pytest.raises(DomainError):
        to_odometer(rat(2, 7), W1, 1)


def test_epsilon_reads_first_active_digit():
    # first digit d-2 pays the current spacer digit
    assert epsilon(rat(5, 7), W1, 0) == 1
    assert epsilon(rat(5, 7), W21, 0) == 2
    assert epsilon(rat(5, 7), W21, 1) == 1
    # first digit d-1 defers the read one level deeper
    assert epsilon(rat(6, 7) + rat(5, 49), W21, 0) == 1
    # a non-critical digit pays nothing
    assert epsilon(rat(3, 7), W21, 0) == 0
    assert epsilon(rat(6, 7), W21, 0) == 0


def test_induced_map_is_odometer():
    for word in (W1, W21, sample_word(7, 17)):
        for k in (0, 1, 2):
            for i in range(1, 30):
                x = rat(i, 7 ** (k + 3))
                y = to_odometer(x, word, k)
                lhs = to_odometer(first_return_map(x, word, k), word, k)
                assert lhs == odometer_add(y, 1, 7)


def test_return_time_routes_agree():
    for word in (W1, W21):
        for k in (0, 1):
            for i in (0, 1, 5, 11):
                x = rat(i, 7 ** (k + 2))
                y = to_odometer(x, word, k)
                for ell in range(1, 13):
                    a = return_time_by_orbit(x, word, k, ell)
                    b = return_time_by_scan(y, word, k, ell)
                    c = return_time_by_recursion(y, word, k, ell)
                    f = return_time_closed_form(y, word, k, ell)
                    assert a == b == c == f


def test_return_time_pinned_values():
    # sweeping the first digit from the origin pays one spacer at the
    # d-2 slot, so a full block of 7 returns costs 8 steps
    assert return_time_by_orbit(rat(0), W1, 0, 1) == 1
    assert return_time_by_orbit(rat(0), W1, 0, 6) == 7
    assert return_time_by_orbit(rat(0), W1, 0, 7) == 8
    assert return_time_by_orbit(rat(0), W1, 0, 8) == 9
    assert return_time_by_scan(rat(5, 7), W1, 0, 1) == 2


def test_return_time_sequence_accumulates():
    word = W21
    x = rat(1, 49)
    seq = return_time_sequence(x, word, 0, 10)
    y = to_odometer(x, word, 0)
    total = 0
    for ell, step in enumerate(seq, start=1):
        total += step
        assert total == return_time_by_scan(y, word, 0, ell)


def test_scan_reads_layout():
    # index 8 = 1 + 1*7: one unit read at level 0, one at level 1 whose
    # completed block contributes drift 1
    assert scan_reads(8, W1, 0) == [(0, 1, 7, 0), (1, 1, 0, 1)]
    reads6 = scan_reads(6, W1, 0)
    # balanced digits of 6 are (-1, 1): a negative unit at level 0
    assert len(reads6) == 2
    assert any(sign < 0 for _, sign, _, _ in reads6)


def test_closed_form_handles_negative_digits():
    # ell = 6 exercises the subtractive window
    for word in (W1, W21):
        for i in (0, 2, 9):
            y = rat(i, 343)
            want = return_time_by_scan(y, word, 0, 6)
            assert return_time_closed_form(y, word, 0, 6) == want
