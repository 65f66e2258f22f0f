import math

import pytest
from hypothesis import given, settings, strategies as st

from chaconlab import returns
from chaconlab.rationals import Enclosure, rat
from chaconlab.words import ParameterWord, balanced_weight, sample_word

W1 = ParameterWord(7)
W2 = ParameterWord(7, base=(2,), pattern=(2,))
W12 = ParameterWord(7, base=(1, 2, 1), pattern=(2, 1))
WORDS = [W1, W2, W12]


def test_epsilon_distribution_pinned():
    law = returns.epsilon_distribution(W1, 0)
    assert law[0] == rat(5, 6)
    assert law[1] == rat(1, 6)
    assert law[2] == rat(0)


def test_epsilon_distribution_all_twos():
    law = returns.epsilon_distribution(W2, 0)
    assert law[0] == rat(5, 6)
    assert law[1] == rat(0)
    assert law[2] == rat(1, 6)


def test_epsilon_distribution_sums_to_one():
    for w in WORDS:
        for m in range(4):
            law = returns.epsilon_distribution(w, m)
            total = law[0] + law[1] + law[2]
            assert total == rat(1)


def test_epsilon_distribution_random_encloses_one():
    law = returns.epsilon_distribution(sample_word(7, 5), 0)
    total = law[0] + law[1] + law[2]
    assert total.lo <= 1 <= total.hi
    assert total.width < rat(1, 10**40)


def test_distribution_ell_one_pinned():
    dist = returns.distribution(W1, 0, 1)
    assert dist.mass_at(1) == rat(5, 6)
    assert dist.mass_at(2) == rat(1, 6)
    assert dist.truncation_mass == 0


def test_distribution_ell_seven_pinned():
    dist = returns.distribution(W1, 0, 7)
    assert dist.mass_at(8) == rat(5, 6)
    assert dist.mass_at(9) == rat(1, 6)
    assert dist.truncation_mass == 0


def test_distribution_support_floor():
    for w in WORDS:
        for k in (0, 1, 2):
            ctx = returns.ReturnContext(w, k)
            for ell in (1, 2, 7, 13, 50):
                dist = ctx.distribution(ell)
                assert min(dist.support) >= ell * ctx.h


def test_kac_mean_exact():
    # mean of t'_ell equals ell d^k (1 + alpha) with no error term
    for w in WORDS:
        for k in (0, 1):
            ctx = returns.ReturnContext(w, k)
            for ell in range(1, 201):
                dist = ctx.distribution(ell)
                assert dist.mean() == ctx.kac_mean(ell)
                assert dist.truncation_mass == 0


def test_recursion_matches_cylinder_oracle():
    for w in WORDS:
        for k in (0, 1):
            ctx = returns.ReturnContext(w, k)
            for ell in (1, 2, 3, 6, 7, 8, 13, 24, 25, 49, 50):
                rd = ctx.distribution(ell)
                bf = returns.brute_force_distribution(w, k, ell)
                tol = bf.truncation_mass
                for n in set(rd.support) | set(bf.support):
                    gap = abs(rd.mass_at(n).lo - bf.mass_at(n).lo)
                    assert gap <= tol, (w.serialize(), k, ell, n)


def test_oracle_brackets_random_word_enclosures():
    w = sample_word(7, 12345)
    ctx = returns.ReturnContext(w, 0)
    for ell in (1, 2, 7, 13):
        rd = ctx.distribution(ell)
        bf = returns.brute_force_distribution(w, 0, ell)
        trunc = bf.truncation_mass
        for n in set(rd.support) | set(bf.support):
            o = bf.mass_at(n).lo
            r = rd.mass_at(n)
            assert r.lo - trunc <= o <= r.hi


def test_localization_pinned_example():
    loc = returns.localization(W1, 0, 100)
    assert loc.m == 2
    assert loc.center == rat(600, 7)
    assert loc.radius == rat(52, 7)


def test_localization_contains_support():
    # the window claim holds once n >= d^2; at m = 0 the radius is zero
    # and at m = 1 heavy words still overshoot (ell=9 hits n=17 under
    # the all-2s word while the window stops at 16)
    for w in (W1, W2):
        for k in (0, 1):
            ctx = returns.ReturnContext(w, k)
            for ell in range(1, 300):
                for n in ctx.distribution(ell).support:
                    if n < w.d ** 2:
                        continue
                    assert returns.localization(w, k, n).membership(ell), \
                        (w.serialize(), k, ell, n)


def test_localization_miss_below_window_scale():
    # the documented m=1 overshoot for the heaviest word
    loc = returns.localization(W2, 0, 17)
    assert loc.membership(9) is False
    assert returns.ReturnContext(W2, 0).distribution(9).mass_at(17).hi > 0


def test_ell_range_complete():
    for w in (W1, W2):
        for k in (0, 1):
            ctx = returns.ReturnContext(w, k)
            for ell in range(1, 150):
                for n in ctx.distribution(ell).support:
                    assert ell in returns.ell_range(w, k, n)


def test_ell_range_zero():
    assert returns.ell_range(W1, 0, 0) == [0]


def test_summand_variance_floor():
    floor = returns.min_var_constant(7)
    assert floor == rat(5, 36)
    for w in WORDS + [sample_word(7, 9)]:
        for i in range(9):
            assert returns.summand_variance(w, 0, i).lo >= floor


def test_variance_floor_battery():
    for w in WORDS:
        for k in (0, 1):
            ctx = returns.ReturnContext(w, k)
            for ell in range(1, 501):
                holds, _, _ = returns.variance_floor_holds(w, k, ell, ctx=ctx)
                assert holds, (w.serialize(), k, ell)


def test_pairwise_covariance_bound():
    for w in (W1, W2):
        for i in range(1, 6):
            for j in range(i):
                cov = returns.pairwise_covariance(w, 0, i, j, depth=20)
                bound = returns.covariance_bound(w, 0, i, j)
                assert max(abs(cov.lo), abs(cov.hi)) <= bound


def test_variance_ratio_envelope():
    # fitted constant: C = 1.0 covers every window m <= 4 we check here
    C = 1.0
    for n in (343, 2401):
        m, pairs = returns.variance_ratio_report(W1, 0, n)
        env = C * math.log(m) / math.sqrt(m)
        for (a, b), ratio in pairs.items():
            dev = max(abs(float(ratio.lo) - 1), abs(float(ratio.hi) - 1))
            assert dev <= env, (n, a, b, dev, env)


def test_distribution_cache_shared_across_ells():
    ctx = returns.ReturnContext(W1, 0)
    ctx.distribution(350)
    memo_after_first = len(ctx._memo)
    ctx.distribution(50)
    # 50 = 350 / 7 is already a child in the memo
    assert len(ctx._memo) == memo_after_first


def test_repunit():
    assert returns.repunit(7, 1) == 1
    assert returns.repunit(7, 3) == 57
    assert balanced_weight(returns.repunit(7, 5), 7) == 5


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=3000), st.integers(min_value=0, max_value=2))
def test_distribution_is_probability(ell, k):
    dist = returns.ReturnContext(W1, k).distribution(ell)
    assert dist.total() == rat(1)
    assert all(p.lo >= 0 for p in dist.support.values())


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=7, max_value=10**6))
def test_localization_membership_decided_for_periodic(n):
    loc = returns.localization(W1, 0, n)
    for ell in returns.ell_range(W1, 0, n):
        assert loc.membership(ell) is not None


def test_support_cap_raises():
    ctx = returns.ReturnContext(W1, 0, support_cap=2)
    with pytest.raises(Exception):
        ctx.distribution(123456)
