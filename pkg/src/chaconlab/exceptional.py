"""Exceptional parameter sets and the decay of their measures.

Two families of parameter words are singled out for a given time n:
words for which n falls in the return window of some index ell with
very few nonzero balanced digits (near-rigidity times), and words for
which the index window of n meets a sparse arithmetic progression of
index blocks (indices whose return laws could drift apart).  A third
set collects words with an atypical density of long double-spacer
runs.  Membership is decided exactly per word; only the product-measure
sizes of the sets are estimated by Monte Carlo.
"""

from __future__ import annotations

import bisect
import itertools
import math

from .errors import BudgetError, ConfigError
from .rationals import Enclosure, floor_log_rat, ilog, rat, rceil, rfloor
from .words import balanced_weight, derive_seed, sample_word


def threshold_margin(d, c0):
    """Slack of (1 + c0)(d-1)^c0 / c0^c0 below 3/2 (negative = violated)."""
    c0 = float(c0)
    value = (1 + c0) * (d - 1) ** c0 / c0 ** c0
    return 1.5 - value


def choose_threshold(d, step_den=200):
    """Largest multiple of 1/step_den keeping the digit-count threshold
    inequality strict."""
    for i in range(step_den - 1, 0, -1):
        c0 = rat(i, step_den)
        if threshold_margin(d, c0) > 0:
            return c0
    raise ConfigError("no threshold multiple works for d=%d" % d)


class ExceptionalConfig:
    """Constants shared by the exceptional-set predicates.

    c0 bounds the digit-count condition and must keep
    (1+c0)(d-1)^c0/c0^c0 strictly below 3/2; k1 is the smallest run
    length with c0 > 2^(1-k1); c = 2d/(d-1) is the drift constant of
    the index-window radius (c+2)m.  The window exponents p_n, q_n
    grow logarithmically in m = floor(log_d n); qn_mode switches the
    q_n normalization between natural log (default) and base-d log.
    """

    __slots__ = ("d", "c0", "k1", "c", "margin", "qn_mode")

    def __init__(self, d=7, c0=None, qn_mode="natural"):
        self.d = int(d)
        self.c0 = rat(c0) if c0 is not None else choose_threshold(self.d)
        if self.c0 <= 0:
            raise ConfigError("c0 must be positive")
        self.margin = threshold_margin(self.d, self.c0)
        if self.margin <= 0:
            raise ConfigError("c0=%s violates the threshold inequality"
                              % self.c0)
        if qn_mode not in ("natural", "scaled"):
            raise ConfigError("qn_mode must be natural or scaled")
        self.qn_mode = qn_mode
        k1 = 1
        while rat(2, 2 ** k1) >= self.c0:
            k1 += 1
        self.k1 = k1
        self.c = rat(2 * self.d, self.d - 1)

    def exponents(self, n):
        """(m, p_n, q_n) for time n; requires q_n > p_n to be usable."""
        if n < self.d:
            raise ConfigError("need n >= d")
        d = self.d
        m = ilog(n, d)
        p = floor_log_rat(self.c * m, d) + 1
        log2d = math.log(2, d)
        if self.qn_mode == "natural":
            factor = (1 + log2d) / math.log(2)
        else:
            factor = (1 + log2d) / log2d
        q = 2 * math.floor(factor * math.log(m, d)) + 1
        if q <= p:
            raise ConfigError("q_n=%d <= p_n=%d at n=%d" % (q, p, n))
        return m, p, q

    def __repr__(self):
        return "ExceptionalConfig(d=%d, c0=%s, k1=%d)" % (
            self.d, self.c0, self.k1)


_CONFIGS = {}


def default_config(d):
    if d not in _CONFIGS:
        _CONFIGS[d] = ExceptionalConfig(d)
    return _CONFIGS[d]


# -- index window ---------------------------------------------------------------

def window_radius(d, m):
    """(c + 2) m with c = 2d/(d-1)."""
    return rat((4 * d - 2) * m, d - 1)


def in_window(word, k, n, ell, depth=60, scale=1):
    """Whether |ell d^k (1+alpha) - n| <= (c+2) m, decided exactly.

    Lazy parameter tails give an enclosure for the gap; the depth is
    doubled until the comparison is decided.
    """
    d = word.d
    rad = window_radius(d, ilog(n, d)) * scale
    for trial in range(3):
        gap = (word.alpha_value(depth) + 1) * (ell * d ** k) - n
        if gap.hi <= rad and gap.lo >= -rad:
            return True
        if gap.lo > rad or gap.hi < -rad:
            return False
        depth *= 2
    raise BudgetError("window membership undecided at depth %d" % depth)


def window_candidates(word, k, n, depth=60, scale=1):
    """Integer superset of the index window of n (outer enclosure)."""
    d = word.d
    rad = window_radius(d, ilog(n, d)) * scale
    denom = (word.alpha_value(depth) + 1) * d ** k
    lo = max(0, rceil((n - rad) / denom.hi))
    hi = rfloor((n + rad) / denom.lo)
    return range(lo, hi + 1)


# -- first exceptional set ------------------------------------------------------

def first_exceptional_witness(word, k, n, config=None, depth=60, scale=1):
    """An index ell proving membership, or None.

    The witness satisfies all three conditions exactly: ell lies in
    the index window of n, d^N <= ell < d^(N+1), and the nonzero
    balanced-digit count of ell is at most c0 N.
    """
    if n < word.d:
        raise ConfigError("need n >= d")
    config = config or default_config(word.d)
    d = word.d
    cands = window_candidates(word, k, n, depth, scale)
    if not cands:
        return None
    # digit counts are >= 1, so windows capped below d^(1/c0) are clean
    top = max(cands)
    if top >= 1 and config.c0 * (ilog(top, d) + 1) < 1:
        return None
    for ell in cands:
        if ell < 1:
            continue
        nn = ilog(ell, d)
        if balanced_weight(ell, d) <= config.c0 * nn:
            if in_window(word, k, n, ell, depth, scale):
                return ell
    return None


def in_first_exceptional(word, k, n, config=None, depth=60, scale=1):
    return first_exceptional_witness(word, k, n, config, depth, scale) \
        is not None


def vanish_bound(k, n, config=None, d=7):
    """Analytic ceiling (c+2) m (3/4)^m / d^k for the first-set measure."""
    config = config or default_config(d)
    m = ilog(n, config.d)
    return (config.c + 2) * m * rat(3 ** m, 4 ** m) / config.d ** k


# -- second exceptional set -----------------------------------------------------

def block_origin(d, m, p, q, top_digit_mode="high"):
    """Anchor index with balanced digits v, (-v)^(m-q-1), v^(q-p), (-v)^p.

    v = (d-1)/2, most significant first.  Mode "high" places the top
    digit at position m (the last balanced digit is then zero); mode
    "low" packs the same pattern one position down, for sensitivity
    checks.
    """
    if m - q - 1 < 0:
        raise ConfigError("pattern needs m - q - 1 >= 0")
    if top_digit_mode == "high":
        return ((d - 2) * d ** m + 2 * d ** (q + 1) - 2 * d ** (p + 1) + d) \
            // 2
    if top_digit_mode == "low":
        return ((d - 2) * d ** (m - 1) + 2 * d ** q - 2 * d ** p + 1) // 2
    raise ConfigError("top_digit_mode must be high or low")


def second_exceptional_witness(word, k, n, config=None, depth=60,
                               top_digit_mode="high"):
    """An index in both the block progression and the window, or None."""
    config = config or default_config(word.d)
    d = word.d
    m, p, q = config.exponents(n)
    origin = block_origin(d, m, p, q, top_digit_mode)
    period = d ** q
    width = d ** p
    for ell in window_candidates(word, k, n, depth):
        if (ell - origin) % period <= width:
            if in_window(word, k, n, ell, depth):
                return ell
    return None


def in_second_exceptional(word, k, n, config=None, depth=60,
                          top_digit_mode="high"):
    return second_exceptional_witness(word, k, n, config, depth,
                                      top_digit_mode) is not None


# -- double-run density set -----------------------------------------------------

def gamma_count(word, m, k1=None):
    """Number of j < m where digits j .. j+k1-1 are all 2."""
    if m < 1:
        raise ConfigError("need m >= 1")
    k1 = k1 if k1 is not None else default_config(word.d).k1
    count = 0
    for j in range(m):
        if all(word.digit(j + i) == 2 for i in range(k1)):
            count += 1
    return count


def in_Mm(word, m, k1=None):
    """Whether the double-run count reaches twice its mean 2^(-k1) m."""
    k1 = k1 if k1 is not None else default_config(word.d).k1
    return gamma_count(word, m, k1) * 2 ** k1 >= 2 * m


def exact_Mm_measure(m, k1):
    """Exact product-measure of the double-run set by enumeration.

    The count depends on the first m + k1 - 1 digits only, so the
    measure is a dyadic rational; feasible for m + k1 <= ~20.
    """
    span = m + k1 - 1
    hits = 0
    for digits in itertools.product((1, 2), repeat=span):
        count = 0
        for j in range(m):
            if all(digits[j + i] == 2 for i in range(k1)):
                count += 1
        if count * 2 ** k1 >= 2 * m:
            hits += 1
    return rat(hits, 2 ** span)


# -- Monte-Carlo measure table --------------------------------------------------

def _mc_stats(flags):
    n = len(flags)
    p = sum(flags) / n
    return p, math.sqrt(p * (1 - p) / n)


def measure_estimates(k, n_grid, sample_count, seed, config=None, d=7,
                      depth=60):
    """Rows (n, m, W-estimate, se, second-set estimate, se, run-set
    estimate, analytic W bound) over a shared fiber sample.

    Membership is exact per fiber; only the averages are statistical.
    Times whose window exponents are out of range report the second
    set as nan rather than failing the whole table.
    """
    if sample_count < 1:
        raise ConfigError("need at least one sample")
    config = config or default_config(d)
    fibers = [sample_word(d, derive_seed(seed, i))
              for i in range(sample_count)]
    rows = []
    for n in n_grid:
        m = ilog(n, d)
        w_flags = [in_first_exceptional(w, k, n, config, depth)
                   for w in fibers]
        try:
            config.exponents(n)
            chk_flags = [in_second_exceptional(w, k, n, config, depth)
                         for w in fibers]
            chk, chk_se = _mc_stats(chk_flags)
        except ConfigError:
            chk, chk_se = float("nan"), float("nan")
        m_flags = [in_Mm(w, m, config.k1) for w in fibers]
        w_hat, w_se = _mc_stats(w_flags)
        rows.append((n, m, w_hat, w_se, chk, chk_se,
                     _mc_stats(m_flags)[0],
                     float(vanish_bound(k, n, config))))
    return rows


def write_exceptional_csv(rows, fh):
    fh.write("n,m,H_W_hat,H_W_se,H_Wcheck_hat,H_Wcheck_se,H_Mm_hat,"
             "bound_W\n")
    for n, m, w, wse, c, cse, mm, bw in rows:
        fh.write("%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n"
                 % (n, m, w, wse, c, cse, mm, bw))


# -- block/Cantor counting diagnostic -------------------------------------------

def digit_set_intervals(d, m):
    """The 2^(m-1) maximal intervals of values whose first m digits are
    1 or 2, as exact (lo, hi) pairs sorted ascending."""
    out = []
    for prefix in itertools.product((1, 2), repeat=m - 1):
        base = rat(0)
        for j, a in enumerate(prefix):
            base += rat(a, d ** (j + 1))
        out.append((base + rat(1, d ** m), base + rat(3, d ** m)))
    out.sort()
    return out


def block_cantor_count(k, n, config=None, d=7, top_digit_mode="high"):
    """Count of scaled block members inside the fattened image of the
    digit-restricted value set, with the asymptotic ceiling.

    The ceiling 2^(-q_n) n^(log 2 / log d) holds only once the block
    period outgrows the fattened interval length, which desk-scale n
    has not reached; the count is reported alongside the ceiling as a
    diagnostic, not an assertion.
    """
    config = config or default_config(d)
    m, p, q = config.exponents(n)
    origin = block_origin(d, m, p, q, top_digit_mode)
    period = d ** q
    width = d ** p
    fat = rat((4 * d - 2) * m, d ** (k + 1))
    raw = []
    for lo, hi in digit_set_intervals(d, m):
        # the value map x -> 1/(d^k (x+1)) reverses orientation
        raw.append((rat(1) / (d ** k * (hi + 1)) - fat / n,
                    rat(1) / (d ** k * (lo + 1)) + fat / n))
    raw.sort()
    pieces = []
    for lo, hi in raw:
        if pieces and lo <= pieces[-1][1]:
            pieces[-1] = (pieces[-1][0], max(pieces[-1][1], hi))
        else:
            pieces.append((lo, hi))
    starts = [piece[0] for piece in pieces]
    j_max = rfloor(pieces[-1][1] * n)
    count = 0
    base = origin % period - period
    while base <= j_max:
        for s in range(width + 1):
            j = base + s
            if j < 0 or j > j_max:
                continue
            x = rat(j, n)
            idx = bisect.bisect_right(starts, x) - 1
            if idx >= 0 and x <= pieces[idx][1]:
                count += 1
        base += period
    bound = 2.0 ** (-q) * n ** (math.log(2) / math.log(d))
    return count, bound
