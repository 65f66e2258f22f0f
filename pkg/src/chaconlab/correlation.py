"""Self-correlations of the base column by two independent routes.

The quantity is lambda_alpha(A_k intersect T^-n A_k), the normalized
measure overlap of the column base with its n-step preimage.  Route
one pushes intervals forward through the map and measures the overlap
directly; route two sums the return-time laws over the complete index
window for n.  The two computations share no code below the parameter
word, so their agreement is a strong end-to-end check.

The same overlap drives the keplerian-shear experiment: conditioned on
the parameter fiber the correlation never settles, but its average over
randomly drawn parameters decays, and both effects are measured here.
"""

from __future__ import annotations

import math

from .chacon import DEFAULT_CLIP_DEPTH, apply_map, orbit, push_forward
from .errors import ConfigError, DomainError
from .intervals import IntervalSet
from .rationals import Enclosure, ilog, rat
from .words import derive_seed, sample_word
from . import returns


def base_measure(word, k, depth=60):
    """lambda_alpha(A_k) = d^-k / (1 + alpha)."""
    denom = word.alpha_value(depth) + 1
    return denom.inv() / word.d ** k


class CorrelationSeries:
    """Map n -> lambda_alpha(A_k intersect T^-n A_k) with provenance."""

    __slots__ = ("k", "alpha", "values", "method", "meta")

    def __init__(self, k, alpha, values, method, meta=None):
        self.k = int(k)
        self.alpha = alpha
        self.values = values
        self.method = method
        self.meta = meta or {}

    def value(self, n):
        return self.values[n]

    def rows(self):
        for n in sorted(self.values):
            yield n, self.values[n]

    def write_csv(self, fh):
        fh.write("n,value_num,value_den\n")
        for n, v in self.rows():
            mid = v.mid
            fh.write("%d,%d,%d\n" % (n, mid.numerator, mid.denominator))

    def __repr__(self):
        return "CorrelationSeries(k=%d, method=%s, %d values)" % (
            self.k, self.method, len(self.values))


def correlation_by_intervals(k, word, n_max, clip_depth=DEFAULT_CLIP_DEPTH,
                             piece_budget=500000):
    """Exact overlap series computed by pushing intervals forward.

    For k >= 1 the base column is a finite interval union at every
    step, so T^n(A_k) is tracked directly.  For k = 0 the image of
    [0, 1) develops infinitely many components, so the complement is
    used instead: with SP = [1, 1+alpha),

        Leb(T^n A_0 ∩ A_0) = 1 - alpha + Leb(T^n SP ∩ SP).

    SP is split at depth M = clip_depth into a finite head and the
    tail E of mass t.  The tail's own overlap is known in closed form:
    t at n=0; at n=1 only the lower slices of double-spacer bands are
    still inside SP (mass d^-M times the digit-2 weight of the shifted
    word); for 2 <= n << h_{M-1} every tail point has exited to the
    bottom of a deep tower and cannot revisit the spacers.  Clipped
    mass, when any accrues, widens the enclosures outward.

    A piece-count budget turns runaway growth into a partial series
    with meta["cutoff"] set instead of an unbounded computation.
    """
    d = word.d
    one_plus = word.alpha_value() + 1
    inv_norm = one_plus.inv()
    values = {}
    meta = {"clip_depth": clip_depth}
    if k == 0:
        alpha = word.alpha_value()
        head = word.alpha_partial(clip_depth - 1)
        tail = alpha - head
        twos = returns.epsilon_distribution(word, clip_depth)[2]
        tail_overlap = {0: tail, 1: twos / d ** clip_depth}
        target = IntervalSet.single(rat(1), 1 + head)
        cur = target
        clipped = rat(0)
        for n in range(n_max + 1):
            if n:
                res = push_forward(cur, word, clip_depth)
                cur = res.intervals
                clipped += res.clipped
            x = cur.intersect(target).length()
            overlap = Enclosure(x, x + clipped) + \
                tail_overlap.get(n, Enclosure(rat(0)))
            values[n] = ((1 - alpha) + overlap) * inv_norm
            if len(cur) > piece_budget:
                meta["cutoff"] = n
                break
        meta["clipped"] = clipped
        return CorrelationSeries(k, word.serialize(), values, "intervals",
                                 meta)
    target = IntervalSet.single(rat(0), rat(1, d ** k))
    cur = target
    clipped = rat(0)
    for n in range(n_max + 1):
        if n:
            res = push_forward(cur, word, clip_depth)
            cur = res.intervals
            clipped += res.clipped
        x = cur.intersect(target).length()
        values[n] = Enclosure(x, x + clipped) * inv_norm
        if len(cur) > piece_budget:
            meta["cutoff"] = n
            break
    meta["clipped"] = clipped
    return CorrelationSeries(k, word.serialize(), values, "intervals", meta)


def correlation_by_distributions(k, word, n_max, depth=60):
    """Overlap series as lambda(A_k) times the n-slice of the return laws.

    The index sum runs over the complete window from ell_range, so the
    neglected tail is exactly zero; enclosure widths come only from
    lazy parameter tails.
    """
    ctx = returns.ReturnContext(word, k, depth)
    lam = base_measure(word, k, depth)
    values = {}
    for n in range(n_max + 1):
        total = Enclosure(rat(0))
        for ell in returns.ell_range(word, k, n, depth):
            total = total + ctx.distribution(ell).mass_at(n)
        values[n] = lam * total
    return CorrelationSeries(k, word.serialize(), values, "distributions",
                             {"depth": depth})


def correlation_at(word, k, n, depth=60):
    """Single-n overlap via the distribution route."""
    ctx = returns.ReturnContext(word, k, depth)
    total = Enclosure(rat(0))
    for ell in returns.ell_range(word, k, n, depth):
        total = total + ctx.distribution(ell).mass_at(n)
    return base_measure(word, k, depth) * total


# -- cylinder generators -------------------------------------------------------

def steps_from_base(word, k, j):
    """Height s with T^s(A_k) = [(j-1) d^-k, j d^-k), for 1 <= j <= d^k.

    Writing j-1 in base d as sum v_i d^i, the level sits at
    s = sum_i v_i h_{k-1-i} + alpha_{k-1-i} [v_i = d-1]: each unit of
    the digit v_i climbs one (k-1-i)-subtower, and the top subcolumn
    is preceded by that stage's spacer batch.
    """
    if not 1 <= j <= word.d ** k:
        raise ConfigError("tower level j out of range")
    n = j - 1
    s = 0
    for i in range(k):
        n, v = divmod(n, word.d)
        s += v * word.tower_height(k - 1 - i)
        if v == word.d - 1:
            s += word.digit(k - 1 - i)
    return s


def spacer_heights(word, k):
    """Heights s < h_k whose level T^s(A_k) lies in the spacer region.

    Levels are translates of the base, so the orbit of 0 locates them:
    level s is a spacer exactly when T^s(0) >= 1.
    """
    out = []
    x = rat(0)
    h = word.tower_height(k)
    for s in range(h):
        if x >= 1:
            out.append(s)
        x = apply_map(x, word)
    return out


class CylinderSet:
    """A generator set: one level of the k-tower over one digit cylinder.

    kind "tower" selects the level [(j-1) d^-k, j d^-k) of the unit
    interval; kind "spacer" selects the level at an explicit height s,
    which must sit in the spacer region.  Both are T^s(A_k) for the
    height reported by height().
    """

    __slots__ = ("kind", "prefix", "k", "j", "s")

    def __init__(self, kind, prefix, k, j=None, s=None):
        if kind not in ("tower", "spacer"):
            raise ConfigError("kind must be tower or spacer")
        self.kind = kind
        self.prefix = tuple(int(b) for b in prefix)
        self.k = int(k)
        self.j = j
        self.s = s

    def matches(self, word):
        return word.digits(len(self.prefix)) == self.prefix

    def height(self, word):
        if self.kind == "tower":
            return steps_from_base(word, self.k, self.j)
        return self.s

    def interval(self, word):
        s = self.height(word)
        x = orbit(rat(0), word, s)[-1]
        return IntervalSet.single(x, x + rat(1, word.d ** self.k))


def conditional_autocovariance(A, word, n, depth=60):
    """Cov(1_A, 1_A o T^n) on the fiber of `word`.

    Every generator is T^s(A_k), and T^-s carries A ∩ T^-n A onto
    A_k ∩ T^-n A_k, so the covariance equals the base-column value
    corr(n) - lambda(A_k)^2 regardless of the height.
    """
    if not A.matches(word):
        raise DomainError("parameter word is outside the generator cylinder")
    lam = base_measure(word, A.k, depth)
    return correlation_at(word, A.k, n, depth) - lam * lam


# -- keplerian shear ------------------------------------------------------------

def default_shear_grid(d, j_max=12):
    """Geometric n-grid {ceil(d^(j/2))} exposing the log-scale decay."""
    out = []
    for j in range(2, j_max + 1):
        v = math.isqrt(d ** j)
        if v * v < d ** j:
            v += 1
        if v not in out:
            out.append(v)
    return out


def resonant_time(word, k, near, depth=60):
    """A spike time n* ~ near for this fiber, with its return index.

    Takes ell* = d^m matching the scale of `near` and returns the mode
    of the ell*-th return law: n* = ell* h_k + M_m, which carries mass
    (d-2)/(d-1) and keeps the fiber correlation away from lambda^2.
    """
    d = word.d
    denom = (word.alpha_value(depth) + 1) * d ** k
    target = rat(near) / denom.lo
    m = ilog(max(1, int(target)), d)
    ell = d ** m
    drift = sum(word.digit(k + i) * d ** (m - 1 - i) for i in range(m))
    return ell * word.tower_height(k) + drift, ell


def shear_experiment(k, sample_count, seed, n_grid=None, d=7, depth=60,
                     detail=False):
    """Monte-Carlo average of |Cov| over parameter fibers, per time bin.

    Each fiber is an independent lazy-random word derived from the
    master seed; its correlation values are exact, only the average
    over fibers is statistical.  Returns rows (n, mean_abs_cov,
    std_err, samples); with detail=True also a per-fiber map that
    includes each fiber's own resonant spike time.
    """
    if sample_count < 1:
        raise ConfigError("need at least one sample")
    grid = list(n_grid) if n_grid else default_shear_grid(d)
    fibers = [sample_word(d, derive_seed(seed, i))
              for i in range(sample_count)]
    per_fiber = {}
    cols = {n: [] for n in grid}
    for idx, w in enumerate(fibers):
        ctx = returns.ReturnContext(w, k, depth)
        lam = base_measure(w, k, depth)
        lam2 = float((lam * lam).mid)
        series = {}
        for n in grid:
            total = Enclosure(rat(0))
            for ell in returns.ell_range(w, k, n, depth):
                total = total + ctx.distribution(ell).mass_at(n)
            cov = abs(float((lam * total).mid) - lam2)
            cols[n].append(cov)
            series[n] = cov
        if detail:
            nstar, _ = resonant_time(w, k, grid[-1], depth)
            total = Enclosure(rat(0))
            for ell in returns.ell_range(w, k, nstar, depth):
                total = total + ctx.distribution(ell).mass_at(nstar)
            series["resonant"] = (nstar,
                                  abs(float((lam * total).mid) - lam2))
            per_fiber[idx] = series
    rows = []
    for n in grid:
        xs = cols[n]
        mean = sum(xs) / len(xs)
        if len(xs) > 1:
            var = sum((x - mean) ** 2 for x in xs) / (len(xs) - 1)
            se = math.sqrt(var / len(xs))
        else:
            se = 0.0
        rows.append((n, mean, se, len(xs)))
    if detail:
        return rows, per_fiber
    return rows


def write_shear_csv(rows, fh):
    fh.write("n,mean_abs_cov,std_err,samples\n")
    for n, mean, se, count in rows:
        fh.write("%d,%.17g,%.17g,%d\n" % (n, mean, se, count))


def self_correlation_report(word, k, ns, depth=60):
    """Rows (n, rescaled deviation e(n)) for the flat-correlation estimate.

    e(n) = |sum_ell d'_ell(n) - lambda(A_k)| (log_d n)^(1/4)
           / sqrt(log_d log_d n), defined for n > d so the inner log
    is positive.  Boundedness of e over an n-range is the empirical
    content; callers decide which n to exclude as exceptional.
    """
    d = word.d
    ctx = returns.ReturnContext(word, k, depth)
    lam = base_measure(word, k, depth)
    rows = []
    for n in ns:
        if n <= d:
            raise ConfigError("report needs n > d")
        total = Enclosure(rat(0))
        for ell in returns.ell_range(word, k, n, depth):
            total = total + ctx.distribution(ell).mass_at(n)
        gap = abs(float(total.mid) - float(lam.mid))
        logn = math.log(n, d)
        e = gap * logn ** 0.25 / math.sqrt(math.log(logn, d))
        rows.append((n, e))
    return rows
