"""Exact distributions of ell-th return times and their localization.

Under the uniform measure on odometer coordinates, the time of the
ell-th return to the base column A_k is an integer random variable
t'_{ell,h}.  Its law d'_ell(n) satisfies a four-case recursion in
ell = d*l' + q obtained by conditioning on the first digit; the ell=1
base case is the law of h + eps_k, solved exactly from the digit word.
Distributions are sparse integer-supported maps with enclosure values
(zero-width for periodic tails) plus an explicit truncation mass.

The module also carries the localization interval I_n (the window of
ell that can return at time n), the moment and covariance bounds on
the cocycle summands, and a cylinder-histogram oracle that recomputes
small distributions straight from the closed form.
"""

from __future__ import annotations

from .errors import BudgetError, ConfigError
from .rationals import Enclosure, ilog, rat, rceil, rfloor
from .words import balanced_digits, balanced_weight
from . import symbolic


def repunit(d, m):
    """The index with balanced digits 1 at levels 0..m-1."""
    return (d ** m - 1) // (d - 1)


def epsilon_distribution(word, m, depth=60):
    """Law of eps_m under the uniform measure: {0, 1, 2} -> Enclosure.

    The scan stops at position r with probability d^-r and pays the
    word digit m+r-1 exactly when the stopped digit is d-2, which has
    conditional weight 1/(d-1) each round; summing the geometric series
    per digit value gives P(0) = (d-2)/(d-1) and
    P(v) = sum over {j : digit(m+j) = v} of d^-(j+1).
    """
    d = word.d
    w = word.shift(m) if m else word
    probs = {0: Enclosure(rat(d - 2, d - 1)), 1: None, 2: None}
    if not w.is_random:
        L = len(w.base)
        P = len(w.pattern)
        for v in (1, 2):
            head = sum((rat(1, d ** (j + 1)) for j, b in enumerate(w.base)
                        if b == v), rat(0))
            num = sum(d ** (P - 1 - i) for i, p in enumerate(w.pattern)
                      if p == v)
            probs[v] = Enclosure(head + rat(num, d ** P - 1) / d ** L)
        return probs
    tail = rat(1, d - 1) / d ** depth
    for v in (1, 2):
        head = sum((rat(1, d ** (j + 1)) for j in range(depth)
                    if w.digit(j) == v), rat(0))
        probs[v] = Enclosure(head, head + tail)
    return probs


class ReturnDistribution:
    """Sparse law of t'_{ell,h}: integer support with enclosure masses.

    truncation_mass is 1 minus the sum of the lower probability bounds,
    so lower masses plus truncation is exactly 1; it is exactly zero
    for periodic tails computed by the recursion.
    """

    __slots__ = ("support", "meta")

    def __init__(self, support, meta=None):
        cleaned = {}
        for n, p in support.items():
            if not isinstance(p, Enclosure):
                p = Enclosure(p)
            if p.hi > 0:
                cleaned[int(n)] = p
        self.support = cleaned
        self.meta = meta or {}

    @property
    def truncation_mass(self):
        total = sum((p.lo for p in self.support.values()), rat(0))
        return rat(1) - total

    def items(self):
        return sorted(self.support.items())

    def mass_at(self, n):
        return self.support.get(int(n), Enclosure(rat(0)))

    def total(self):
        lo = sum((p.lo for p in self.support.values()), rat(0))
        hi = sum((p.hi for p in self.support.values()), rat(0))
        return Enclosure(lo, min(hi, rat(1)) if hi >= lo else hi)

    def moment(self, order, center=0):
        c = rat(center)
        lo = rat(0)
        hi = rat(0)
        for n, p in self.support.items():
            v = (rat(n) - c) ** order
            if v >= 0:
                lo += v * p.lo
                hi += v * p.hi
            else:
                lo += v * p.hi
                hi += v * p.lo
        return Enclosure(lo, hi)

    def mean(self):
        return self.moment(1)

    def variance(self):
        m = self.mean()
        second = self.moment(2)
        msq = m * m
        lo = second.lo - msq.hi
        hi = second.hi - msq.lo
        if lo < 0:
            lo = rat(0)
        return Enclosure(lo, max(hi, lo))

    def __repr__(self):
        parts = ", ".join("%d: %s" % (n, p) for n, p in list(self.items())[:5])
        more = "" if len(self.support) <= 5 else " ..."
        return "ReturnDistribution({%s%s})" % (parts, more)


class ReturnContext:
    """Shared recursion state for one (word, k): memo table and h.

    The memo key folds the shift level through the word's periodic
    structure, so a series of correlations reuses every child law.
    """

    def __init__(self, word, k, depth=60, support_cap=200000):
        self.word = word
        self.k = int(k)
        self.h = word.tower_height(k)
        self.depth = depth
        self.cap = support_cap
        self._memo = {}
        self._eps = {}

    def _eps_dist(self, s):
        key = self.word.shift_key(self.k + s)
        if key not in self._eps:
            self._eps[key] = epsilon_distribution(self.word, self.k + s,
                                                  self.depth)
        return self._eps[key]

    def _dist(self, ell, s):
        d = self.word.d
        h = self.h
        if ell == 0:
            return {0: Enclosure(rat(1))}
        if ell == 1:
            probs = self._eps_dist(s)
            out = {}
            for v in (0, 1, 2):
                p = probs[v]
                if p.hi > 0:
                    out[h + v] = p
            return out
        key = (ell, self.word.shift_key(self.k + s))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        l2, q = divmod(ell, d)
        a = self.word.digit(self.k + s)
        low = self._dist(l2, s + 1)
        if q == 0:
            off = (d - 1) * l2 * h + l2 * a
            out = {n + off: p for n, p in low.items()}
            self._memo[key] = out
            return out
        high = self._dist(l2 + 1, s + 1)
        a1 = (q + (d - 1) * l2) * h + l2 * a
        a2 = a1 + a
        a3 = a1 + a - h
        a4 = a1 - h
        pieces = []
        if q <= d - 2:
            pieces.append((low, a1, d - 1 - q))
        pieces.append((low, a2, 1))
        if q >= 2:
            pieces.append((high, a3, q - 1))
        pieces.append((high, a4, 1))
        out = {}
        unit = rat(1, d)
        for child, off, count in pieces:
            w = count * unit
            for n, p in child.items():
                m = n + off
                cur = out.get(m)
                out[m] = p * w if cur is None else cur + p * w
        if len(out) > self.cap:
            raise BudgetError("distribution support exceeded cap")
        self._memo[key] = out
        return out

    def distribution(self, ell):
        ell = int(ell)
        if ell < 0:
            raise ConfigError("return index must be >= 0")
        support = self._dist(ell, 0)
        return ReturnDistribution(
            dict(support),
            meta={"ell": int(ell), "k": self.k, "h": self.h,
                  "alpha": self.word.serialize()})

    def kac_mean(self, ell):
        """ell * d^k * (1 + alpha), the exact expectation of t'_ell."""
        one_plus = self.word.alpha_value(self.depth) + 1
        return one_plus * (ell * self.word.d ** self.k)


def distribution(word, k, ell, depth=60):
    return ReturnContext(word, k, depth).distribution(ell)


def moments(word, k, ell, depth=60):
    """(mean, variance) of t'_ell; mean equals the Kac value exactly."""
    ctx = ReturnContext(word, k, depth)
    dist = ctx.distribution(ell)
    return dist.mean(), dist.variance()


# -- cylinder-histogram oracle ------------------------------------------------

def _read_schedule(word, k, ell):
    # (level, sign, addend) per scheduled scan, plus the deterministic base
    base = ell * word.tower_height(k)
    reads = []
    for j, sign, steps, drift in symbolic.scan_reads(ell, word, k):
        base += drift
        reads.append((j, sign, steps))
    return base, reads


def brute_force_distribution(word, k, ell, depth=None):
    """Histogram of the closed form over all depth-`depth` cylinders.

    Walks the digit positions once, tracking every scheduled scan's
    carry and resolution state with exact cylinder weights: the result
    is identical to evaluating return_time_closed_form on each of the
    d^depth cylinders and binning with weight d^-depth.  Cylinders on
    which some scan is still unresolved at `depth` are reported as
    truncation mass (spread over their value enclosure is not needed;
    the mass is simply withheld).
    """
    d = word.d
    ell = int(ell)
    if ell < 0:
        raise ConfigError("return index must be >= 0")
    if depth is None:
        depth = max(12, (ilog(ell, d) if ell else 0) + 8)
    base, reads = _read_schedule(word, k, ell)
    if not reads:
        return ReturnDistribution({base: Enclosure(rat(1))},
                                  meta={"ell": ell, "k": k, "oracle": True})
    # per-read addend digits, little-endian, padded to depth
    addend = []
    for j, sign, steps in reads:
        digs = []
        n = steps
        for _ in range(depth + 1):
            n, r = divmod(n, d)
            digs.append(r)
        addend.append(digs)
    # state: tuple over reads of None (resolved) or carry bit; plus value
    start = tuple(0 for _ in reads)
    states = {(start, 0): rat(1)}
    unit = rat(1, d)
    for i in range(1, depth + 1):
        val_digit = word.digit(k + i - 1)
        nxt = {}
        for (carries, val), weight in states.items():
            if all(c is None for c in carries):
                nxt[(carries, val)] = nxt.get((carries, val), rat(0)) + weight
                continue
            for w in range(d):
                new = list(carries)
                v = val
                for r_idx, (j, sign, steps) in enumerate(reads):
                    c = new[r_idx]
                    if c is None or j >= i:
                        continue
                    z = w + addend[r_idx][i - j - 1] + c
                    zm = z % d
                    if zm == d - 1:
                        new[r_idx] = z // d
                    else:
                        new[r_idx] = None
                        if zm == d - 2:
                            v += sign * val_digit
                key = (tuple(new), v)
                nxt[key] = nxt.get(key, rat(0)) + weight * unit
        states = nxt
    hist = {}
    for (carries, val), weight in states.items():
        if all(c is None for c in carries):
            n = base + val
            hist[n] = hist.get(n, rat(0)) + weight
    out = ReturnDistribution({n: Enclosure(p) for n, p in hist.items()},
                             meta={"ell": ell, "k": k, "oracle": True,
                                   "depth": depth})
    return out


# -- localization -------------------------------------------------------------

class Localization:
    """The window of return indices that can hit time n."""

    __slots__ = ("n", "k", "m", "center", "radius")

    def __init__(self, n, k, m, center, radius):
        self.n = n
        self.k = k
        self.m = m
        self.center = center
        self.radius = radius

    def membership(self, ell):
        """True / False when decided, None when the enclosure straddles."""
        ell = rat(ell)
        lo_out = self.center.lo - self.radius.hi
        lo_in = self.center.hi - self.radius.lo
        hi_in = self.center.lo + self.radius.lo
        hi_out = self.center.hi + self.radius.hi
        if ell < lo_out or ell > hi_out:
            return False
        if lo_in <= ell <= hi_in:
            return True
        return None

    def __repr__(self):
        return "Localization(n=%d, center=%s, radius=%s)" % (
            self.n, self.center, self.radius)


def localization(word, k, n, depth=60):
    """I_n: center n/(d^k(1+alpha)), radius m(c+2)/(d^k(1+alpha)).

    m = floor(log_d n) and c = 2/(1 - 1/d).  Every index with positive
    return mass at time n is claimed to lie inside; tests validate the
    claim on computed distributions at the scales where it holds.
    """
    if n < 1:
        raise ConfigError("localization needs n >= 1")
    d = word.d
    m = ilog(n, d)
    c = rat(2 * d, d - 1)
    denom = (word.alpha_value(depth) + 1) * d ** k
    inv = Enclosure(rat(1) / denom.hi, rat(1) / denom.lo)
    center = inv * n
    radius = inv * ((c + 2) * m)
    return Localization(int(n), int(k), m, center, radius)


def ell_range(word, k, n, depth=60):
    """Complete list of indices ell that can satisfy t'_ell = n.

    Two rigorous filters: h <= each of the ell reads <= h+2 brackets
    t' in [ell*h, ell*(h+2)], and the per-level scan windows deviate
    from the Kac mean ell*d^k*(1+alpha) by at most 4 per nonzero
    balanced digit (one spacer payment plus one deferred scan, each
    at most 2).  Anything passing both is returned; the true support
    of n-hitters is a subset.
    """
    n = int(n)
    if n == 0:
        return [0]
    d = word.d
    h = word.tower_height(k)
    lo = max(1, rceil(rat(n, h + 2)))
    hi = rfloor(rat(n, h))
    if hi < lo:
        return []
    denom = (word.alpha_value(depth) + 1) * d ** k
    # worst-case digit count over the bracket narrows the scan window
    slack_max = 4 * (ilog(hi, d) + 1)
    lo = max(lo, rceil((n - slack_max) / denom.hi))
    hi = min(hi, rfloor((n + slack_max) / denom.lo))
    out = []
    for ell in range(lo, hi + 1):
        slack = 4 * (balanced_weight(ell, d) or 1)
        gap_lo = n - denom.hi * ell
        gap_hi = n - denom.lo * ell
        if gap_hi < -slack or gap_lo > slack:
            continue
        out.append(ell)
    return out


# -- variance and covariance bounds -------------------------------------------

def sup_norm(word):
    """||alpha||_inf: the largest digit the word can produce."""
    if word.is_random:
        return 2
    return max(word.base + word.pattern)


def summand_variance(word, k, i, depth=60):
    """V(X_i) = beta^(2) - beta^2 at shift k+i; exact for periodic tails."""
    b1 = word.beta(k + i, 1, depth)
    b2 = word.beta(k + i, 2, depth)
    sq = b1 * b1
    return Enclosure(b2.lo - sq.hi, b2.hi - sq.lo)


def min_var_constant(d):
    """(d-2)/(d-1)^2, the universal lower bound for V(X_i)."""
    return rat(d - 2, (d - 1) ** 2)


def variance_floor_holds(word, k, ell, depth=60, ctx=None):
    """Check V(t'_ell) >= (1 - 2||alpha||_inf / sqrt((d-1)(d-2))) * minvar * b_ell.

    The square root is eliminated by exact rational squaring: with
    r = 1 - V/(minvar*b), the claim is r <= 0 or (d-1)(d-2) r^2 <= 4 s^2
    where s = ||alpha||_inf.  Returns (holds, variance, bound_residual).
    """
    d = word.d
    b = balanced_weight(ell, d)
    if b == 0:
        return True, Enclosure(rat(0)), rat(0)
    if ctx is None:
        ctx = ReturnContext(word, k, depth)
    var = ctx.distribution(ell).variance()
    s = sup_norm(word)
    floor_unit = min_var_constant(d) * b
    # r = 1 - var/floor_unit, using the variance lower bound
    r = rat(1) - var.lo / floor_unit
    if r <= 0:
        return True, var, r
    holds = (d - 1) * (d - 2) * r * r <= 4 * s * s
    return holds, var, r


def pairwise_covariance(word, k, i, j, ell=None, depth=24):
    """Enclosure of Cov(X_i, X_j) for the scheduled scans at levels i > j.

    Runs the same carry-tracking cylinder walk as the oracle on just
    the two reads, accumulating the exact joint law of the pair of
    scan payments; unresolved cylinders at `depth` widen the enclosure
    by their worst-case payment range.
    """
    d = word.d
    if not i > j >= 0:
        raise ConfigError("needs i > j >= 0")
    if ell is None:
        ell = repunit(d, i + 1)
    base, reads = _read_schedule(word, k, ell)
    lookup = {}
    for lvl, sign, steps in reads:
        if lvl in (i, j) and lvl not in lookup:
            lookup[lvl] = (lvl, sign, steps)
    if i not in lookup or j not in lookup:
        raise ConfigError("ell has no scan at the requested levels")
    pair = [lookup[j], lookup[i]]
    addend = []
    for lvl, sign, steps in pair:
        digs = []
        n = steps
        for _ in range(depth + 1):
            n, r = divmod(n, d)
            digs.append(r)
        addend.append(digs)
    # joint law over (pay_j, pay_i); values None until resolved
    states = {((0, 0), (None, None)): rat(1)}
    unit = rat(1, d)
    for pos in range(1, depth + 1):
        val_digit = word.digit(k + pos - 1)
        nxt = {}
        for (carries, vals), weight in states.items():
            if carries[0] is None and carries[1] is None:
                key = (carries, vals)
                nxt[key] = nxt.get(key, rat(0)) + weight
                continue
            for w in range(d):
                cs = list(carries)
                vs = list(vals)
                for t in range(2):
                    lvl = pair[t][0]
                    c = cs[t]
                    if c is None or lvl >= pos:
                        continue
                    z = w + addend[t][pos - lvl - 1] + c
                    zm = z % d
                    if zm == d - 1:
                        cs[t] = z // d
                    else:
                        cs[t] = None
                        vs[t] = val_digit if zm == d - 2 else 0
                key = (tuple(cs), tuple(vs))
                nxt[key] = nxt.get(key, rat(0)) + weight * unit
        states = nxt
    sign_i = lookup[i][1]
    sign_j = lookup[j][1]
    ci = word.beta(k + i, 1, depth=60) * sign_i
    cj = word.beta(k + j, 1, depth=60) * sign_j
    lo = rat(0)
    hi = rat(0)
    for (carries, vals), weight in states.items():
        vj, vi = vals
        if carries[0] is None and carries[1] is None:
            term = (sign_i * vi - ci) * (sign_j * vj - cj) * weight
            lo += term.lo
            hi += term.hi
        else:
            # unresolved payment in [0, 2]: take the worst product range
            cands = []
            for xi in ((vi,) if carries[1] is None else (0, 2)):
                for xj in ((vj,) if carries[0] is None else (0, 2)):
                    cands.append((sign_i * xi - ci) * (sign_j * xj - cj))
            lo += min(c.lo for c in cands) * weight
            hi += max(c.hi for c in cands) * weight
    return Enclosure(lo, hi)


def covariance_bound(word, k, i, j, depth=60):
    """The proven ceiling ||alpha||_inf^2 / (d^(i-j) (d-1))."""
    s = sup_norm(word)
    return rat(s * s, word.d ** (i - j) * (word.d - 1))


def variance_ratio_report(word, k, n, depth=60):
    """Variance ratios across the localization window at n.

    Returns (m, pairs) where pairs maps (ell, ell') to the exact ratio
    var_ell / var_ell' for consecutive members of the window; callers
    fit the |ratio - 1| <= C log(m)/sqrt(m) envelope.
    """
    ells = ell_range(word, k, n, depth)
    loc = localization(word, k, n, depth)
    inside = [e for e in ells if loc.membership(e)]
    ctx = ReturnContext(word, k, depth)
    out = {}
    for a, b in zip(inside, inside[1:]):
        va = ctx.distribution(a).variance()
        vb = ctx.distribution(b).variance()
        if vb.lo > 0:
            out[(a, b)] = Enclosure(va.lo / vb.hi, va.hi / vb.lo)
    return loc.m, out
