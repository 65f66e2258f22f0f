"""The transformation itself: pointwise map, orbits, exact image sets.

The space is [0, 1 + alpha) and splits into bands indexed by n >= 0:

    Z_n = [1 - d^-n, 1 - d^-(n+1))  u  [1 + alpha^(n-1), 1 + alpha^(n))

On each band the map is a piecewise translation with at most three
pieces (four when alpha_n = 2): the bulk of the left part climbs one
tower level, its top slice jumps to the spacer block, spacer slices
stack upward, and the final spacer slice drops back to the tower.

Bands accumulate at x = 1 from the left and at 1 + alpha from below,
so the forward image of an interval touching either point has
infinitely many components.  Image computations clip at configurable
thresholds near both points and report the clipped Lebesgue mass
exactly; callers turn that into enclosures.
"""

from __future__ import annotations

from .errors import BudgetError, DomainError
from .intervals import IntervalSet
from .rationals import rat

DEFAULT_CLIP_DEPTH = 24
_REFINE_LIMIT = 8192


def check_in_space(x, word):
    """Raise DomainError unless 0 <= x < 1 + alpha; returns nothing.

    For random tails the comparison with 1 + alpha refines the digit
    enclosure until it decides; the tail value is irrational for any
    sequence this library generates, so refinement terminates.
    """
    x = rat(x)
    if x < 0:
        raise DomainError("point %s below the space" % x)
    if x < 1:
        return
    depth = 60
    while depth <= _REFINE_LIMIT:
        enc = word.alpha_value(depth)
        if x - 1 < enc.lo:
            return
        if x - 1 >= enc.hi:
            raise DomainError("point %s at or above 1 + alpha" % x)
        depth *= 2
    raise BudgetError("cannot separate point from 1 + alpha")


def band_index(x, word):
    """The n with x in Z_n."""
    x = rat(x)
    d = word.d
    if x < 0:
        raise DomainError("point %s below the space" % x)
    if x < 1:
        y = 1 - x
        n = 0
        step = rat(1, d)
        while y <= step:
            step = step / d
            n += 1
        return n
    check_in_space(x, word)
    n = 0
    part = rat(0)
    while True:
        part += rat(word.digit(n), d ** (n + 1))
        if x - 1 < part:
            return n
        n += 1


def apply_map(x, word):
    """One step of the transformation."""
    x = rat(x)
    n = band_index(x, word)
    d = word.d
    D = rat(1, d ** (n + 1))
    if x < 1:
        if x < 1 - 2 * D:
            # climb one level of the current tower column
            return x + rat(1, d ** n) + D - 1
        # top slice of the left part enters the spacer block
        return x + 2 * D + word.alpha_partial(n - 1)
    a_prev = word.alpha_partial(n - 1)
    if word.digit(n) == 2 and x < 1 + a_prev + D:
        return x + D               # lower spacer slice moves up one slice
    # last spacer slice drops back to the tower
    return x + d * D - 1 - word.alpha_partial(n)


def orbit(x, word, steps):
    """[x, Tx, ..., T^steps x]."""
    out = [rat(x)]
    for _ in range(steps):
        out.append(apply_map(out[-1], word))
    return out


class ImageResult:
    """Image interval set plus the Lebesgue mass clipped on the way."""

    __slots__ = ("intervals", "clipped")

    def __init__(self, intervals, clipped):
        self.intervals = intervals
        self.clipped = clipped

    def __repr__(self):
        return "ImageResult(%d pieces, clipped=%s)" % (
            len(self.intervals), self.clipped)


def push_forward(iset, word, clip_depth=DEFAULT_CLIP_DEPTH):
    """Exact forward image T(iset) as an ImageResult.

    Pieces inside [1 - d^-clip_depth, 1) or [1 + alpha^(clip_depth-1),
    1 + alpha) are removed before mapping; their total length is the
    `clipped` field.  The map is a piecewise translation, so everything
    kept is mapped exactly.
    """
    d = word.d
    M = clip_depth
    one = rat(1)
    c1 = one - rat(1, d ** M)
    c2 = one + word.alpha_partial(M - 1)
    out = []
    clipped = rat(0)

    for a, b in iset:
        # tower side of the piece
        lo, hi = a, min(b, one)
        if lo < hi:
            if hi > c1:
                clipped += hi - max(lo, c1)
                hi = min(hi, c1)
            if lo < hi:
                x = lo
                n = band_index(x, word)
                while x < hi:
                    D = rat(1, d ** (n + 1))
                    band_hi = one - D
                    top = min(hi, band_hi)
                    cut = one - 2 * D
                    m1 = min(top, cut)
                    if x < m1:
                        t = rat(1, d ** n) + D - one
                        out.append((x + t, m1 + t))
                    x2 = max(x, cut)
                    if x2 < top:
                        t = 2 * D + word.alpha_partial(n - 1)
                        out.append((x2 + t, top + t))
                    x = top
                    n += 1
        # spacer side
        lo, hi = max(a, one), b
        if lo < hi:
            if hi > c2:
                clipped += hi - max(lo, c2)
                hi = min(hi, c2)
            if lo < hi:
                x = lo
                n = band_index(x, word)
                a_prev = word.alpha_partial(n - 1)
                while x < hi:
                    an = word.digit(n)
                    D = rat(1, d ** (n + 1))
                    a_n = a_prev + an * D
                    top = min(hi, one + a_n)
                    if an == 2:
                        mid = one + a_prev + D
                        m1 = min(top, mid)
                        if x < m1:
                            out.append((x + D, m1 + D))
                        x = max(x, mid)
                    if x < top:
                        t = d * D - one - a_n
                        out.append((x + t, top + t))
                    x = top
                    a_prev = a_n
                    n += 1

    return ImageResult(IntervalSet(out), clipped)


def push_forward_n(iset, word, steps, clip_depth=DEFAULT_CLIP_DEPTH):
    """T^steps(iset) with accumulated clipped mass."""
    clipped = rat(0)
    cur = iset
    for _ in range(steps):
        res = push_forward(cur, word, clip_depth)
        cur = res.intervals
        clipped += res.clipped
    return ImageResult(cur, clipped)
