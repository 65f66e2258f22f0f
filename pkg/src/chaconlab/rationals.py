"""Exact rational arithmetic helpers.

Everything numeric in the library that is not explicitly a float goes
through these helpers.  Backed by gmpy2.mpq when available (much faster
for the long interval and distribution loops), fractions.Fraction
otherwise.  Both keep values in lowest terms with positive denominator,
which is what the serialization below relies on.
"""

from __future__ import annotations

try:
    from gmpy2 import mpq as _mpq

    def rat(num, den=1):
        return _mpq(num, den)

    BACKEND = "gmpy2"
except ImportError:  # pragma: no cover
    from fractions import Fraction as _mpq

    def rat(num, den=1):
        return _mpq(num, den)

    BACKEND = "fractions"

ZERO = rat(0)
ONE = rat(1)


def rat_from_str(text):
    """Parse 'p/q' or 'p' into an exact rational."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        d = int(den)
        if d == 0:
            raise ZeroDivisionError("zero denominator in %r" % text)
        return rat(int(num), d)
    return rat(int(text))


def rat_str(x):
    """Canonical 'p/q' form, 'p' when the denominator is 1."""
    n, d = x.numerator, x.denominator
    if d == 1:
        return str(n)
    return "%d/%d" % (n, d)


def rat_dec(x, digits=15):
    """Decimal rendering with `digits` places, exact integer math.

    Truncates toward zero; good enough for the convenience columns,
    the canonical value is always the p/q field next to it.
    """
    n, d = int(x.numerator), int(x.denominator)
    sign = "-" if n < 0 else ""
    n = abs(n)
    whole, rem = divmod(n, d)
    frac = rem * 10**digits // d
    return "%s%d.%0*d" % (sign, whole, digits, frac)


def rfloor(x):
    n, d = x.numerator, x.denominator
    return int(n // d)


def rceil(x):
    n, d = x.numerator, x.denominator
    return int(-((-n) // d))


def ilog(n, base):
    """floor(log_base(n)) for integers n >= 1, base >= 2, exactly."""
    if n < 1:
        raise ValueError("ilog needs n >= 1")
    k = 0
    p = base
    while p <= n:
        p *= base
        k += 1
    return k


def floor_log_rat(x, base):
    """floor(log_base(x)) for rational x > 0, exactly."""
    if x <= 0:
        raise ValueError("floor_log_rat needs x > 0")
    if x >= 1:
        return ilog(rfloor(x), base) if x >= 1 else 0
    # x < 1: find smallest k with x * base^k >= 1, answer is -k
    k = 0
    y = x
    while y < 1:
        y = y * base
        k += 1
    return -k


class Enclosure:
    """Closed rational interval [lo, hi] used as a value enclosure.

    Carries exact outward-rounded bounds for quantities we cannot
    evaluate exactly (lazy parameter tails, clipped interval mass).
    A zero-width enclosure is an exact value.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        if hi is None:
            hi = lo
        lo = rat(lo)
        hi = rat(hi)
        if lo > hi:
            raise ValueError("enclosure bounds out of order")
        self.lo = lo
        self.hi = hi

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mid(self):
        return (self.lo + self.hi) / 2

    @property
    def exact(self):
        return self.lo == self.hi

    def __add__(self, other):
        if isinstance(other, Enclosure):
            return Enclosure(self.lo + other.lo, self.hi + other.hi)
        return Enclosure(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Enclosure):
            return Enclosure(self.lo - other.hi, self.hi - other.lo)
        return Enclosure(self.lo - other, self.hi - other)

    def __rsub__(self, other):
        return Enclosure(other - self.hi, other - self.lo)

    def __mul__(self, other):
        if isinstance(other, Enclosure):
            cands = [self.lo * other.lo, self.lo * other.hi,
                     self.hi * other.lo, self.hi * other.hi]
            return Enclosure(min(cands), max(cands))
        other = rat(other)
        if other >= 0:
            return Enclosure(self.lo * other, self.hi * other)
        return Enclosure(self.hi * other, self.lo * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = rat(other)
        if other == 0:
            raise ZeroDivisionError
        if other > 0:
            return Enclosure(self.lo / other, self.hi / other)
        return Enclosure(self.hi / other, self.lo / other)

    def inv(self):
        """Reciprocal enclosure; the interval must not straddle zero."""
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("enclosure straddles zero")
        return Enclosure(1 / self.hi, 1 / self.lo)

    def contains(self, value):
        return self.lo <= value <= self.hi

    def overlaps(self, other):
        return self.lo <= other.hi and other.lo <= self.hi

    def entirely_below(self, value):
        """True when every point of the enclosure is < value."""
        return self.hi < value

    def entirely_at_least(self, value):
        return self.lo >= value

    def hull(self, other):
        return Enclosure(min(self.lo, other.lo), max(self.hi, other.hi))

    def __eq__(self, other):
        if isinstance(other, Enclosure):
            return self.lo == other.lo and self.hi == other.hi
        return self.exact and self.lo == other

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        if self.exact:
            return "Enclosure(%s)" % rat_str(self.lo)
        return "Enclosure(%s, %s)" % (rat_str(self.lo), rat_str(self.hi))
