"""Parameter words: the base d and the spacer digit sequence.

A word is an infinite sequence alpha = (alpha_0, alpha_1, ...) with
digits in {1, 2}, stored as a finite explicit prefix plus a tail rule.
Tails are either periodic (a repeating pattern) or random (digits drawn
lazily from a keyed hash, so any digit is available on demand and the
sequence is reproducible from the seed alone).

The word determines everything else in the library: the spacer value
alpha = sum alpha_j d^-(j+1), its partial sums, the tower heights, and
the digit moments that drive the return-time distributions.
"""

from __future__ import annotations

import hashlib

from .errors import ConfigError
from .rationals import Enclosure, rat

ALLOWED_DIGITS = (1, 2)


def _hash_bits(seed, index):
    # counter mode keyed blake2b: stable across platforms and call order
    key = str(seed).encode("ascii")
    h = hashlib.blake2b(int(index).to_bytes(16, "little"),
                        digest_size=8, key=key)
    return h.digest()


def random_digit(seed, index):
    """Digit in {1, 2} at position `index` of the random tail for `seed`."""
    return 1 + (_hash_bits(seed, index)[0] & 1)


def derive_seed(seed, index):
    """Stable per-fiber seed derived from a master seed."""
    return int.from_bytes(_hash_bits(("fiber", seed), index), "little")


class ParameterWord:
    """d plus the digit sequence; immutable, hashable, shiftable."""

    __slots__ = ("d", "base", "tail_kind", "pattern", "seed", "offset")

    def __init__(self, d, base=(), tail_kind="periodic", pattern=(1,),
                 seed=None, offset=0, allow_small=False):
        d = int(d)
        if d < 3 or d % 2 == 0:
            raise ConfigError("d must be odd and >= 3, got %d" % d)
        if d < 7 and not allow_small:
            raise ConfigError(
                "d=%d is outside the supported range; pass allow_small "
                "to experiment with d in {3, 5}" % d)
        base = tuple(int(b) for b in base)
        for b in base:
            if b not in ALLOWED_DIGITS:
                raise ConfigError("spacer digits must be 1 or 2, got %d" % b)
        self.d = d
        self.base = base
        self.tail_kind = tail_kind
        if tail_kind == "periodic":
            pattern = tuple(int(p) for p in pattern)
            if not pattern:
                raise ConfigError("periodic tail needs a nonempty pattern")
            for p in pattern:
                if p not in ALLOWED_DIGITS:
                    raise ConfigError("pattern digits must be 1 or 2")
            self.pattern = pattern
            self.seed = None
            self.offset = 0
        elif tail_kind == "random":
            if seed is None:
                raise ConfigError("random tail needs a seed")
            self.pattern = None
            self.seed = int(seed)
            self.offset = int(offset)
        else:
            raise ConfigError("unknown tail kind %r" % tail_kind)

    # -- identity ---------------------------------------------------------

    def _key(self):
        if self.tail_kind == "periodic":
            return (self.d, self.base, "periodic", self.pattern)
        return (self.d, self.base, "random", self.seed, self.offset)

    def __eq__(self, other):
        return isinstance(other, ParameterWord) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return "ParameterWord(%r)" % self.serialize()

    @property
    def is_random(self):
        return self.tail_kind == "random"

    # -- digits and shifts -------------------------------------------------

    def digit(self, j):
        """alpha_j."""
        if j < 0:
            raise ValueError("digit index must be >= 0")
        L = len(self.base)
        if j < L:
            return self.base[j]
        if self.tail_kind == "periodic":
            return self.pattern[(j - L) % len(self.pattern)]
        return random_digit(self.seed, self.offset + (j - L))

    def digits(self, count, start=0):
        return tuple(self.digit(start + j) for j in range(count))

    def shift(self, s):
        """The word sigma^s alpha (drop the first s digits)."""
        if s == 0:
            return self
        if s < 0:
            raise ValueError("shift must be >= 0")
        L = len(self.base)
        if s <= L:
            if self.tail_kind == "periodic":
                return ParameterWord(self.d, self.base[s:], "periodic",
                                     self.pattern, allow_small=True)
            return ParameterWord(self.d, self.base[s:], "random",
                                 seed=self.seed, offset=self.offset,
                                 allow_small=True)
        extra = s - L
        if self.tail_kind == "periodic":
            P = len(self.pattern)
            r = extra % P
            rotated = self.pattern[r:] + self.pattern[:r]
            return ParameterWord(self.d, (), "periodic", rotated,
                                 allow_small=True)
        return ParameterWord(self.d, (), "random", seed=self.seed,
                             offset=self.offset + extra, allow_small=True)

    def shift_key(self, s):
        """Canonical memo key for sigma^s alpha (folds periodic tails)."""
        L = len(self.base)
        if self.tail_kind == "periodic" and s > L:
            return L + (s - L) % len(self.pattern)
        return s

    # -- values -------------------------------------------------------------

    def alpha_value(self, depth=60):
        """Enclosure of alpha = sum alpha_j d^-(j+1); exact when periodic."""
        d = self.d
        if self.tail_kind == "periodic":
            L = len(self.base)
            head = sum((rat(b) / d ** (j + 1) for j, b in enumerate(self.base)),
                       rat(0))
            P = len(self.pattern)
            num = sum(p * d ** (P - 1 - i) for i, p in enumerate(self.pattern))
            tail = rat(num, d ** P - 1)
            return Enclosure(head + tail / d ** L)
        head = sum((rat(self.digit(j)) / d ** (j + 1) for j in range(depth)),
                   rat(0))
        # digits past `depth` are in [1, 2]; sum_{j>=depth} d^-(j+1) = d^-depth/(d-1)
        unit = rat(1, d - 1) / d ** depth
        return Enclosure(head + unit, head + 2 * unit)

    def alpha_partial(self, m):
        """alpha^(m) = sum_{j <= m} alpha_j d^-(j+1); m = -1 gives 0."""
        if m < -1:
            raise ValueError("partial index must be >= -1")
        d = self.d
        total = rat(0)
        for j in range(m + 1):
            total += rat(self.digit(j), d ** (j + 1))
        return total

    def beta(self, k=0, kappa=1, depth=60):
        """Enclosure of sum_j alpha_{k+j}^kappa d^-(j+1); exact when periodic."""
        w = self.shift(k) if k else self
        d = self.d
        if w.tail_kind == "periodic":
            L = len(w.base)
            head = sum((rat(b ** kappa) / d ** (j + 1)
                        for j, b in enumerate(w.base)), rat(0))
            P = len(w.pattern)
            num = sum(p ** kappa * d ** (P - 1 - i)
                      for i, p in enumerate(w.pattern))
            return Enclosure(head + rat(num, d ** P - 1) / d ** L)
        head = sum((rat(w.digit(j) ** kappa) / d ** (j + 1)
                    for j in range(depth)), rat(0))
        unit = rat(1, d - 1) / d ** depth
        return Enclosure(head + unit, head + (2 ** kappa) * unit)

    # -- tower heights -------------------------------------------------------

    def tower_height(self, k):
        """h_k: h_0 = 1, h_{k+1} = d h_k + alpha_k."""
        h = 1
        for i in range(k):
            h = self.d * h + self.digit(i)
        return h

    def tower_heights(self, kmax):
        out = [1]
        for i in range(kmax):
            out.append(self.d * out[-1] + self.digit(i))
        return out

    # -- serialization -------------------------------------------------------

    def serialize(self):
        base = "".join(str(b) for b in self.base)
        if self.tail_kind == "periodic":
            tail = "periodic:" + "".join(str(p) for p in self.pattern)
        elif self.offset:
            tail = "random:%d:%d" % (self.seed, self.offset)
        else:
            tail = "random:%d" % self.seed
        return "d=%d;base=%s;tail=%s" % (self.d, base, tail)

    @classmethod
    def parse(cls, text, allow_small=False):
        """Inverse of serialize; also accepts bare tail shorthand.

        Full form:  d=7;base=121;tail=periodic:12
        Shorthand:  periodic:12  or  random:99  (d=7, empty base)
        """
        text = text.strip()
        if "=" not in text:
            text = "d=7;base=;tail=" + text
        parts = dict(p.split("=", 1) for p in text.split(";") if p)
        try:
            d = int(parts["d"])
            base = tuple(int(c) for c in parts.get("base", ""))
            tail = parts["tail"]
        except (KeyError, ValueError) as exc:
            raise ConfigError("cannot parse word %r: %s" % (text, exc))
        if tail.startswith("periodic:"):
            pattern = tuple(int(c) for c in tail[len("periodic:"):])
            return cls(d, base, "periodic", pattern, allow_small=allow_small)
        if tail.startswith("random:"):
            bits = tail[len("random:"):].split(":")
            seed = int(bits[0])
            offset = int(bits[1]) if len(bits) > 1 else 0
            return cls(d, base, "random", seed=seed, offset=offset,
                       allow_small=allow_small)
        raise ConfigError("unknown tail spec %r" % tail)


def balanced_digits(ell, d):
    """Balanced base-d digits of ell, least significant first.

    Digits lie in [-(d-1)/2, (d-1)/2]; the expansion of ell != 0 ends
    with a nonzero digit, and the top digit of ell > 0 is positive.
    """
    if d % 2 == 0:
        raise ValueError("balanced digits need odd d")
    half = (d - 1) // 2
    out = []
    n = int(ell)
    while n != 0:
        r = n % d
        if r > half:
            r -= d
        out.append(r)
        n = (n - r) // d
    return out


def balanced_weight(ell, d):
    """Number of nonzero balanced digits of ell."""
    return sum(1 for a in balanced_digits(ell, d) if a != 0)


def balanced_reconstruct(digits, d):
    total = 0
    for a in reversed(digits):
        total = total * d + a
    return total


def q_addend(digits, d, j):
    """sum_{i > j} a_i d^i, plus a_j d^j when a_j < 0.

    Always a nonnegative multiple of d^j (the top nonzero balanced digit
    is positive); used as the odometer step count in front of the j-th
    scan read of the return-time closed form.
    """
    total = 0
    for i in range(j + 1, len(digits)):
        total += digits[i] * d ** i
    if j < len(digits) and digits[j] < 0:
        total += digits[j] * d ** j
    return total


def cantor_measure_of_interval(lo, hi, d, depth=40):
    """Enclosure of the digit-distribution mass of the value interval [lo, hi].

    The measure is the law of sum w_j d^-(j+1) with w_j independent
    uniform on {1, 2}.  A depth-q digit cylinder maps onto the value
    interval [b + u, b + 2u] with u = d^-q / (d - 1), so the mass is
    computed by recursive cylinder counting; cylinders still straddling
    an endpoint at `depth` contribute to the upper bound only.
    """
    lo = rat(lo)
    hi = rat(hi)
    if hi < lo:
        return Enclosure(rat(0))
    lower = [rat(0)]
    upper = [rat(0)]

    def visit(base, q, mass):
        u = rat(1, d - 1) / d ** q
        left, right = base + u, base + 2 * u
        if right < lo or left > hi:
            return
        if lo <= left and right <= hi:
            lower[0] += mass
            upper[0] += mass
            return
        if q == depth:
            upper[0] += mass
            return
        for w in ALLOWED_DIGITS:
            visit(base + rat(w) / d ** (q + 1), q + 1, mass / 2)

    visit(rat(0), 0, rat(1))
    return Enclosure(lower[0], upper[0])


def sample_word(d, seed, allow_small=False):
    """Random-tail word with no explicit prefix."""
    return ParameterWord(d, (), "random", seed=seed, allow_small=allow_small)
