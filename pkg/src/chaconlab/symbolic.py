"""Odometer model of the induced map and the return-time cocycle.

Rescaling the base column A_k = [0, d^-k) by u_k(x) = d^k x turns the
first-return map of the transformation into the base-d odometer S on
[0, 1): add one to the first digit and carry to the right.  The time
the orbit spends away from A_k between consecutive visits is

    r(y) = h_k + eps_k(y)

where eps_k scans the digits of y for the first one that is not d-1
and pays the spacer digit alpha_{k+r-1} exactly when that digit equals
d-2.  Summing r along the odometer orbit gives the time of the ell-th
return, for which this module offers four independent routes: honest
orbit iteration of the map, the direct scan sum, a divide-by-d
recursion, and a closed form driven by the balanced digits of ell.
"""

from __future__ import annotations

from .chacon import apply_map
from .errors import BudgetError, DomainError
from .rationals import rat, rfloor
from .words import balanced_digits, q_addend

_SCAN_LIMIT = 100000


def point_digit(y, d):
    """First base-d digit of y in [0, 1)."""
    return rfloor(y * d)


def shift_point(y, d, j=1):
    """sigma^j y: drop the first j digits."""
    p = d ** j
    z = y * p
    return z - rfloor(z)


def to_odometer(x, word, k):
    """u_k: rescale a point of A_k to odometer coordinates."""
    y = rat(x) * word.d ** k
    if not (0 <= y < 1):
        raise DomainError("point not in the base column")
    return y


def from_odometer(y, word, k):
    return rat(y) / word.d ** k


def odometer_add(y, steps, d):
    """S^steps(y): base-d addition of `steps` to the digit stream.

    Digits are little-endian (the first digit is least significant).
    Works for any steps >= 0 in one pass; the canonical digit expansion
    of a rational never ends in all (d-1)s, so the carry always lands.
    """
    steps = int(steps)
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if steps == 0:
        return rat(y)
    cur = rat(y)
    prefix = 0          # little-endian value of consumed digits
    power = 1           # d^(number consumed)
    guard = 0
    while True:
        w = rfloor(cur * d)
        cur = cur * d - w
        prefix += w * power
        power *= d
        if prefix + steps < power:
            break
        guard += 1
        if guard > _SCAN_LIMIT:
            raise BudgetError("odometer carry did not land")
    # re-spread prefix + steps over the consumed positions
    new = prefix + steps
    value = rat(0)
    scale = rat(1)
    while power > 1:
        new, w = divmod(new, d)
        scale = scale / d
        value += w * scale
        power //= d
    return value + cur * scale


def epsilon(y, word, m):
    """Scan y for the first digit that is not d-1.

    Returns word digit m+r-1 when that digit (at position r) is d-2,
    else 0.  This is the extra time the orbit spends in the spacers
    on top of the full column height.
    """
    d = word.d
    cur = rat(y)
    r = 1
    while r <= _SCAN_LIMIT:
        w = rfloor(cur * d)
        if w != d - 1:
            return word.digit(m + r - 1) if w == d - 2 else 0
        cur = cur * d - w
        r += 1
    raise BudgetError("digit scan did not terminate")


# -- route 1: the map itself ------------------------------------------------

def first_return_map(x, word, k):
    """One step of the induced map on A_k by honest orbit iteration."""
    target = rat(1, word.d ** k)
    if not (0 <= x < target):
        raise DomainError("point not in the base column")
    cur = apply_map(x, word)
    while cur >= target:
        cur = apply_map(cur, word)
    return cur


def return_time_by_orbit(x, word, k, ell=1):
    """Steps until the ell-th visit of the forward orbit to A_k."""
    target = rat(1, word.d ** k)
    if not (0 <= x < target):
        raise DomainError("point not in the base column")
    steps = 0
    cur = rat(x)
    for _ in range(ell):
        cur = apply_map(cur, word)
        steps += 1
        while cur >= target:
            cur = apply_map(cur, word)
            steps += 1
    return steps


# -- route 2: scan sum along the odometer orbit ------------------------------

def return_time_by_scan(y, word, k, ell=1, h=None):
    """Sum of h + eps_k over the first ell odometer iterates of y."""
    d = word.d
    if h is None:
        h = word.tower_height(k)
    total = 0
    cur = rat(y)
    for _ in range(ell):
        total += h + epsilon(cur, word, k)
        cur = odometer_add(cur, 1, d)
    return total


# -- route 3: divide-by-d recursion ------------------------------------------

def return_time_by_recursion(y, word, k, ell, h=None):
    """Recursive evaluation splitting ell = d*l2 + q and y on its first digit.

    A block of d odometer steps cycles the first digit once: the scan
    pays the level-(k+s) spacer digit exactly once (first digit d-2)
    and defers exactly once (first digit d-1) into a deeper scan that
    the child cocycle absorbs.  The extra q steps read the digits
    w, w+1, ..., w+q-1 directly and decide which child (l2 or l2+1,
    one level deeper) finishes the job.
    """
    d = word.d
    if h is None:
        h = word.tower_height(k)

    def rec(y, ell, s):
        if ell == 0:
            return 0
        if ell == 1:
            return h + epsilon(y, word, k + s)
        l2, q = divmod(ell, d)
        a = word.digit(k + s)
        w = rfloor(y * d)
        sy = y * d - w
        if q == 0:
            return (d - 1) * l2 * h + l2 * a + rec(sy, l2, s + 1)
        lead = (q + (d - 1) * l2) * h + l2 * a
        if w <= d - 2 - q:
            return lead + rec(sy, l2, s + 1)
        if w == d - 1 - q:
            return lead + a + rec(sy, l2, s + 1)
        if w <= d - 2:
            return lead + a - h + rec(sy, l2 + 1, s + 1)
        return lead - h + rec(sy, l2 + 1, s + 1)

    return rec(rat(y), ell, 0)


# -- route 4: closed form from balanced digits --------------------------------

def scan_reads(ell, word, k):
    """The signed scan schedule behind the closed form.

    Decompose ell over its balanced digits a_j and telescope the
    cocycle top-down.  Each nonzero digit contributes a_j * M_j (the
    spacer part of |a_j| copies of the depth-j block sum, M_j being
    the spacer content of one block over the shifted word) plus |a_j|
    signed scans of consecutive depth-j odometer points: scan b reads

        eps at level k+j of  S^(steps + b) sigma^j y,   b < |a_j|,

    with steps = q_j / d^j and q_j = sum_{i>j} a_i d^i, lowered by
    |a_j| d^j when a_j < 0 so the window sits just below the block
    boundary.  The window genuinely has |a_j| reads: any window of
    consecutive first digits can contain both d-2 (a spacer payment)
    and d-1 (a deferred deeper scan), so no single read suffices.

    Returns a list of (level, sign, steps, drift) with one entry per
    read; drift carries a_j * M_j on the first read of each level.
    """
    d = word.d
    digits = balanced_digits(ell, d)
    out = []
    for j, a in enumerate(digits):
        if a == 0:
            continue
        m_j = sum(word.digit(k + i) * d ** (j - i - 1) for i in range(j))
        steps = q_addend(digits, d, j) // d ** j
        sign = 1 if a > 0 else -1
        for b in range(abs(a)):
            out.append((j, sign, steps + b, a * m_j if b == 0 else 0))
    return out


def return_time_closed_form(y, word, k, ell, h=None):
    """ell*h plus the signed depth-j digit scans scheduled by scan_reads."""
    d = word.d
    if h is None:
        h = word.tower_height(k)
    total = ell * h
    y = rat(y)
    cache = {}
    for j, sign, steps, drift in scan_reads(ell, word, k):
        if j not in cache:
            cache[j] = shift_point(y, d, j)
        z = odometer_add(cache[j], steps, d)
        total += drift + sign * epsilon(z, word, k + j)
    return total


def return_time_sequence(x, word, k, count):
    """Per-visit return times for the first `count` returns, by orbit."""
    target = rat(1, word.d ** k)
    if not (0 <= x < target):
        raise DomainError("point not in the base column")
    out = []
    cur = rat(x)
    for _ in range(count):
        steps = 1
        cur = apply_map(cur, word)
        while cur >= target:
            cur = apply_map(cur, word)
            steps += 1
        out.append(steps)
    return out
