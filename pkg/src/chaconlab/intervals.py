"""Finite unions of half-open intervals with exact rational endpoints."""

from __future__ import annotations

import csv

from .rationals import rat, rat_str


class IntervalSet:
    """Sorted disjoint half-open intervals [lo, hi).

    The canonical form merges touching pieces ([a,b) + [b,c) becomes
    [a,c)), so equality of sets is equality of the pair lists.
    """

    __slots__ = ("pairs",)

    def __init__(self, pairs=(), normalized=False):
        cleaned = [(rat(lo), rat(hi)) for lo, hi in pairs if lo < hi]
        if not normalized:
            cleaned.sort(key=lambda p: p[0])
            merged = []
            for lo, hi in cleaned:
                if merged and lo <= merged[-1][1]:
                    if hi > merged[-1][1]:
                        merged[-1] = (merged[-1][0], hi)
                else:
                    merged.append((lo, hi))
            cleaned = [tuple(p) for p in merged]
        self.pairs = tuple(cleaned)

    @classmethod
    def single(cls, lo, hi):
        return cls([(lo, hi)])

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def __bool__(self):
        return bool(self.pairs)

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self.pairs == other.pairs

    def __hash__(self):
        return hash(self.pairs)

    def __repr__(self):
        inner = ", ".join("[%s, %s)" % (rat_str(a), rat_str(b))
                          for a, b in self.pairs[:4])
        if len(self.pairs) > 4:
            inner += ", ... %d pieces" % len(self.pairs)
        return "IntervalSet(%s)" % inner

    def length(self):
        total = rat(0)
        for lo, hi in self.pairs:
            total += hi - lo
        return total

    def translate(self, t):
        t = rat(t)
        return IntervalSet([(lo + t, hi + t) for lo, hi in self.pairs],
                           normalized=True)

    def intersect(self, other):
        out = []
        a, b = self.pairs, other.pairs
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] <= b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet(out, normalized=True)

    def union(self, other):
        return IntervalSet(self.pairs + other.pairs)

    def intersect_interval(self, lo, hi):
        return self.intersect(IntervalSet([(lo, hi)]))

    def contains_point(self, x):
        for lo, hi in self.pairs:
            if lo <= x < hi:
                return True
            if lo > x:
                break
        return False

    def min(self):
        return self.pairs[0][0]

    def max(self):
        return self.pairs[-1][1]

    def write_csv(self, stream):
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["lo_num", "lo_den", "hi_num", "hi_den"])
        for lo, hi in self.pairs:
            w.writerow([int(lo.numerator), int(lo.denominator),
                        int(hi.numerator), int(hi.denominator)])

    @classmethod
    def read_csv(cls, stream):
        rows = csv.reader(stream)
        header = next(rows)
        assert header == ["lo_num", "lo_den", "hi_num", "hi_den"], header
        pairs = [(rat(int(r[0]), int(r[1])), rat(int(r[2]), int(r[3])))
                 for r in rows if r]
        return cls(pairs)
