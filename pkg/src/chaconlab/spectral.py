"""Sequential perturbed averaging operators on cylinder functions.

The return-time cocycle splits over digit levels: level j contributes a
deterministic drift plus an integer-valued read of the spacer scan at a
shifted, translated point.  Stage j of the operator family reweights
the plain d-to-1 averaging by e^(z * level-j reads); composing stages
0..m-1 against the constant function therefore integrates
e^(z * (return time - drift)) exactly, which is what the local-limit
and moderate-deviation experiments consume.

Functions live on a fixed working depth: values indexed little-endian
by the first N digits, with a tracked defect mass for the cylinders
(one per read and stage) whose scan is not settled within the depth.
Vector arithmetic is float complex with the defect and float slack
carried into every reported error; scalar, high-precision work
(Gaussian densities, tail bounds) uses mpmath at 50 digits.
"""

from __future__ import annotations

import math

import numpy as np
from mpmath import mp
from numba import njit

from .errors import BudgetError, ConfigError, DomainError
from .exceptional import default_config
from .rationals import Enclosure, ilog, rat, rat_str
from .returns import distribution, repunit, summand_variance
from .symbolic import scan_reads
from .words import balanced_digits, balanced_weight

DEFAULT_DEPTH = 8
DEFAULT_MDP_C = 2.0
_HULL_BUF = 1 << 16


def _as_rat(x):
    return x if isinstance(x, type(rat(1))) else rat(x)


# -- oscillation ladder ---------------------------------------------------------

_PERM_CACHE = {}


def _digit_reverse_perm(d, depth):
    """Index permutation reversing digit order, making every cylinder a
    contiguous run so the merge kernels stream memory sequentially."""
    key = (d, depth)
    if key not in _PERM_CACHE:
        size = d ** depth
        idx = np.arange(size, dtype=np.int64)
        rev = np.zeros(size, dtype=np.int64)
        x = idx
        for _ in range(depth):
            rev = rev * d + x % d
            x = x // d
        _PERM_CACHE[key] = rev
    return _PERM_CACHE[key]


@njit(cache=True)
def _ladder_kernel(re, im, d, depth):
    """Per-level sums of cylinder diameters, scaled by d^-level.

    Input is digit-reversed so children sit side by side.  The finest
    merge level takes pairwise diameters of d raw points and carries
    them all; coarser levels keep only each block's convex hull, since
    the diameter of a union is attained on hull vertices.  sums[0] = -1
    flags a hull overflow.
    """
    size = re.shape[0]
    sums = np.zeros(depth + 1)
    if depth < 1:
        return sums
    # finest level: blocks are d raw points, diameter directly
    nb_cur = size // d
    total = 0.0
    for a in range(nb_cur):
        base = a * d
        dia2 = 0.0
        for i in range(d):
            for jj in range(i + 1, d):
                dx = re[base + i] - re[base + jj]
                dy = im[base + i] - im[base + jj]
                dd = dx * dx + dy * dy
                if dd > dia2:
                    dia2 = dd
        total += math.sqrt(dia2)
    sums[depth - 1] = total / d ** (depth - 1)
    pts_re = re
    pts_im = im
    counts = np.full(nb_cur, d, np.int64)
    buf_re = np.empty(_HULL_BUF)
    buf_im = np.empty(_HULL_BUF)
    hidx = np.empty(2 * _HULL_BUF + 1, np.int64)
    for level in range(depth - 2, -1, -1):
        nb_new = nb_cur // d
        offs = np.empty(nb_cur + 1, np.int64)
        offs[0] = 0
        for b in range(nb_cur):
            offs[b + 1] = offs[b] + counts[b]
        new_re = np.empty(offs[nb_cur])
        new_im = np.empty(offs[nb_cur])
        new_counts = np.empty(nb_new, np.int64)
        pos = 0
        total = 0.0
        for a in range(nb_new):
            m = 0
            for t in range(offs[a * d], offs[a * d + d]):
                if m >= _HULL_BUF:
                    sums[0] = -1.0
                    return sums
                buf_re[m] = pts_re[t]
                buf_im[m] = pts_im[t]
                m += 1
            # lexicographic insertion sort, blocks stay small
            for i in range(1, m):
                xr = buf_re[i]
                xi = buf_im[i]
                p = i - 1
                while p >= 0 and (buf_re[p] > xr
                                  or (buf_re[p] == xr and buf_im[p] > xi)):
                    buf_re[p + 1] = buf_re[p]
                    buf_im[p + 1] = buf_im[p]
                    p -= 1
                buf_re[p + 1] = xr
                buf_im[p + 1] = xi
            if m == 1:
                hull = 1
                hidx[0] = 0
            else:
                # monotone chain, strict turns drop collinear points
                kk = 0
                for i in range(m):
                    while kk >= 2:
                        ox = buf_re[hidx[kk - 1]] - buf_re[hidx[kk - 2]]
                        oy = buf_im[hidx[kk - 1]] - buf_im[hidx[kk - 2]]
                        px = buf_re[i] - buf_re[hidx[kk - 2]]
                        py = buf_im[i] - buf_im[hidx[kk - 2]]
                        if ox * py - oy * px > 0.0:
                            break
                        kk -= 1
                    hidx[kk] = i
                    kk += 1
                low = kk + 1
                for i in range(m - 2, -1, -1):
                    while kk >= low:
                        ox = buf_re[hidx[kk - 1]] - buf_re[hidx[kk - 2]]
                        oy = buf_im[hidx[kk - 1]] - buf_im[hidx[kk - 2]]
                        px = buf_re[i] - buf_re[hidx[kk - 2]]
                        py = buf_im[i] - buf_im[hidx[kk - 2]]
                        if ox * py - oy * px > 0.0:
                            break
                        kk -= 1
                    hidx[kk] = i
                    kk += 1
                hull = kk - 1
                if hull < 1:
                    hull = 1
            dia2 = 0.0
            for i in range(hull):
                for jj in range(i + 1, hull):
                    dx = buf_re[hidx[i]] - buf_re[hidx[jj]]
                    dy = buf_im[hidx[i]] - buf_im[hidx[jj]]
                    dd = dx * dx + dy * dy
                    if dd > dia2:
                        dia2 = dd
            total += math.sqrt(dia2)
            new_counts[a] = hull
            for i in range(hull):
                new_re[pos] = buf_re[hidx[i]]
                new_im[pos] = buf_im[hidx[i]]
                pos += 1
        sums[level] = total / d ** level
        pts_re = new_re
        pts_im = new_im
        counts = new_counts
        nb_cur = nb_new
    return sums


@njit(cache=True)
def _real_ladder_kernel(vals, d, depth):
    """Real specialization on digit-reversed input: per-block diameter
    is max minus min, merged in place over contiguous children."""
    size = vals.shape[0]
    sums = np.zeros(depth + 1)
    nb = size // d
    lo = np.empty(nb)
    hi = np.empty(nb)
    total = 0.0
    for a in range(nb):
        base = a * d
        bl = vals[base]
        bh = vals[base]
        for w in range(1, d):
            v = vals[base + w]
            if v < bl:
                bl = v
            if v > bh:
                bh = v
        lo[a] = bl
        hi[a] = bh
        total += bh - bl
    if depth >= 1:
        sums[depth - 1] = total / d ** (depth - 1)
    for level in range(depth - 2, -1, -1):
        nb //= d
        total = 0.0
        for a in range(nb):
            base = a * d
            bl = lo[base]
            bh = hi[base]
            for w in range(1, d):
                if lo[base + w] < bl:
                    bl = lo[base + w]
                if hi[base + w] > bh:
                    bh = hi[base + w]
            lo[a] = bl
            hi[a] = bh
            total += bh - bl
        sums[level] = total / d ** level
    return sums


def _ladder_dispatch(re_p, im_p, d, depth):
    if im_p is None:
        return _real_ladder_kernel(re_p, d, depth)
    sums = _ladder_kernel(re_p, im_p, d, depth)
    if sums[0] < 0:
        raise BudgetError("oscillation hull exceeded %d points" % _HULL_BUF)
    return sums


def osc_level_sums(values, d, depth):
    """sums[n] = sum over depth-n cylinders of osc(g, cylinder) * d^-n."""
    perm = _digit_reverse_perm(d, depth)
    re = np.ascontiguousarray(values.real[perm], dtype=np.float64)
    im = None
    if np.any(values.imag):
        im = np.ascontiguousarray(values.imag[perm], dtype=np.float64)
    return _ladder_dispatch(re, im, d, depth)


class CylinderFunction:
    """Function constant on depth-N cylinders, little-endian indexed.

    values[i] is the value on the cylinder whose r-th digit is
    (i // d^r) % d.  defect is the mass of cylinders whose value is
    unreliable after truncated-scan operator applications.
    """

    __slots__ = ("d", "depth", "values", "defect", "_sums", "_parts")

    def __init__(self, d, depth, values, defect=0.0):
        self.d = int(d)
        self.depth = int(depth)
        values = np.asarray(values, dtype=np.complex128)
        if values.shape != (self.d ** self.depth,):
            raise ConfigError("values must have length d^depth")
        self.values = values
        self.defect = float(defect)
        self._sums = None
        self._parts = None

    def parts(self):
        """Contiguous real and imaginary components plus a realness flag,
        cached since operator pipelines reuse them across frequencies."""
        if self._parts is None:
            re = np.ascontiguousarray(self.values.real)
            im_nonzero = bool(np.any(self.values.imag))
            im = np.ascontiguousarray(self.values.imag) if im_nonzero \
                else None
            self._parts = (re, im, not im_nonzero)
        return self._parts

    @classmethod
    def ones(cls, d, depth):
        return cls(d, depth, np.ones(d ** depth, dtype=np.complex128))

    @classmethod
    def random_real(cls, d, depth, seed):
        rng = np.random.default_rng(seed)
        return cls(d, depth, rng.uniform(-1.0, 1.0, d ** depth))

    def value_at(self, digits):
        idx = 0
        for r in range(self.depth - 1, -1, -1):
            idx = idx * self.d + digits[r]
        return self.values[idx]

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))

    def integral(self):
        """Mean under the uniform measure, exact up to defect mass."""
        return complex(np.mean(self.values))

    def osc_sums(self):
        if self._sums is None:
            re, im, is_real = self.parts()
            perm = _digit_reverse_perm(self.d, self.depth)
            self._sums = _ladder_dispatch(
                re[perm], None if is_real else im[perm],
                self.d, self.depth)
        return self._sums

    def seminorm(self, delta=0.5):
        delta = float(delta)
        sums = self.osc_sums()
        return max(sums[n] / delta ** n for n in range(self.depth + 1))

    def norm(self, delta=0.5, gamma=0.875):
        return max(self.sup_norm(), float(gamma) * self.seminorm(delta))

    def __repr__(self):
        return "CylinderFunction(d=%d, depth=%d, defect=%.3g)" % (
            self.d, self.depth, self.defect)


# -- stage potentials -----------------------------------------------------------

def _potential_vector(d, depth, reads, wdig):
    """Integer reads of the spacer scan on every depth-level cylinder.

    For each (sign, steps) read the scan looks at the digits of
    (i + steps) mod d^depth for the first non-(d-1) digit; a d-2 digit
    pays the word digit at that level.  Cylinders whose digits are all
    d-1 after the translation stay undecided: value 0, counted as
    defect.
    """
    size = d ** depth
    U = np.zeros(size, dtype=np.int32)
    defect = np.zeros(size, dtype=bool)
    idx = np.arange(size, dtype=np.int64)
    for sign, steps in reads:
        v = (idx + (steps % size)) % size
        contrib = np.zeros(size, dtype=np.int32)
        undecided = np.ones(size, dtype=bool)
        for r in range(depth):
            digit = v % d
            hit = undecided & (digit != d - 1)
            pay = hit & (digit == d - 2)
            contrib[pay] = wdig[r]
            undecided &= ~hit
            v //= d
        defect |= undecided
        U += sign * contrib
    return U, int(defect.sum())


class OperatorSpec:
    """Parameters of the stage-j reweighted averaging operator.

    Holds the word, the index ell whose cocycle supplies the stage
    reads, the tower level k, the active stage j, the complex weight
    exponent z, and the function-space constants.  delta must satisfy
    1/d < delta < 1 - 2/d and delta <= (d-1)/(d+2); a must lie in
    (2/(d(1-delta)-1), 1/delta); gamma is pinned to d(1-delta)/4.
    """

    __slots__ = ("word", "ell", "k", "j", "z", "delta", "a", "gamma",
                 "_stages", "shift_total", "_cache")

    def __init__(self, word, ell, k=0, j=0, z=0j, delta=None, a=1):
        d = word.d
        delta = _as_rat(delta if delta is not None else rat(1, 2))
        a = _as_rat(a)
        if not (rat(1, d) < delta < 1 - rat(2, d)):
            raise ConfigError("delta outside (1/d, 1-2/d)")
        if delta > rat(d - 1, d + 2):
            raise ConfigError("delta above (d-1)/(d+2)")
        if not (rat(2) / (d * (1 - delta) - 1) < a < 1 / delta):
            raise ConfigError("a outside (2/(d(1-delta)-1), 1/delta)")
        if ell < 1:
            raise ConfigError("ell must be >= 1")
        self.word = word
        self.ell = int(ell)
        self.k = int(k)
        self.j = int(j)
        self.z = complex(z)
        self.delta = delta
        self.a = a
        self.gamma = d * (1 - delta) / 4
        stages = {}
        drift = 0
        for lev, sign, steps, dr in scan_reads(self.ell, word, self.k):
            stages.setdefault(lev, []).append((sign, steps))
            drift += dr
        self._stages = {lev: tuple(r) for lev, r in stages.items()}
        self.shift_total = self.ell * word.tower_height(self.k) + drift
        self._cache = {}

    @property
    def stage_count(self):
        return max(self._stages) + 1 if self._stages else 0

    def stage_reads(self, j):
        return self._stages.get(j, ()) if j >= 0 else ()

    def potential(self, j, depth):
        key = (j, depth)
        if key not in self._cache:
            reads = self.stage_reads(j)
            if not reads:
                size = self.word.d ** depth
                self._cache[key] = (np.zeros(size, dtype=np.int32), 0)
            else:
                wdig = [self.word.digit(self.k + j + r) for r in range(depth)]
                self._cache[key] = _potential_vector(
                    self.word.d, depth, reads, wdig)
        return self._cache[key]

    def at(self, j=None, z=None):
        """Variant acting at another stage or weight, sharing caches."""
        other = object.__new__(OperatorSpec)
        for name in ("word", "ell", "k", "delta", "a", "gamma",
                     "_stages", "shift_total", "_cache"):
            setattr(other, name, getattr(self, name))
        other.j = self.j if j is None else int(j)
        other.z = self.z if z is None else complex(z)
        return other

    def stage_mean(self, j, depth):
        """E(stage-j reads) under the uniform measure, defect-exact."""
        U, bad = self.potential(j, depth)
        return float(U.mean()), bad * float(self.word.d) ** -depth

    def __repr__(self):
        return "OperatorSpec(ell=%d, k=%d, j=%d, z=%s)" % (
            self.ell, self.k, self.j, self.z)


@njit(cache=True)
def _apply_kernel(gre, gim, U, tre, tim, vmax, d):
    size = gre.shape[0] // d
    out_re = np.empty(size)
    out_im = np.empty(size)
    for y in range(size):
        ar = 0.0
        ai = 0.0
        base = d * y
        for w in range(d):
            c = base + w
            v = U[c] + vmax
            ar += tre[v] * gre[c] - tim[v] * gim[c]
            ai += tre[v] * gim[c] + tim[v] * gre[c]
        out_re[y] = ar / d
        out_im[y] = ai / d
    return out_re, out_im


@njit(cache=True)
def _apply_kernel_real(gre, U, tre, tim, vmax, d):
    size = gre.shape[0] // d
    out_re = np.empty(size)
    out_im = np.empty(size)
    for y in range(size):
        ar = 0.0
        ai = 0.0
        base = d * y
        for w in range(d):
            c = base + w
            v = U[c] + vmax
            ar += tre[v] * gre[c]
            ai += tim[v] * gre[c]
        out_re[y] = ar / d
        out_im[y] = ai / d
    return out_re, out_im


def apply_operator(spec, g, embed=True):
    """One stage: average over the leading digit with weight e^(z*reads).

    The input depth is consumed by one digit; with embed the result is
    re-tiled at the same depth so pipelines keep a fixed vector size.
    Defect gains one cylinder mass d^-depth per undecided read.
    """
    if g.depth < 1:
        raise DomainError("depth exhausted")
    d = spec.word.d
    U, bad = spec.potential(spec.j, g.depth)
    parts = None
    if spec.z == 0:
        out = g.values.reshape(-1, d).mean(axis=1)
    else:
        vmax = int(np.max(np.abs(U))) if U.size else 0
        table = np.exp(spec.z * np.arange(-vmax, vmax + 1))
        gre, gim, is_real = g.parts()
        if is_real:
            out_re, out_im = _apply_kernel_real(
                gre, U, table.real.copy(), table.imag.copy(), vmax, d)
        else:
            out_re, out_im = _apply_kernel(
                gre, gim, U, table.real.copy(), table.imag.copy(), vmax, d)
        out = out_re + 1j * out_im
        parts = (out_re, out_im, not np.any(out_im))
    defect = g.defect + bad * float(d) ** -g.depth
    if embed:
        return CylinderFunction(d, g.depth, np.tile(out, d), defect)
    result = CylinderFunction(d, g.depth - 1, out, defect)
    result._parts = parts
    return result


def compose(spec, g, j0, count, embed=True):
    """Apply stages j0 .. j0+count-1 in cocycle order (j0 first)."""
    cur = g
    for j in range(j0, j0 + count):
        cur = apply_operator(spec.at(j=j), cur, embed=embed)
    return cur


# -- inequality checks ----------------------------------------------------------

def lasota_yorke_check(spec, g, tol=1e-12):
    """Oscillation contraction of one stage against delta and 2/d."""
    delta = float(spec.delta)
    out = apply_operator(spec, g, embed=False)
    lhs = out.seminorm(delta)
    rhs = delta * g.seminorm(delta) + (2.0 / spec.word.d) * g.sup_norm()
    return lhs, rhs, lhs <= rhs + tol


def composed_lasota_yorke(spec, g, n, tol=1e-12):
    """n-fold version with the geometric head and beta = 2/(d(1-delta))."""
    if n < 1 or n > g.depth:
        raise ConfigError("need 1 <= n <= depth")
    d = spec.word.d
    delta = float(spec.delta)
    out = compose(spec, g, spec.j, n, embed=False)
    lhs = out.seminorm(delta)
    beta = 2.0 / (d * (1.0 - delta))
    rhs = delta ** n * g.seminorm(delta) + beta * g.sup_norm()
    return lhs, rhs, lhs <= rhs + tol


def ly_battery(word, ell, k=0, count=100, freq_count=10, depth=DEFAULT_DEPTH,
               seed=0, tol=1e-12):
    """Random-function sweep of the one-stage oscillation inequality.

    count random real functions at the working depth, freq_count
    frequencies spread over (0, pi], stages cycled over the index's
    digit levels.  Returns the row list and the number of violations.
    """
    spec = OperatorSpec(word, ell, k)
    stages = sorted(spec._stages) or [0]
    rows = []
    violations = 0
    for i in range(count):
        g = CylinderFunction.random_real(word.d, depth, seed + i)
        base_semi = g.seminorm(float(spec.delta))
        base_sup = g.sup_norm()
        rhs_head = float(spec.delta) * base_semi + (2.0 / word.d) * base_sup
        j = stages[i % len(stages)]
        for f in range(1, freq_count + 1):
            t = math.pi * f / freq_count
            out = apply_operator(spec.at(j=j, z=1j * t), g, embed=False)
            lhs = out.seminorm(float(spec.delta))
            ok = lhs <= rhs_head + tol
            if not ok:
                violations += 1
            rows.append((i, j, t, lhs, rhs_head, ok, out.defect))
    return rows, violations


def contraction_check(word, ell, t, k=0, depth=DEFAULT_DEPTH, stages=None):
    """Norm trajectory of the composed stages against the constant 1.

    Records the delta-gamma norm after each stage and fits a geometric
    rate by least squares on the log; at t = 0 the trajectory is
    constant 1, away from 0 the aperiodicity sites push it down.
    """
    spec = OperatorSpec(word, ell, k, z=1j * t)
    m = stages if stages is not None else spec.stage_count
    if m < 1:
        raise ConfigError("need at least one stage")
    delta = float(spec.delta)
    gamma = float(spec.gamma)
    g = CylinderFunction.ones(word.d, depth)
    rows = [(0, 1.0, 0.0)]
    for s in range(m):
        g = apply_operator(spec.at(j=s), g)
        rows.append((s + 1, g.norm(delta, gamma), g.defect))
    logs = [math.log(max(r[1], 1e-300)) for r in rows]
    xs = list(range(len(rows)))
    n = len(rows)
    sx = sum(xs)
    sy = sum(logs)
    sxx = sum(x * x for x in xs)
    sxy = sum(x * y for x, y in zip(xs, logs))
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    return {"rows": rows, "rate": math.exp(slope), "defect": g.defect,
            "t": t, "stages": m}


# -- characteristic function and its consumers ----------------------------------

def characteristic_function(ell, k, word, t, depth=DEFAULT_DEPTH,
                            dist_depth=60):
    """E e^(it * centered return time) by two independent routes.

    Operator route: compose all digit stages against 1, then center by
    the potential means.  Distribution route: exact return law summed
    with mpmath.  The bound column collects truncation, defect, and
    float slack.
    """
    if abs(t) > math.pi + 1e-12:
        raise ConfigError("need |t| <= pi")
    spec = OperatorSpec(word, ell, k, z=1j * t)
    m = spec.stage_count
    g = compose(spec, CylinderFunction.ones(word.d, depth), 0, m)
    mu = 0.0
    mu_err = 0.0
    for j in range(m):
        mean_j, err_j = spec.stage_mean(j, depth)
        mu += mean_j
        mu_err += err_j
    op = g.integral() * complex(math.cos(-t * mu), math.sin(-t * mu))
    dist = distribution(word, k, ell, depth=dist_depth)
    shift = spec.shift_total
    with mp.workdps(50):
        ex = dist.mean()
        center = mp.mpf(ex.lo.numerator) / mp.mpf(ex.lo.denominator)
        acc = mp.mpc(0)
        for n, p in dist.items():
            w = mp.mpf(p.mid.numerator) / mp.mpf(p.mid.denominator)
            acc += w * mp.e ** (1j * mp.mpf(t) * (n - center))
        dist_val = complex(acc)
    trunc = float(dist.truncation_mass)
    bound = trunc + (2.0 + 4.0 * abs(t)) * g.defect \
        + abs(t) * mu_err + 1e-9
    diff = abs(op - dist_val)
    return {"operator": op, "distribution": dist_val, "difference": diff,
            "bound": bound, "defect": g.defect, "stages": m,
            "shift": shift, "t": t}


def llt_report(ell, k, word, depth=60):
    """Exact return law against its Gaussian prediction, over the full
    integer range of the support.

    Indices with digit count at or below the near-rigidity threshold
    max(1, c0 * floor(log_d ell)) are flagged gated: the Gaussian
    comparison is reported but known to be off for them.
    """
    d = word.d
    dist = distribution(word, k, ell, depth=depth)
    ex = dist.mean()
    var = dist.variance()
    if var.lo <= 0:
        raise ConfigError("needs a spread-out return law")
    nn = ilog(ell, d)
    cfg = default_config(d)
    gated = balanced_weight(ell, d) <= max(1, float(cfg.c0) * nn)
    items = dist.items()
    lo_n = items[0][0]
    hi_n = items[-1][0]
    with mp.workdps(50):
        mean = mp.mpf(ex.mid.numerator) / mp.mpf(ex.mid.denominator)
        sigma = mp.sqrt(mp.mpf(var.mid.numerator)
                        / mp.mpf(var.mid.denominator))
        norm = 1 / (sigma * mp.sqrt(2 * mp.pi))
        rows = []
        sup_err = 0.0
        gauss_total = 0.0
        for n in range(lo_n, hi_n + 1):
            mass = dist.mass_at(n)
            exact = float(mass.mid)
            gauss = float(norm * mp.e ** (-(mean - n) ** 2 / (2 * sigma ** 2)))
            err = abs(exact - gauss)
            sup_err = max(sup_err, err)
            gauss_total += gauss
            rows.append((n, exact, gauss, err))
    m = len(balanced_digits(ell, d))
    return {"rows": rows, "sup_error": sup_err,
            "m_times_sup_error": m * sup_err, "m": m,
            "sigma": float(sigma), "mean": float(mean),
            "gauss_total": gauss_total, "gated": gated,
            "truncation": float(dist.truncation_mass), "ell": ell}


def moderate_deviation_check(m_grid, k, word, c_const=DEFAULT_MDP_C,
                             depth=60):
    """Exact tail mass of the centered return law at the m^(3/4) scale.

    Index for slot m is the all-ones digit string of length m.  The
    comparison |n - E| >= m^(3/4) is decided exactly by fourth powers.
    Bound column is 2 * c_const * e^(-m^(1/4)).
    """
    rows = []
    for m in m_grid:
        if m < 1:
            raise ConfigError("need m >= 1")
        ell = repunit(word.d, m)
        dist = distribution(word, k, ell, depth=depth)
        ex = dist.mean().mid
        tail_lo = rat(0)
        tail_hi = rat(0)
        for n, p in dist.items():
            gap4 = (rat(n) - ex) ** 4
            if gap4 >= rat(m) ** 3:
                tail_lo += p.lo
                tail_hi += p.hi
        tail = Enclosure(tail_lo, tail_hi)
        with mp.workdps(50):
            bound = float(2 * c_const * mp.e ** (-mp.mpf(m) ** mp.mpf("0.25")))
        centered = dist.moment(1, center=ex)
        rows.append({"m": m, "ell": ell, "tail": tail,
                     "tail_float": float(tail.mid),
                     "threshold": m ** 0.75, "bound": bound,
                     "passed": float(tail.hi) <= bound,
                     "centered_mean": centered,
                     "truncation": float(dist.truncation_mass)})
    return rows


# -- quasi-eigenvalue surrogates ------------------------------------------------

def quasi_eigenvalue(word, ell, k, z, depth=DEFAULT_DEPTH):
    """Stagewise integral ratios of the composed images of 1.

    lambda is the geometric mean of the ratios; the drift column
    reports the sup distance between successive normalized images, the
    stationarity residual of the power-iteration surrogate.
    """
    spec = OperatorSpec(word, ell, k, z=z)
    m = spec.stage_count
    if m < 1:
        raise ConfigError("index has no digit stages")
    g = CylinderFunction.ones(word.d, depth)
    prev_int = 1.0 + 0j
    prev_norm = g.values
    ratios = []
    drifts = []
    for s in range(m):
        g = apply_operator(spec.at(j=s), g)
        cur = g.integral()
        ratios.append(cur / prev_int)
        scaled = g.values / cur if cur != 0 else g.values
        drifts.append(float(np.max(np.abs(scaled - prev_norm))))
        prev_norm = scaled
        prev_int = cur
    lam = complex(prev_int) ** (1.0 / m)
    return {"lambda": lam, "ratios": ratios, "drifts": drifts,
            "defect": g.defect, "stages": m}


def eigen_derivatives(word, ell, k, depth=DEFAULT_DEPTH, step=1e-4):
    """Central-difference derivatives of z -> E(composed image of 1).

    At z = 0 the first derivative is the total potential mean and the
    second is the second moment of the centered-by-drift return time;
    both finite differences come with a Richardson halving check.
    """
    spec = OperatorSpec(word, ell, k)
    m = spec.stage_count

    def phi(x):
        g = compose(spec.at(z=complex(x)),
                    CylinderFunction.ones(word.d, depth), 0, m)
        return g.integral().real

    d1 = {}
    d2 = {}
    for h in (step, step / 2):
        up, down, mid = phi(h), phi(-h), phi(0.0)
        d1[h] = (up - down) / (2 * h)
        d2[h] = (up - 2 * mid + down) / (h * h)
    mu = 0.0
    for j in range(m):
        mu += spec.stage_mean(j, depth)[0]
    dist = distribution(word, k, ell)
    es2 = dist.moment(2, center=spec.shift_total)
    return {"d1": d1[step], "d1_half": d1[step / 2],
            "d2": d2[step], "d2_half": d2[step / 2],
            "mu": mu, "es2": es2,
            "d1_gap": abs(d1[step / 2] - mu),
            "d2_remainder": d2[step / 2] - float(es2.mid),
            "stages": m}


def spectral_window(word, ell, k=0, depth=DEFAULT_DEPTH, grid=32):
    """Largest frequency where every stage ratio stays within 10% of 1.

    The abstract small-frequency disk is pinned empirically: scan
    t = pi j/grid and keep the last t whose power-iteration ratios all
    have modulus >= 0.9.
    """
    eps0 = 0.0
    table = []
    for jj in range(1, grid + 1):
        t = math.pi * jj / grid
        rep = quasi_eigenvalue(word, ell, k, 1j * t, depth)
        worst = min(abs(r) for r in rep["ratios"])
        table.append((t, worst))
        if worst >= 0.9:
            eps0 = t
    return {"eps0": eps0, "table": table}


def variance_window(word, k, ell, depth=60):
    """Distribution variance against proven floor and ceiling.

    Floor: (1 - 2 sup(alpha)/sqrt((d-1)(d-2))) * sum of single-read
    variances over the nonzero digit levels.  Ceiling: digit count
    times the max single-read variance, inflated by the geometric
    correlation tail 1 + 2 kappa/(d-1).
    """
    d = word.d
    digits = balanced_digits(ell, d)
    if any(abs(a) > 1 for a in digits):
        raise ConfigError("window is stated for single-read digit strings")
    dist = distribution(word, k, ell, depth=depth)
    var = dist.variance()
    levels = [j for j, a in enumerate(digits) if a]
    svs = [summand_variance(word, k, j, depth=depth) for j in levels]
    floor_c = 1 - 4 / math.sqrt((d - 1) * (d - 2))
    lower = floor_c * sum(float(v.lo) for v in svs)
    kappa = 2 * math.sqrt((d - 1) / (d - 2))
    upper = len(levels) * max(float(v.hi) for v in svs) \
        * (1 + 2 * kappa / (d - 1))
    return lower, var, upper


# -- CSV writers ----------------------------------------------------------------

def write_ly_csv(rows, fh):
    fh.write("g_index,stage,t,lhs,rhs,passed,defect_mass\n")
    for i, j, t, lhs, rhs, ok, defect in rows:
        fh.write("%d,%d,%.17g,%.17g,%.17g,%d,%.17g\n"
                 % (i, j, t, lhs, rhs, int(ok), defect))


def write_contraction_csv(report, fh):
    fh.write("stage,norm,defect_mass\n")
    for s, norm, defect in report["rows"]:
        fh.write("%d,%.17g,%.17g\n" % (s, norm, defect))


def write_chf_csv(records, fh):
    fh.write("t,op_re,op_im,dist_re,dist_im,difference,bound,"
             "defect_mass\n")
    for r in records:
        fh.write("%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n"
                 % (r["t"], r["operator"].real, r["operator"].imag,
                    r["distribution"].real, r["distribution"].imag,
                    r["difference"], r["bound"], r["defect"]))


def write_llt_csv(report, fh):
    fh.write("n,exact,gaussian,abs_error,defect_mass\n")
    for n, exact, gauss, err in report["rows"]:
        fh.write("%d,%.17g,%.17g,%.17g,%.17g\n"
                 % (n, exact, gauss, err, report["truncation"]))


def write_mdp_csv(rows, fh):
    fh.write("m,ell,tail,tail_float,threshold,bound,passed,defect_mass\n")
    for r in rows:
        fh.write("%d,%d,%s,%.17g,%.17g,%.17g,%d,%.17g\n"
                 % (r["m"], r["ell"], rat_str(r["tail"].mid),
                    r["tail_float"], r["threshold"], r["bound"],
                    int(r["passed"]), r["truncation"]))
