"""Command line front end: configuration, orchestration, data export.

Every subcommand builds a RunConfig, computes its table, and emits CSV
(default) or JSON.  The CSV starts with a `# run {...}` comment that
embeds the full config and the package version, so any artifact can be
reproduced from its own header.  Execution is sequential and row order
is fixed by construction, so identical configs give identical bytes;
CHACONLAB_THREADS only caps the numeric backend's thread pool.

Exit codes: 0 ok, 2 config error, 3 domain error, 4 budget exceeded,
5 selftest failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys

from . import __version__
from .errors import BudgetError, ConfigError, DomainError
from .rationals import rat, rat_dec, rat_from_str, rat_str
from .words import ParameterWord
from . import chacon, correlation, exceptional, returns, spectral, symbolic

# working arrays are d^depth complex entries; one pipeline may hold a
# few of them, so cap the vector length rather than trusting swap
MAX_VECTOR = 10 ** 8

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_BUDGET = 4
EXIT_SELFTEST = 5


def _thread_cap():
    cap = os.environ.get("CHACONLAB_THREADS")
    if not cap:
        return
    try:
        n = int(cap)
    except ValueError:
        raise ConfigError("CHACONLAB_THREADS must be an integer, got %r"
                          % cap)
    if n < 1:
        raise ConfigError("CHACONLAB_THREADS must be >= 1")
    try:
        import numba
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    except ImportError:
        pass


class RunConfig:
    """Serializable description of one run; reports embed it verbatim."""

    __slots__ = ("subcommand", "values")

    def __init__(self, subcommand, values):
        self.subcommand = subcommand
        self.values = dict(values)

    def get(self, key):
        return self.values[key]

    def as_dict(self):
        out = {"subcommand": self.subcommand, "version": __version__}
        out.update(self.values)
        # the destination is plumbing, not run semantics; dropping it
        # keeps redirected reruns byte-identical
        out.pop("out", None)
        return out

    def to_json(self):
        return json.dumps(self.as_dict(), sort_keys=True,
                          separators=(",", ":"))


def _resolve(args, defaults):
    """Layer the values: coded default, then --config file, then flag."""
    file_vals = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                file_vals = json.load(fh)
        except OSError as exc:
            raise ConfigError("cannot read config file: %s" % exc)
        except ValueError as exc:
            raise ConfigError("config file is not valid JSON: %s" % exc)
        if not isinstance(file_vals, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(file_vals) - set(defaults))
        if unknown:
            raise ConfigError("unknown config keys: %s" % ", ".join(unknown))
    values = {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
        elif key in file_vals:
            values[key] = file_vals[key]
        else:
            values[key] = default
    return values


def _parse_word(spec, d):
    word = ParameterWord.parse(str(spec))
    if word.d != d:
        raise ConfigError("word spec %r has d=%d, run has d=%d"
                          % (spec, word.d, d))
    return word


def _parse_n_grid(text, d):
    """`geometric:a:b` for the half-power ladder, or a comma list."""
    text = str(text).strip()
    if text.startswith("geometric:"):
        bits = text.split(":")
        if len(bits) != 3:
            raise ConfigError("n-grid form is geometric:lo:hi")
        try:
            lo, hi = int(bits[1]), int(bits[2])
        except ValueError:
            raise ConfigError("n-grid bounds must be integers")
        if not (0 < lo <= hi):
            raise ConfigError("need 0 < lo <= hi in the n-grid")
        grid = []
        for j in range(lo, hi + 1):
            v = math.isqrt(d ** j)
            if v * v < d ** j:
                v += 1
            if v not in grid:
                grid.append(v)
        return grid
    try:
        grid = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError("n-grid must be geometric:lo:hi or a comma list")
    if not grid or any(n < 1 for n in grid) or sorted(grid) != grid:
        raise ConfigError("n-grid must be increasing positive integers")
    return grid


def _parse_m_grid(text):
    try:
        grid = [int(p) for p in str(text).split(",") if p.strip()]
    except ValueError:
        raise ConfigError("m-grid must be a comma list of integers")
    if not grid:
        raise ConfigError("m-grid is empty")
    return grid


def _check_vector_budget(d, depth):
    if d ** depth > MAX_VECTOR:
        raise BudgetError("depth %d needs %d-entry working arrays, over "
                          "the %d cap" % (depth, d ** depth, MAX_VECTOR))


def _emit(cfg, csv_text, out_path, fmt):
    if fmt == "json":
        lines = csv_text.strip("\n").split("\n")
        doc = {"version": __version__, "config": cfg.as_dict(),
               "columns": lines[0].split(","),
               "rows": [ln.split(",") for ln in lines[1:]]}
        text = json.dumps(doc, sort_keys=True,
                          separators=(",", ":")) + "\n"
    else:
        text = "# run %s\n%s" % (cfg.to_json(), csv_text)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommand bodies -----------------------------------------------------------

def _run_heights(args):
    vals = _resolve(args, {"d": 7, "alpha": "periodic:1", "k_max": 8,
                           "format": "csv", "out": None})
    cfg = RunConfig("heights", vals)
    word = _parse_word(vals["alpha"], vals["d"])
    if vals["k_max"] < 0:
        raise ConfigError("k-max must be >= 0")
    buf = io.StringIO()
    buf.write("k,height\n")
    for k, h in enumerate(word.tower_heights(vals["k_max"])):
        buf.write("%d,%d\n" % (k, h))
    _emit(cfg, buf.getvalue(), vals["out"], vals["format"])


def _run_orbit(args):
    vals = _resolve(args, {"d": 7, "alpha": "periodic:1", "x": "0",
                           "steps": 20, "format": "csv", "out": None})
    cfg = RunConfig("orbit", vals)
    word = _parse_word(vals["alpha"], vals["d"])
    if vals["steps"] < 0:
        raise ConfigError("steps must be >= 0")
    x = rat_from_str(str(vals["x"]))
    pts = chacon.orbit(x, word, int(vals["steps"]))
    buf = io.StringIO()
    buf.write("step,point,point_decimal\n")
    for s, p in enumerate(pts):
        buf.write("%d,%s,%s\n" % (s, rat_str(p), rat_dec(p)))
    _emit(cfg, buf.getvalue(), vals["out"], vals["format"])


def _run_return_time(args):
    vals = _resolve(args, {"d": 7, "alpha": "periodic:1", "k": 0,
                           "ell": 1, "x": "0", "format": "csv",
                           "out": None})
    cfg = RunConfig("return-time", vals)
    word = _parse_word(vals["alpha"], vals["d"])
    k, ell = int(vals["k"]), int(vals["ell"])
    if ell < 1:
        raise ConfigError("ell must be >= 1")
    x = rat_from_str(str(vals["x"]))
    y = symbolic.to_odometer(x, word, k)
    rows = [
        ("orbit", symbolic.return_time_by_orbit(x, word, k, ell)),
        ("scan", symbolic.return_time_by_scan(y, word, k, ell)),
        ("recursion", symbolic.return_time_by_recursion(y, word, k, ell)),
        ("closed_form", symbolic.return_time_closed_form(y, word, k, ell)),
    ]
    buf = io.StringIO()
    buf.write("method,steps\n")
    for name, steps in rows:
        buf.write("%s,%d\n" % (name, steps))
    _emit(cfg, buf.getvalue(), vals["out"], vals["format"])


def _run_return_dist(args):
    vals = _resolve(args, {"d": 7, "alpha": "periodic:1", "k": 0,
                           "ell": 1, "depth": 60, "format": "csv",
                           "out": None})
    cfg = RunConfig("return-dist", vals)
    word = _parse_word(vals["alpha"], vals["d"])
    if vals["ell"] < 1:
        raise ConfigError("ell must be >= 1")
    dist = returns.distribution(word, int(vals["k"]), int(vals["ell"]),
                                depth=int(vals["depth"]))
    buf = io.StringIO()
    buf.write("n,mass,mass_decimal,truncation\n")
    trunc = rat_str(dist.truncation_mass)
    for n, p in dist.items():
        buf.write("%d,%s,%s,%s\n" % (n, rat_str(p.mid), rat_dec(p.mid),
                                     trunc))
    _emit(cfg, buf.getvalue(), vals["out"], vals["format"])


def _run_correlation(args):
    vals = _resolve(args, {"d": 7, "alpha": "periodic:1", "k": 0,
                           "n_max": 100, "method": "both", "depth": 60,
                           "format": "csv", "out": None})
    cfg = RunConfig("correlation", vals)
    word = _parse_word(vals["alpha"], vals["d"])
    k, n_max = int(vals["k"]), int(vals["n_max"])
    if n_max < 0:
        raise ConfigError("n-max must be >= 0")
    method = vals["method"]
    if method not in ("intervals", "distributions", "both"):
        raise ConfigError("method must be intervals, distributions or both")
    buf = io.StringIO()
    if method == "both":
        by_int = correlation.correlation_by_intervals(k, word, n_max)
        by_dist = correlation.correlation_by_distributions(
            k, word, n_max, depth=int(vals["depth"]))
        buf.write("n,intervals,intervals_decimal,distributions,"
                  "distributions_decimal,agree\n")
        for n in range(n_max + 1):
            iv = by_int.value(n)
            dv = by_dist.value(n)
            agree = int(iv.lo <= dv.mid and dv.mid <= iv.hi)
            buf.write("%d,%s,%s,%s,%s,%d\n"
                      % (n, rat_str(iv.mid), rat_dec(iv.mid),
                         rat_str(dv.mid), rat_dec(dv.mid), agree))
    else:
        if method == "intervals":
            series = correlation.correlation_by_intervals(k, word, n_max)
        else:
            series = correlation.correlation_by_distributions(
                k, word, n_max, depth=int(vals["depth"]))
        buf.write("n,value,value_decimal\n")
        for n in range(n_max + 1):
            v = series.value(n).mid
            buf.write("%d,%s,%s\n" % (n, rat_str(v), rat_dec(v)))
    _emit(cfg, buf.getvalue(), vals["out"], vals["format"])


def _run_shear(args):
    vals = _resolve(args, {"d": 7, "k": 0, "samples": 200, "seed": 42,
                           "n_grid": "geometric:2:12", "depth": 60,
                           "format": "csv", "out": None})
    cfg = RunConfig("shear", vals)
    grid = _parse_n_grid(vals["n_grid"], int(vals["d"]))
    rows = correlation.shear_experiment(
        int(vals["k"]), int(vals["samples"]), int(vals["seed"]),
        n_grid=grid, d=int(vals["d"]), depth=int(vals["depth"]))
    buf = io.StringIO()
    correlation.write_shear_csv(rows, buf)
    _emit(cfg, buf.getvalue(), vals["out"], vals["format"])


def _run_exceptional(args):
    vals = _resolve(args, {"d": 7, "k": 0, "samples": 2000, "seed": 0,
                           "n_grid": "geometric:4:14", "depth": 60,
                           "format": "csv", "out": None})
    cfg = RunConfig("exceptional", vals)
    grid = _parse_n_grid(vals["n_grid"], int(vals["d"]))
    rows = exceptional.measure_estimates(
        int(vals["k"]), grid, int(vals["samples"]), int(vals["seed"]),
        d=int(vals["d"]), depth=int(vals["depth"]))
    buf = io.StringIO()
    exceptional.write_exceptional_csv(rows, buf)
    _emit(cfg, buf.getvalue(), vals["out"], vals["format"])


def _run_operator(args):
    vals = _resolve(args, {"d": 7, "alpha": "periodic:1", "mode": "ly",
                           "k": 0, "ell": 400, "t": "3.141592653589793",
                           "depth": 8, "count": 100, "freq_count": 10,
                           "seed": 0, "m_grid": "1,2,3,4,5,6,7",
                           "format": "csv", "out": None})
    cfg = RunConfig("operator", vals)
    word = _parse_word(vals["alpha"], vals["d"])
    mode = vals["mode"]
    k, ell, depth = int(vals["k"]), int(vals["ell"]), int(vals["depth"])
    buf = io.StringIO()
    if mode == "ly":
        _check_vector_budget(word.d, depth)
        rows, _ = spectral.ly_battery(
            word, ell, k, count=int(vals["count"]),
            freq_count=int(vals["freq_count"]), depth=depth,
            seed=int(vals["seed"]))
        spectral.write_ly_csv(rows, buf)
    elif mode == "contraction":
        _check_vector_budget(word.d, depth)
        report = spectral.contraction_check(
            word, ell, float(vals["t"]), k, depth=depth)
        spectral.write_contraction_csv(report, buf)
    elif mode == "chf":
        _check_vector_budget(word.d, depth)
        records = []
        for part in str(vals["t"]).split(","):
            records.append(spectral.characteristic_function(
                ell, k, word, float(part), depth=depth))
        spectral.write_chf_csv(records, buf)
    elif mode == "llt":
        report = spectral.llt_report(ell, k, word)
        spectral.write_llt_csv(report, buf)
    elif mode == "mdp":
        rows = spectral.moderate_deviation_check(
            _parse_m_grid(vals["m_grid"]), k, word)
        spectral.write_mdp_csv(rows, buf)
    else:
        raise ConfigError("mode must be ly, contraction, chf, llt or mdp")
    _emit(cfg, buf.getvalue(), vals["out"], vals["format"])


def _run_llt(args):
    vals = _resolve(args, {"d": 7, "alpha": "periodic:1", "k": 0,
                           "ell": 2801, "format": "csv", "out": None})
    cfg = RunConfig("llt", vals)
    word = _parse_word(vals["alpha"], vals["d"])
    report = spectral.llt_report(int(vals["ell"]), int(vals["k"]), word)
    buf = io.StringIO()
    spectral.write_llt_csv(report, buf)
    _emit(cfg, buf.getvalue(), vals["out"], vals["format"])


# -- selftest ---------------------------------------------------------------------

def _selftest_checks(quick):
    d = 7
    w1 = ParameterWord(d)
    w21 = ParameterWord(d, pattern=(2, 1))
    pts = 5 if quick else 25
    ell_max = 8 if quick else 20

    def check_conjugacy():
        for word in (w1, w21):
            for k in (0, 1):
                step = rat(1, d ** (k + 3))
                for i in range(1, pts + 1):
                    x = i * step
                    y = symbolic.to_odometer(x, word, k)
                    lhs = symbolic.to_odometer(
                        symbolic.first_return_map(x, word, k), word, k)
                    if lhs != symbolic.odometer_add(y, 1, d):
                        return "conjugacy broke at x=%s k=%d" % (x, k)
        return None

    def check_tower_identity():
        for word in (w1, w21):
            for k in range(3):
                h = word.tower_height(k)
                for i in range(1, pts + 1):
                    x = rat(i, d ** (k + 2))
                    end = chacon.orbit(x, word, h - 1)[-1]
                    if end != x + 1 - rat(1, d ** k):
                        return "tower identity broke at x=%s k=%d" % (x, k)
        return None

    def check_return_routes():
        for word in (w1, w21):
            for k in (0, 1):
                x = rat(1, d ** (k + 2))
                y = symbolic.to_odometer(x, word, k)
                for ell in range(1, ell_max + 1):
                    a = symbolic.return_time_by_orbit(x, word, k, ell)
                    b = symbolic.return_time_by_scan(y, word, k, ell)
                    c = symbolic.return_time_by_recursion(y, word, k, ell)
                    f = symbolic.return_time_closed_form(y, word, k, ell)
                    if not (a == b == c == f):
                        return "routes split at ell=%d k=%d" % (ell, k)
        return None

    def check_kac():
        for word in (w1, w21):
            alpha = word.alpha_value(60)
            for ell in range(1, ell_max + 1):
                mean = returns.distribution(word, 0, ell).mean()
                kac = ell * (1 + alpha.mid)
                if not (mean.lo <= kac <= mean.hi):
                    return "Kac mean off at ell=%d" % ell
        return None

    def check_dual_correlation():
        n_max = 20 if quick else 60
        by_int = correlation.correlation_by_intervals(0, w1, n_max)
        by_dist = correlation.correlation_by_distributions(0, w1, n_max)
        for n in range(n_max + 1):
            iv = by_int.value(n)
            dv = by_dist.value(n)
            if not (iv.lo <= dv.mid <= iv.hi):
                return "correlation routes split at n=%d" % n
        return None

    def check_oscillation():
        spec = spectral.OperatorSpec(w1, returns.repunit(d, 3), 0,
                                     z=1j * math.pi)
        depth = 5 if quick else 6
        for seed in range(3 if quick else 10):
            g = spectral.CylinderFunction.random_real(d, depth, seed)
            lhs, rhs, ok = spectral.lasota_yorke_check(spec, g)
            if not ok:
                return "oscillation bound broke at seed %d" % seed
        return None

    def check_tail_bounds():
        rows = spectral.moderate_deviation_check(range(1, 4), 0, w1)
        for r in rows:
            if not r["passed"]:
                return "tail bound broke at m=%d" % r["m"]
        return None

    return [
        ("odometer-conjugacy", check_conjugacy),
        ("tower-identity", check_tower_identity),
        ("return-routes", check_return_routes),
        ("kac-mean", check_kac),
        ("dual-correlation", check_dual_correlation),
        ("oscillation-bound", check_oscillation),
        ("tail-bounds", check_tail_bounds),
    ]


def _run_selftest(args):
    quick = bool(getattr(args, "quick", False))
    failures = 0
    for name, fn in _selftest_checks(quick):
        detail = fn()
        if detail is None:
            sys.stdout.write("ok   %s\n" % name)
        else:
            failures += 1
            sys.stdout.write("FAIL %s: %s\n" % (name, detail))
    sys.stdout.write("selftest: %d checks, %d failures\n"
                     % (len(_selftest_checks(quick)), failures))
    if failures:
        raise _SelftestFailure()


class _SelftestFailure(Exception):
    pass


# -- statement index ----------------------------------------------------------------

PAPER_MAP = [
    ("tower heights", "words.ParameterWord.tower_heights"),
    ("spacer value of a word", "words.ParameterWord.alpha_value"),
    ("balanced digit expansion", "words.balanced_digits"),
    ("Cantor measure of an interval", "words.cantor_measure_of_interval"),
    ("map action on a point", "chacon.apply_map"),
    ("forward image of an interval set", "chacon.push_forward"),
    ("odometer coordinates", "symbolic.to_odometer"),
    ("induced map on the base", "symbolic.first_return_map"),
    ("spacer-crossing cocycle", "symbolic.epsilon"),
    ("return time by orbit count", "symbolic.return_time_by_orbit"),
    ("return time by scan sum", "symbolic.return_time_by_scan"),
    ("return time by digit recursion", "symbolic.return_time_by_recursion"),
    ("return time closed form", "symbolic.return_time_closed_form"),
    ("return-law recursion", "returns.ReturnContext.distribution"),
    ("Kac mean identity", "returns.ReturnContext.kac_mean"),
    ("support localization window", "returns.localization"),
    ("single-read variance floor", "returns.min_var_constant"),
    ("read covariance decay bound", "returns.covariance_bound"),
    ("distribution variance floor", "returns.variance_floor_holds"),
    ("correlation by interval propagation",
     "correlation.correlation_by_intervals"),
    ("correlation by distribution sums",
     "correlation.correlation_by_distributions"),
    ("fiber-averaged covariance decay", "correlation.shear_experiment"),
    ("resonant spike times", "correlation.resonant_time"),
    ("first exceptional set", "exceptional.in_first_exceptional"),
    ("second exceptional set", "exceptional.in_second_exceptional"),
    ("digit-majority set", "exceptional.in_Mm"),
    ("exceptional measure decay bound", "exceptional.vanish_bound"),
    ("oscillation seminorm", "spectral.CylinderFunction.seminorm"),
    ("weighted averaging operator", "spectral.apply_operator"),
    ("one-step oscillation inequality", "spectral.lasota_yorke_check"),
    ("composed oscillation inequality", "spectral.composed_lasota_yorke"),
    ("high-frequency contraction", "spectral.contraction_check"),
    ("characteristic function, two routes",
     "spectral.characteristic_function"),
    ("Gaussian local approximation", "spectral.llt_report"),
    ("moderate-deviation tail bound", "spectral.moderate_deviation_check"),
    ("eigenvalue derivative data", "spectral.eigen_derivatives"),
]


def _run_paper_map(args):
    width = max(len(name) for name, _ in PAPER_MAP)
    for name, target in PAPER_MAP:
        sys.stdout.write("%-*s  chaconlab.%s\n" % (width, name, target))


# -- argument parsing ----------------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="JSON file with option values; "
                   "explicit flags win")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--d", type=int)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="chacon-lab",
        description="exact experiments on rank-one maps with random "
                    "spacers")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("heights", help="tower heights per level")
    _add_common(p)
    p.add_argument("--alpha")
    p.add_argument("--k-max", dest="k_max", type=int)
    p.set_defaults(fn=_run_heights)

    p = sub.add_parser("orbit", help="exact forward orbit of a point")
    _add_common(p)
    p.add_argument("--alpha")
    p.add_argument("--x")
    p.add_argument("--steps", type=int)
    p.set_defaults(fn=_run_orbit)

    p = sub.add_parser("return-time",
                       help="ell-th return time by all four routes")
    _add_common(p)
    p.add_argument("--alpha")
    p.add_argument("--k", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--x")
    p.set_defaults(fn=_run_return_time)

    p = sub.add_parser("return-dist", help="exact return-time law")
    _add_common(p)
    p.add_argument("--alpha")
    p.add_argument("--k", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--depth", type=int)
    p.set_defaults(fn=_run_return_dist)

    p = sub.add_parser("correlation",
                       help="self-correlations by one or both routes")
    _add_common(p)
    p.add_argument("--alpha")
    p.add_argument("--k", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--method", choices=("intervals", "distributions",
                                        "both"))
    p.add_argument("--depth", type=int)
    p.set_defaults(fn=_run_correlation)

    p = sub.add_parser("shear",
                       help="fiber-averaged covariance decay table")
    _add_common(p)
    p.add_argument("--k", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-grid", dest="n_grid")
    p.add_argument("--depth", type=int)
    p.set_defaults(fn=_run_shear)

    p = sub.add_parser("exceptional",
                       help="exceptional-set measure estimates")
    _add_common(p)
    p.add_argument("--k", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-grid", dest="n_grid")
    p.add_argument("--depth", type=int)
    p.set_defaults(fn=_run_exceptional)

    p = sub.add_parser("operator",
                       help="transfer-operator inequality and limit "
                            "theorem checks")
    _add_common(p)
    p.add_argument("--mode", choices=("ly", "contraction", "chf", "llt",
                                      "mdp"))
    p.add_argument("--alpha")
    p.add_argument("--k", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--t")
    p.add_argument("--depth", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--freq-count", dest="freq_count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--m-grid", dest="m_grid")
    p.set_defaults(fn=_run_operator)

    p = sub.add_parser("llt", help="exact law against its Gaussian")
    _add_common(p)
    p.add_argument("--alpha")
    p.add_argument("--k", type=int)
    p.add_argument("--ell", type=int)
    p.set_defaults(fn=_run_llt)

    p = sub.add_parser("selftest", help="run the invariant suite")
    p.add_argument("--quick", action="store_true",
                   help="smaller point counts")
    p.set_defaults(fn=_run_selftest)

    p = sub.add_parser("paper-map",
                       help="statement-to-code index")
    p.set_defaults(fn=_run_paper_map)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _thread_cap()
        args.fn(args)
    except ConfigError as exc:
        sys.stderr.write("config error: %s\n" % exc)
        return EXIT_CONFIG
    except DomainError as exc:
        sys.stderr.write("domain error: %s\n" % exc)
        return EXIT_DOMAIN
    except BudgetError as exc:
        sys.stderr.write("budget exceeded: %s\n" % exc)
        return EXIT_BUDGET
    except _SelftestFailure:
        return EXIT_SELFTEST
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
