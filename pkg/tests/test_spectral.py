import io
import math

import numpy as np
import pytest

from chaconlab import spectral as sp
from chaconlab.errors import BudgetError, ConfigError, DomainError
from chaconlab.rationals import rat
from chaconlab.returns import distribution, repunit
from chaconlab.words import ParameterWord

W1 = ParameterWord(7)
W2 = ParameterWord(7, base=(2,), pattern=(2,))


def brute_level_sums(values, d, depth):
    # depth-n cylinders fix the low n digits, so they are the residue
    # classes mod d^n in index space
    sums = []
    for n in range(depth + 1):
        step = d ** n
        tot = 0.0
        for r in range(step):
            pts = values[r::step]
            tot += float(np.abs(pts[:, None] - pts[None, :]).max())
        sums.append(tot / step)
    return np.array(sums)


@pytest.mark.parametrize("d,depth,cplx", [
    (3, 4, True), (7, 3, True), (2, 7, True), (3, 5, False), (7, 3, False),
])
def test_ladder_matches_bruteforce(d, depth, cplx):
    rng = np.random.default_rng(5)
    v = rng.normal(size=d ** depth) + (1j * rng.normal(size=d ** depth)
                                       if cplx else 0)
    v = v.astype(np.complex128)
    got = sp.osc_level_sums(v, d, depth)
    want = brute_level_sums(v, d, depth)
    assert np.abs(got - want).max() <= 1e-13


def test_real_and_hull_ladders_agree():
    # rotating a real vector to the imaginary axis switches kernels
    # without changing any oscillation
    rng = np.random.default_rng(9)
    v = rng.normal(size=7 ** 5).astype(np.complex128)
    a = sp.osc_level_sums(v, 7, 5)
    b = sp.osc_level_sums(1j * v, 7, 5)
    assert np.abs(a - b).max() == 0.0


def test_ladder_hull_overflow_budget():
    # every point of a circle is a hull vertex, so the coarsest block
    # tries to gather all d^depth points and must refuse
    v = np.exp(2j * np.pi * np.arange(7 ** 6) / 7 ** 6)
    with pytest.raises(BudgetError):
        sp.osc_level_sums(v, 7, 6)


def test_cylinder_function_basics():
    g = sp.CylinderFunction.ones(7, 4)
    assert g.sup_norm() == 1.0
    assert g.integral() == 1.0
    assert g.seminorm() == 0.0
    assert g.norm() == 1.0
    with pytest.raises(ConfigError):
        sp.CylinderFunction(7, 3, np.ones(10))


def test_value_at_little_endian():
    d, depth = 7, 3
    vals = np.arange(d ** depth, dtype=float)
    g = sp.CylinderFunction(d, depth, vals)
    assert g.value_at((2, 0, 0)) == 2
    assert g.value_at((0, 1, 0)) == 7
    assert g.value_at((3, 2, 1)) == 3 + 2 * 7 + 49


def test_norm_is_max_of_sup_and_scaled_seminorm():
    g = sp.CylinderFunction.random_real(7, 4, 11)
    want = max(g.sup_norm(), 0.875 * g.seminorm(0.5))
    assert g.norm(0.5, 0.875) == want


def test_spec_parameter_windows():
    for bad_delta in (rat(1, 10), rat(7, 10), rat(3, 4)):
        with pytest.raises(ConfigError):
            sp.OperatorSpec(W1, 8, delta=bad_delta)
    for bad_a in (rat(1, 5), rat(5, 2)):
        with pytest.raises(ConfigError):
            sp.OperatorSpec(W1, 8, a=bad_a)
    with pytest.raises(ConfigError):
        sp.OperatorSpec(W1, 0)
    spec = sp.OperatorSpec(W1, 8)
    assert spec.gamma == rat(7, 8)


def test_shift_total_and_stage_layout():
    # index 8 = 1 + 1*7 reads once at levels 0 and 1; the level-1 read
    # carries drift 1, so the deterministic shift is 8*h_0 + 1
    spec = sp.OperatorSpec(W1, 8, 0)
    assert spec.shift_total == 9
    assert sorted(spec._stages) == [0, 1]
    assert spec.stage_count == 2
    assert spec.stage_reads(5) == ()
    assert spec.stage_reads(-1) == ()


def test_potential_counts_pinned():
    # for index 1 the single scan pays iff the first non-6 digit is 5;
    # counting those indices below 7^6 gives (7^6 - 1)/6, and exactly
    # one cylinder (all digits 6) stays undecided
    spec = sp.OperatorSpec(W1, 1, 0)
    U, bad = spec.potential(0, 6)
    assert sorted(set(U.tolist())) == [0, 1]
    assert int((U == 1).sum()) == (7 ** 6 - 1) // 6
    assert bad == 1


def test_stage_means_sum_to_kac_gap():
    # total drift plus read means must reproduce the return-time mean
    spec = sp.OperatorSpec(W1, 8, 0)
    mu = sum(spec.stage_mean(j, 8)[0] for j in range(spec.stage_count))
    err = sum(spec.stage_mean(j, 8)[1] for j in range(spec.stage_count))
    kac = 8 * (1 + 1 / 6)
    assert abs(spec.shift_total + mu - kac) <= err + 1e-9


def test_apply_preserves_integral_at_zero_weight():
    spec = sp.OperatorSpec(W1, 8, 0)
    for seed in range(50):
        g = sp.CylinderFunction.random_real(7, 5, seed)
        out = sp.apply_operator(spec, g, embed=False)
        assert abs(out.integral() - g.integral()) <= 1e-13


def test_apply_fixes_constants_at_zero_weight():
    spec = sp.OperatorSpec(W1, 8, 0)
    out = sp.apply_operator(spec, sp.CylinderFunction.ones(7, 5))
    assert out.depth == 5
    assert np.all(out.values == 1.0)


def test_readless_stage_is_plain_averaging():
    spec = sp.OperatorSpec(W1, 8, 0)
    g = sp.CylinderFunction.random_real(7, 6, 3)
    a = sp.apply_operator(spec.at(j=5, z=0.9j), g, embed=False)
    b = sp.apply_operator(spec.at(j=5, z=0j), g, embed=False)
    assert np.abs(a.values - b.values).max() <= 1e-14
    assert a.defect == 0.0


def test_apply_is_sup_contraction():
    spec = sp.OperatorSpec(W1, 8, 0)
    for seed in range(10):
        g = sp.CylinderFunction.random_real(7, 6, 100 + seed)
        out = sp.apply_operator(spec.at(z=1.3j), g, embed=False)
        assert out.sup_norm() <= g.sup_norm() + 1e-12


def test_apply_needs_depth():
    spec = sp.OperatorSpec(W1, 8, 0)
    g = sp.CylinderFunction(7, 0, [2.0])
    with pytest.raises(DomainError):
        sp.apply_operator(spec, g)


def test_oscillation_inequality_on_constants():
    spec = sp.OperatorSpec(W1, 8, 0)
    ones = sp.CylinderFunction.ones(7, 6)
    lhs, rhs, ok = sp.lasota_yorke_check(spec.at(j=5, z=1j * math.pi), ones)
    assert lhs == 0.0 and rhs == pytest.approx(2 / 7) and ok
    lhs, rhs, ok = sp.lasota_yorke_check(spec.at(j=0, z=1j * math.pi), ones)
    assert ok and lhs <= rhs + 1e-12


def test_small_battery_clean_and_deterministic():
    rows1, v1 = sp.ly_battery(W1, repunit(7, 4), count=10, freq_count=3,
                              depth=6, seed=0)
    rows2, v2 = sp.ly_battery(W1, repunit(7, 4), count=10, freq_count=3,
                              depth=6, seed=0)
    assert v1 == v2 == 0
    assert len(rows1) == 30
    b1, b2 = io.StringIO(), io.StringIO()
    sp.write_ly_csv(rows1, b1)
    sp.write_ly_csv(rows2, b2)
    assert b1.getvalue() == b2.getvalue()


def test_composed_inequality_and_bounds():
    spec = sp.OperatorSpec(W1, repunit(7, 4), 0, z=2.1j)
    g = sp.CylinderFunction.random_real(7, 6, 7)
    for n in range(1, 7):
        lhs, rhs, ok = sp.composed_lasota_yorke(spec, g, n)
        assert ok
    for bad in (0, 7):
        with pytest.raises(ConfigError):
            sp.composed_lasota_yorke(spec, g, bad)


def test_contraction_flat_at_zero_frequency():
    rep = sp.contraction_check(W1, repunit(7, 6), 0.0, depth=6)
    assert all(r[1] == 1.0 for r in rep["rows"])
    assert rep["rate"] == pytest.approx(1.0)


def test_contraction_decays_at_pi():
    rep = sp.contraction_check(W1, repunit(7, 8), math.pi, depth=8)
    norms = [r[1] for r in rep["rows"]]
    assert all(b < a for a, b in zip(norms, norms[1:]))
    assert 0 < rep["rate"] < 1
    # log-linear decay: doubling the stage count roughly squares the norm
    assert abs(math.log(norms[8]) - 2 * math.log(norms[4])) <= math.log(2)


def test_characteristic_function_routes_agree():
    for ell in (5, 23):
        rec = sp.characteristic_function(ell, 0, W1, 0.7)
        assert rec["difference"] <= rec["bound"]


def test_characteristic_function_at_zero_and_conjugate():
    rec = sp.characteristic_function(23, 0, W1, 0.0)
    assert rec["operator"] == 1.0 + 0j
    assert abs(rec["distribution"] - 1.0) <= rec["bound"]
    plus = sp.characteristic_function(23, 0, W1, 0.7)
    minus = sp.characteristic_function(23, 0, W1, -0.7)
    assert abs(minus["operator"] - plus["operator"].conjugate()) <= 1e-12
    assert abs(minus["distribution"]
               - plus["distribution"].conjugate()) <= 1e-12


def test_characteristic_function_frequency_domain():
    with pytest.raises(ConfigError):
        sp.characteristic_function(5, 0, W1, 3.5)


def test_llt_report_fields():
    rep = sp.llt_report(repunit(7, 5), 0, W1)
    assert rep["gated"] is False
    assert rep["m"] == 5
    assert rep["m_times_sup_error"] == pytest.approx(5 * rep["sup_error"])
    assert abs(rep["gauss_total"] - 1.0) <= 0.05
    var = distribution(W1, 0, repunit(7, 5)).variance()
    assert rep["sigma"] ** 2 == pytest.approx(float(var.mid), rel=1e-6)


def test_llt_gates_near_rigid_indices():
    # d^m has a single digit, far below the digit-count threshold
    assert sp.llt_report(2401, 0, W1)["gated"] is True


def test_moderate_deviation_rows():
    rows = sp.moderate_deviation_check(range(3, 8), 0, W1)
    for r in rows:
        assert r["passed"]
        assert r["threshold"] == r["m"] ** 0.75
        assert float(r["centered_mean"].lo) <= 0 <= float(r["centered_mean"].hi)
    # exact lattice effect: the tail is NOT monotone in m, the
    # threshold rounding admits a cheaper integer excursion at m=6
    by_m = {r["m"]: r["tail_float"] for r in rows}
    assert by_m[6] > by_m[5]
    assert by_m[7] < by_m[3]


def test_moderate_deviation_trivial_case():
    r = sp.moderate_deviation_check([1], 0, W1)[0]
    assert r["tail_float"] == 0.0
    assert r["passed"]
    assert r["bound"] == pytest.approx(4 * math.exp(-1))
    with pytest.raises(ConfigError):
        sp.moderate_deviation_check([0], 0, W1)


def test_eigen_derivatives_consistency():
    rep = sp.eigen_derivatives(W1, repunit(7, 4), 0, depth=7)
    assert rep["d1_gap"] <= 1e-6
    assert abs(rep["d2_remainder"]) <= 2.0
    assert rep["stages"] == 4


def test_spectral_window_structure():
    rep = sp.spectral_window(W1, repunit(7, 5), depth=6, grid=8)
    assert len(rep["table"]) == 8
    assert rep["eps0"] > 0
    assert all(t <= math.pi + 1e-12 for t, _ in rep["table"])


def test_variance_window_holds_on_repunits():
    for m in range(2, 7):
        lower, var, upper = sp.variance_window(W1, 0, repunit(7, m))
        assert lower <= float(var.mid) <= upper
    with pytest.raises(ConfigError):
        sp.variance_window(W1, 0, 20)


def test_csv_headers_and_determinism():
    spec = sp.OperatorSpec(W1, 8, 0)
    rows, _ = sp.ly_battery(W1, 8, count=2, freq_count=2, depth=5, seed=0)
    buf = io.StringIO()
    sp.write_ly_csv(rows, buf)
    assert buf.getvalue().startswith("g_index,stage,t,lhs,rhs,passed,"
                                     "defect_mass\n")
    rep = sp.contraction_check(W1, 8, 1.0, depth=5)
    buf = io.StringIO()
    sp.write_contraction_csv(rep, buf)
    assert buf.getvalue().startswith("stage,norm,defect_mass\n")
    recs = [sp.characteristic_function(5, 0, W1, 0.3, depth=5)]
    b1, b2 = io.StringIO(), io.StringIO()
    sp.write_chf_csv(recs, b1)
    sp.write_chf_csv(recs, b2)
    assert b1.getvalue() == b2.getvalue()
    assert b1.getvalue().startswith("t,op_re,op_im,dist_re,dist_im,"
                                    "difference,bound,defect_mass\n")
    llt = sp.llt_report(repunit(7, 3), 0, W1)
    buf = io.StringIO()
    sp.write_llt_csv(llt, buf)
    assert buf.getvalue().startswith("n,exact,gaussian,abs_error,"
                                     "defect_mass\n")
    mdp = sp.moderate_deviation_check([2, 3], 0, W1)
    buf = io.StringIO()
    sp.write_mdp_csv(mdp, buf)
    assert buf.getvalue().startswith("m,ell,tail,tail_float,threshold,"
                                     "bound,passed,defect_mass\n")


def test_quasi_eigenvalue_shape():
    rep = sp.quasi_eigenvalue(W1, repunit(7, 3), 0, 0.5j, depth=6)
    assert rep["stages"] == 3
    assert len(rep["ratios"]) == 3
    assert len(rep["drifts"]) == 3
    assert abs(rep["lambda"]) <= 1.0 + 1e-9
