import math

import numpy as np
import pytest

from ldzeros.errors import DomainError, ResourceError
from ldzeros.lfunc import LEngine
from ldzeros.selberg import (
    approx_check,
    dirichlet_poly_a,
    lambda_y_d,
    poly_tail_bound_abs_convergent,
    sigma_y_d,
    weight,
)
from ldzeros.zeros import make_region_scanner


# ---------------------------------------------------------------------------
# weight
# ---------------------------------------------------------------------------

def test_weight_branch_values():
    for y in (10.0, 100.0, 1e4):
        assert weight(y, 1) == 1.0
        assert weight(y, y) == pytest.approx(1.0, abs=1e-12)
        assert weight(y, y * y) == pytest.approx(0.5, abs=1e-12)
        assert weight(y, y**1.5) == pytest.approx(0.875, abs=1e-12)
        assert weight(y, y**3) == pytest.approx(0.0, abs=1e-12)
        assert weight(y, y**3 * 1.5) == 0.0


def test_weight_continuity_at_breakpoints():
    for y in (10.0, 100.0, 1e4):
        logy = math.log(y)
        # left/right branch formulas evaluated at the breakpoints directly
        at_y_left = 1.0
        at_y_right = ((2 * logy) ** 2 - 2 * logy**2) / (2 * logy**2)
        assert abs(at_y_left - at_y_right) <= 1e-12
        at_y2_mid = (logy**2 - 0.0) / (2 * logy**2)
        at_y2_top = logy**2 / (2 * logy**2)
        assert abs(at_y2_mid - at_y2_top) <= 1e-12
        assert abs(weight(y, y**3 * (1 - 1e-12))) <= 1e-10


def test_weight_in_unit_interval_and_monotone():
    y = 50.0
    n = np.unique(np.round(np.logspace(0.0, 3 * math.log10(y) + 0.2, 400)))
    w = weight(y, n)
    assert np.all((0.0 <= w) & (w <= 1.0 + 1e-15))
    tail = w[n >= y]
    assert np.all(np.diff(tail) <= 1e-12)


def test_weight_domain():
    with pytest.raises(DomainError):
        weight(5.0, 3)


# ---------------------------------------------------------------------------
# weighted coefficients and the polynomial
# ---------------------------------------------------------------------------

def test_lambda_y_d_values():
    assert lambda_y_d(8, 10.0, 6) == 0.0
    assert lambda_y_d(8, 10.0, 3) == pytest.approx(-math.log(3.0), rel=1e-14)
    assert lambda_y_d(8, 10.0, 2) == 0.0  # chi_8(2) = 0
    assert lambda_y_d(8, 10.0, 9) == pytest.approx(math.log(3.0), rel=1e-13)  # chi_8(9) = 1


def test_poly_real_for_real_s_and_conjugation():
    v = dirichlet_poly_a(8, 20.0, 0.8 + 0.0j)
    assert abs(v.imag) < 1e-12
    a = dirichlet_poly_a(8, 20.0, 0.8 + 0.3j)
    b = dirichlet_poly_a(8, 20.0, 0.8 - 0.3j)
    assert a == b.conjugate()


def test_poly_matches_log_deriv_at_2():
    y = 100.0
    eng = LEngine(8)
    ld, _ = eng.log_deriv(2.0)
    poly = dirichlet_poly_a(8, y, 2.0)
    assert abs(ld.real - poly.real) <= poly_tail_bound_abs_convergent(y, 2.0)


def test_poly_brute_force_small():
    # direct sum over n <= y^3 with per-n kronecker and weight
    from ldzeros.characters import kronecker
    from ldzeros.primes import von_mangoldt

    y, d, s = 12.0, 104, 1.1
    brute = sum(
        von_mangoldt(n) * kronecker(d, n) * weight(y, n) * n**-s
        for n in range(1, int(y**3) + 1)
    )
    assert dirichlet_poly_a(d, y, s).real == pytest.approx(brute, rel=1e-12)


def test_poly_budget_enforced():
    with pytest.raises(ResourceError):
        dirichlet_poly_a(8, 10.0**3.1, 1.0)


# ---------------------------------------------------------------------------
# sigma_y_d
# ---------------------------------------------------------------------------

def test_sigma_small_y_vacuous_window():
    # 2/log y > 1/2 for y = 10: no zero can intrude; no scan required
    res = sigma_y_d(8, 10.0, 0.0, zero_scanner=None)
    assert res.attained_by_default
    assert res.value == pytest.approx(0.5 + 4.0 / math.log(10.0))
    assert res.scan is None


def test_sigma_default_with_scan():
    eng = LEngine(8, t_cap=12.0)
    scanner = make_region_scanner(eng, scan_height_cap=8.0)
    res = sigma_y_d(8, 100.0, 0.0, scanner)
    assert res.attained_by_default
    assert res.value == pytest.approx(0.5 + 4.0 / math.log(100.0))
    assert res.scan is not None and res.scan.count == 0
    assert res.scan.clipped  # requested window height is astronomically tall


def test_sigma_floor_invariant():
    eng = LEngine(104, t_cap=12.0)
    scanner = make_region_scanner(eng, scan_height_cap=8.0)
    for y in (40.0, 400.0):
        res = sigma_y_d(104, y, 0.0, scanner)
        assert res.value >= 0.5 + 4.0 / math.log(y) - 1e-15


def test_sigma_membership_fraction_small_family():
    from ldzeros.characters import enumerate_family

    fam = enumerate_family(200.0)
    y = 100.0
    ok = 0
    for f in fam.members:
        eng = LEngine(f.d, t_cap=12.0)
        scanner = make_region_scanner(eng, scan_height_cap=6.0)
        if sigma_y_d(f.d, y, 0.0, scanner).attained_by_default:
            ok += 1
    assert ok == len(fam.members)


# ---------------------------------------------------------------------------
# approximation check
# ---------------------------------------------------------------------------

def test_approx_check_deep_convergence():
    eng = LEngine(8)
    y = 100.0
    sig = sigma_y_d(8, y, 0.0, make_region_scanner(eng, scan_height_cap=6.0))
    rep = approx_check(eng, y, 2.0, sig)
    assert rep.abs_error <= poly_tail_bound_abs_convergent(y, 2.0)
    assert math.isfinite(rep.ratio)


def test_approx_check_at_sigma():
    eng = LEngine(8, t_cap=12.0)
    y = 100.0
    sig = sigma_y_d(8, y, 0.0, make_region_scanner(eng, scan_height_cap=6.0))
    rep = approx_check(eng, y, sig.value, sig)
    assert rep.ratio <= 10.0


def test_approx_check_requires_s_above_sigma():
    eng = LEngine(8, t_cap=12.0)
    y = 100.0
    sig = sigma_y_d(8, y, 0.0, make_region_scanner(eng, scan_height_cap=6.0))
    with pytest.raises(DomainError):
        approx_check(eng, y, 0.6, sig)


def test_approx_error_shrinks_with_y_on_average():
    # s must clear sigma_{y,d} = 1/2 + 4/log y for every y tested, which at
    # the polynomial budget means s around 1.3 and y from about 150 up
    from ldzeros.characters import enumerate_family

    fam = enumerate_family(60.0)
    s = 1.30
    errs = {}
    for y in (150.0, 450.0):
        tot = 0.0
        for f in fam.members:
            eng = LEngine(f.d, t_cap=12.0)
            sig = sigma_y_d(f.d, y, 0.0, make_region_scanner(eng, scan_height_cap=6.0))
            rep = approx_check(eng, y, s, sig)
            tot += rep.abs_error
        errs[y] = tot / len(fam.members)
    assert errs[450.0] <= errs[150.0]
