"""Selberg-style weighted Dirichlet polynomials approximating -L'/L.

The smoothing weight is 1 up to y, decays through two logarithmic-square
branches on [y, y^3], and vanishes beyond; the weighted coefficients are
Lambda(n) chi_d(n) w_y(n), supported on prime powers. The abscissa
sigma_{y,d} is 1/2 + 4/log y unless a zero of L intrudes into the window

    { beta > 1/2 + 2/log y,  |gamma - t| <= y^{3(beta - 1/2)} / log y },

in which case it is pushed up by twice the largest intruding beta - 1/2.
Zero-freeness of the window is certified by a rectangle scan (clipped in
height when the window is astronomically tall; the certificate records the
clip). The ordinate t is threaded explicitly and defaults to 0 for
real-axis work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .characters import chi_values
from .errors import DomainError, ResourceError
from .lfunc import LEngine
from .primes import prime_power_table
from .zeros import RegionScan

POLY_BUDGET = 10**8  # largest y^3 the polynomial is allowed to sum over
SIGMA_BETA_TOP = 1.125


def weight(y: float, n) -> np.ndarray | float:
    """The four-branch smoothing weight; 1 on [1, y], 0 beyond y^3."""
    if y < 10.0:
        raise DomainError(f"weight needs y >= 10, got {y}")
    n_arr = np.asarray(n, dtype=np.float64)
    scalar = n_arr.ndim == 0
    n_arr = np.atleast_1d(n_arr)
    if np.any(n_arr < 1):
        raise DomainError("weight needs n >= 1")
    logy = math.log(y)
    out = np.zeros(n_arr.shape, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        logn = np.log(n_arr)
    l3 = 3.0 * logy - logn   # log(y^3 / n)
    l2 = 2.0 * logy - logn   # log(y^2 / n)
    out[n_arr <= y] = 1.0
    mid = (n_arr > y) & (n_arr <= y * y)
    out[mid] = (l3[mid] ** 2 - 2.0 * l2[mid] ** 2) / (2.0 * logy**2)
    top = (n_arr > y * y) & (n_arr <= y**3)
    out[top] = l3[top] ** 2 / (2.0 * logy**2)
    return float(out[0]) if scalar else out


def lambda_y_d(d: int, y: float, n: int) -> float:
    """Lambda(n) chi_d(n) w_y(n); zero off prime powers."""
    from .characters import kronecker
    from .primes import von_mangoldt

    if n < 1:
        raise DomainError("lambda_y_d needs n >= 1")
    lam = von_mangoldt(n)
    if lam == 0.0:
        return 0.0
    return lam * kronecker(d, n) * float(weight(y, n))


@dataclass(frozen=True)
class _WeightedPrimePowers:
    y: float
    pp: np.ndarray
    lam_w: np.ndarray   # Lambda(n) w_y(n)
    log_pp: np.ndarray


_PP_CACHE: dict[int, _WeightedPrimePowers] = {}


def _weighted_prime_powers(y: float) -> _WeightedPrimePowers:
    bound = int(math.floor(y**3))
    if bound > POLY_BUDGET:
        raise ResourceError(f"y^3 = {bound} exceeds the summation budget {POLY_BUDGET}")
    key = (bound)
    got = _PP_CACHE.get(key)
    if got is None or got.y != y:
        pp, lam = prime_power_table(bound)
        w = weight(y, pp.astype(np.float64))
        keep = w > 0.0
        got = _WeightedPrimePowers(y=y, pp=pp[keep], lam_w=lam[keep] * w[keep],
                                   log_pp=np.log(pp[keep].astype(np.float64)))
        _PP_CACHE[key] = got
    return got


def dirichlet_poly_a(d: int, y: float, s: complex) -> complex:
    """A_d(s) = sum over prime powers n <= y^3 of Lambda(n) chi_d(n) w_y(n) n^{-s}."""
    tab = _weighted_prime_powers(y)
    chi = chi_values(d, tab.pp).astype(np.float64)
    s = complex(s)
    if s.imag == 0.0:
        return complex(np.sum(tab.lam_w * chi * np.exp(-s.real * tab.log_pp)))
    return complex(np.sum(tab.lam_w * chi * np.exp(-s * tab.log_pp)))


@dataclass(frozen=True)
class SigmaYD:
    d: int
    y: float
    t: float
    value: float
    attained_by_default: bool
    scan: RegionScan | None  # None when the window is vacuous (beta-range empty)


def sigma_y_d(d: int, y: float, t: float, zero_scanner) -> SigmaYD:
    """Selberg abscissa with a zero-free-window certificate.

    zero_scanner(re_lo, re_hi, t_center, half_height) -> RegionScan certifies
    the bounding box of the window; intruding zeros (scan witnesses that
    actually satisfy the window condition) push the value up.
    """
    if y < 10.0:
        raise DomainError(f"sigma_y_d needs y >= 10, got {y}")
    logy = math.log(y)
    default = 0.5 + 4.0 / logy
    b_lo = 0.5 + 2.0 / logy
    if b_lo >= 1.0:
        # every nontrivial zero has beta < 1; the window is empty
        return SigmaYD(d=d, y=y, t=t, value=default, attained_by_default=True, scan=None)
    half_height = y ** (3.0 * (SIGMA_BETA_TOP - 0.5)) / logy
    scan = zero_scanner(b_lo, SIGMA_BETA_TOP, t, half_height)
    if scan.count == 0:
        return SigmaYD(d=d, y=y, t=t, value=default, attained_by_default=True, scan=scan)
    excess = 2.0 / logy
    intruding = False
    for (a, b, c, dd) in scan.witnesses:
        beta = b  # most generous corner of the localization box
        gamma_gap = min(abs(c - t), abs(dd - t)) if not (c <= t <= dd) else 0.0
        if beta - 0.5 > 2.0 / logy and gamma_gap <= y ** (3.0 * (beta - 0.5)) / logy:
            intruding = True
            excess = max(excess, beta - 0.5)
    return SigmaYD(d=d, y=y, t=t, value=0.5 + 2.0 * excess,
                   attained_by_default=not intruding, scan=scan)


@dataclass(frozen=True)
class ApproxReport:
    d: int
    y: float
    s: float
    sigma: SigmaYD
    log_deriv: float
    poly: float
    envelope: float
    abs_error: float
    ratio: float


def approx_check(engine: LEngine, y: float, s: float, sigma: SigmaYD) -> ApproxReport:
    """Compare -L'/L(s) against the weighted polynomial, with the error
    envelope y^{(1/2 - s)/2} (|A_d(sigma_{y,d})| + log d) and their ratio.

    The envelope's implied constant is not effective; callers assert a
    calibrated multiple, never equality.
    """
    if s < sigma.value - 1e-12:
        raise DomainError(f"approx_check needs s >= sigma_y_d = {sigma.value}, got {s}")
    ld, _ = engine.log_deriv(s)
    poly = dirichlet_poly_a(engine.d, y, s)
    anchor = abs(dirichlet_poly_a(engine.d, y, complex(sigma.value)))
    envelope = y ** ((0.5 - s) / 2.0) * (anchor + math.log(engine.d))
    abs_err = abs(ld.real - poly.real)
    return ApproxReport(d=engine.d, y=y, s=s, sigma=sigma, log_deriv=ld.real,
                        poly=poly.real, envelope=envelope, abs_error=abs_err,
                        ratio=abs_err / envelope if envelope > 0 else math.inf)


def poly_tail_bound_abs_convergent(y: float, s: float) -> float:
    """For Re s >= 2: |Ld(s) - A_d(s)| <= sum_{n > y} Lambda(n)/n^s <= 2.04/y
    plus the weight deficit on [y, y^3], bounded the same way."""
    if s < 2.0:
        raise DomainError("absolute-convergence tail bound needs s >= 2")
    return 2.0 * 1.02 * y ** (1.0 - s) * s / (s - 1.0)
