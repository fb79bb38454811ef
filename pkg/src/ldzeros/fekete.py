"""Fekete polynomials F_d(t) = sum_{n=1}^{d-1} chi_d(n) t^n, their real zeros
on (0, 1), and the two Mellin-type identities tying them to L and L':

    L(s) Gamma(s)                 = int_0^inf v^{s-1} F_d(e^-v) / (1 - e^{-dv}) dv
    Gamma(s) (L'(s) + L(s) psi(s)) = int_0^inf v^{s-1} log(v) F_d(e^-v) / (1 - e^{-dv}) dv

(the first by expanding F_d(u)/(1-u^d) into the full Dirichlet series, the
second by differentiating in s). Both sides are computed by independent
machinery: the left by the L-evaluators, the right by double-exponential
quadrature after the u = e^-v substitution.

Coefficients are streamed from the cached character table; no coefficient
arrays are materialized beyond the table itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .characters import char_table
from .errors import AccuracyError, DomainError, ResourceError
from .lfunc import LEngine
from .specialfn import digamma, gamma

MELLIN_D_CAP = 2000


def fekete_eval(d: int, t: float) -> tuple[float, float]:
    """F_d(t) with a certified error bound; returns (value, err_bound).

    Powers come from exp(n log t) (per-term relative error below 45 ulp for
    any representable t^n, independent of d, which matters because the real
    zeros cluster near t = 1), and the sum is exactly rounded (math.fsum).
    """
    if not 0.0 <= t < 1.0:
        raise DomainError(f"fekete_eval needs t in [0, 1), got {t}")
    if t == 0.0:
        return 0.0, 0.0
    chi = char_table(d).astype(np.float64)
    n = np.arange(1, d, dtype=np.float64)
    with np.errstate(under="ignore"):
        powers = np.exp(n * math.log(t))
    terms = chi[1:] * powers
    value = math.fsum(terms)
    eps = float(np.finfo(float).eps)
    err = 45.0 * eps * float(np.sum(powers)) + 2.0 * eps * abs(value)
    return value, err


def fekete_eval_reversed(d: int, t: float) -> float:
    """Same sum accumulated from the top power down (order-robustness check)."""
    chi = char_table(d)
    s = 0.0
    c = 0.0
    for n in range(d - 1, 0, -1):
        v = float(chi[n % d]) * t**n
        y = v - c
        tt = s + y
        c = (tt - s) - y
        s = tt
    return s


def fekete_grid(d: int, ts: np.ndarray, block: int = 256) -> np.ndarray:
    """Vectorized evaluation over a grid (scan path; certificates re-use
    fekete_eval).

    Blocked Horner: F_d(t) = sum_b C_b(t) (t^B)^b with C_b a degree-(B-1)
    polynomial chunk, so the inner work is one (n_blocks x B) @ (B x grid)
    product instead of a length-d coefficient loop.
    """
    ts = np.asarray(ts, dtype=np.float64)
    coeffs = char_table(d).astype(np.float64)  # index = exponent, coeffs[0] = 0
    n_blocks = (d + block - 1) // block
    padded = np.zeros(n_blocks * block, dtype=np.float64)
    padded[:d] = coeffs
    chunk_mat = padded.reshape(n_blocks, block)
    powers = np.empty((block, ts.size), dtype=np.float64)
    powers[0] = 1.0
    for j in range(1, block):
        powers[j] = powers[j - 1] * ts
    chunk_vals = chunk_mat @ powers          # (n_blocks, grid)
    t_block = powers[block - 1] * ts         # ts^block
    out = np.zeros(ts.shape, dtype=np.float64)
    for b in range(n_blocks - 1, -1, -1):
        out = out * t_block + chunk_vals[b]
    return out


def zero_scan_grid(d: int, n_points: int) -> np.ndarray:
    """Scan grid on (0, 1): half uniform, half geometrically accumulating at 1.

    The geometric part stops a safe distance before 1: inside ~100 d ulp of
    the endpoint F_d is dominated by its forced zero at t = 1 and double
    precision cannot certify signs (genuine interior zeros live no deeper
    than 1 - O(1/d) anyway).
    """
    delta_min = max(1e-12, 100.0 * d * float(np.finfo(float).eps))
    n_uniform = n_points // 2
    n_geom = n_points - n_uniform
    uni = np.linspace(1.0 / (n_uniform + 1), 1.0 - 1.0 / (n_uniform + 1), n_uniform)
    geom = 1.0 - np.logspace(math.log10(0.5), math.log10(delta_min), n_geom)
    return np.unique(np.concatenate([uni, geom]))


@dataclass
class FeketeZeroReport:
    d: int
    count: int
    zeros: list[tuple[float, float]] = field(default_factory=list)  # (location, half_width)
    suspects: list[dict] = field(default_factory=list)
    grid_points: int = 0


def fekete_real_zeros(d: int, grid_points: int | None = None,
                      refine_tol: float = 1e-12) -> FeketeZeroReport:
    """Certified sign-change count of F_d on (0, 1) (a lower bound; suspects
    flagged). Grid refinement can only increase the certified count."""
    if grid_points is None:
        grid_points = min(16 * d, 1 << 17)
    ts = zero_scan_grid(d, grid_points)
    vals = fekete_grid(d, ts)
    report = FeketeZeroReport(d=d, count=0, grid_points=len(ts))
    sign = np.sign(vals)
    flips = np.nonzero((sign[:-1] * sign[1:]) < 0)[0]
    for i in flips:
        lo, hi = float(ts[i]), float(ts[i + 1])
        flo = float(fekete_grid(d, np.array([lo]))[0])
        fhi = float(fekete_grid(d, np.array([hi]))[0])
        if flo == 0.0 or fhi == 0.0 or (flo > 0) == (fhi > 0):
            report.suspects.append({"interval": (lo, hi), "reason": "grid/eval sign mismatch"})
            continue
        while hi - lo > refine_tol * max(1.0, lo):
            mid = 0.5 * (lo + hi)
            fm = float(fekete_grid(d, np.array([mid]))[0])
            if fm == 0.0:
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi, fhi = mid, fm
        # certify on the exactly-rounded path; widen the bracket when the
        # endpoints sit too deep inside the zero's neighborhood to clear 3 err
        certified = False
        mid = 0.5 * (lo + hi)
        width = max(hi - lo, 1e-15 * max(1.0, mid))
        for _ in range(40):
            a, b = mid - width / 2, mid + width / 2
            if a <= 0.0 or b >= 1.0:
                break
            va, ea = fekete_eval(d, a)
            vb, eb = fekete_eval(d, b)
            if va * vb < 0 and abs(va) > 3 * ea and abs(vb) > 3 * eb:
                report.zeros.append((mid, width / 2))
                certified = True
                break
            if va * vb > 0 and min(abs(va), abs(vb)) > 3 * max(ea, eb):
                break  # widened past the zero pair; give up on this cell
            width *= 2.0
        if not certified:
            report.suspects.append({"interval": (lo, hi), "reason": "endpoint margin too thin"})
    # grid cells whose values dip under the local error scale without flipping
    errs = 45.0 * np.finfo(float).eps * np.minimum(ts / (1.0 - ts), float(d))
    dips = np.nonzero(np.abs(vals) < 3 * errs)[0]
    for i in dips:
        if not any(abs(ts[i] - z) <= w * 4 + 1e-10 for z, w in report.zeros):
            report.suspects.append({"at": float(ts[i]), "reason": "value under error scale"})
    report.count = len(report.zeros)
    return report


def find_zero_bearing(family, grid_points: int = 2048, limit: int | None = None):
    """First family member whose Fekete polynomial has a certified zero in (0,1)."""
    members = family.members if limit is None else family.members[:limit]
    for f in members:
        ts = zero_scan_grid(f.d, grid_points)
        vals = fekete_grid(f.d, ts)
        sign = np.sign(vals)
        if np.any((sign[:-1] * sign[1:]) < 0):
            report = fekete_real_zeros(f.d, grid_points=4 * grid_points)
            if report.count >= 1:
                return f.d, report
    return None, None


# ---------------------------------------------------------------------------
# Mellin identities (double-exponential quadrature)
# ---------------------------------------------------------------------------

def _exp_sinh_nodes(h: float, w_max: float) -> tuple[np.ndarray, np.ndarray]:
    w = np.arange(-w_max, w_max + h / 2, h)
    half_pi_sinh = 0.5 * math.pi * np.sinh(w)
    v = np.exp(half_pi_sinh)
    dv = v * 0.5 * math.pi * np.cosh(w) * h
    keep = (v > 1e-280) & (v < 700.0)
    return v[keep], dv[keep]


def _mellin_rhs(d: int, s: float, with_log: bool, h: float) -> float:
    v, dv = _exp_sinh_nodes(h, 4.2)
    chi = char_table(d).astype(np.float64)
    u = np.exp(-v)
    # F_d(e^-v) by Horner over nodes
    fd = np.polynomial.polynomial.polyval(u, chi)
    with np.errstate(over="ignore"):
        denom = -np.expm1(-d * v)
    integrand = v ** (s - 1.0) * fd / denom
    if with_log:
        integrand = integrand * np.log(v)
    return float(np.sum(integrand * dv))


@dataclass(frozen=True)
class MellinReport:
    d: int
    s: float
    lhs_first: float
    rhs_first: float
    residual_first: float
    lhs_second: float
    rhs_second: float
    residual_second: float


def mellin_identity_check(d: int, s: float, engine: LEngine | None = None) -> MellinReport:
    """Relative residuals of both identities at real s in (1/2, 1]."""
    if not 0.5 < s <= 1.0:
        raise DomainError(f"identity check expects s in (1/2, 1], got {s}")
    if d > MELLIN_D_CAP:
        raise ResourceError(f"quadrature cost grows with d; {d} > cap {MELLIN_D_CAP}")
    if engine is None:
        engine = LEngine(d)
    lval, _ = engine.l_value(s)
    lprime, _ = engine.l_prime(s)
    gam = complex(gamma(complex(s))).real
    psi = complex(digamma(complex(s))).real
    lhs1 = lval.real * gam
    lhs2 = gam * (lprime + lval.real * psi)
    rhs1 = dict()
    rhs2 = dict()
    for h in (0.08, 0.04):
        rhs1[h] = _mellin_rhs(d, s, with_log=False, h=h)
        rhs2[h] = _mellin_rhs(d, s, with_log=True, h=h)
    if abs(rhs1[0.04] - rhs1[0.08]) > 1e-8 * (1 + abs(rhs1[0.04])):
        raise AccuracyError(
            f"first-identity quadrature unstable: {rhs1[0.08]} vs {rhs1[0.04]}")
    if abs(rhs2[0.04] - rhs2[0.08]) > 1e-7 * (1 + abs(rhs2[0.04])):
        raise AccuracyError(
            f"second-identity quadrature unstable: {rhs2[0.08]} vs {rhs2[0.04]}")
    r1 = abs(lhs1 - rhs1[0.04]) / max(abs(lhs1), 1e-300)
    r2 = abs(lhs2 - rhs2[0.04]) / max(abs(lhs2), 1e-300)
    return MellinReport(d=d, s=s, lhs_first=lhs1, rhs_first=rhs1[0.04], residual_first=r1,
                        lhs_second=lhs2, rhs_second=rhs2[0.04], residual_second=r2)
