"""Certified evaluation of Lambda(s, chi_d), L(s, chi_d), L'(s, chi_d) and
the negated logarithmic derivative -L'/L.

Two evaluation paths, one contract:

* The *precise* path is the smoothed expansion of the completed function for
  an even primitive real character with root number +1,

      Lambda(s) = sum_n chi_d(n) [G(s, n) + G(1-s, n)],
      G(s, n)   = (d/pi)^{s/2} n^{-s} Gamma(s/2, pi n^2 / d),

  truncated at N with pi N^2 / d >= log(1/eps) + 5. Each value carries an
  error estimate (truncation tail plus first-order rounding). Both G-term
  families obey |term| <= (d/pi) n^{-2} e^{-pi n^2/d}, which is what the
  tail bound sums. All arithmetic is complex, so a complex step s + ih
  differentiates the whole pipeline exactly (h = 1e-20).

* The *fast* path integrates t^{s/2} against the theta sum
  omega(t) = sum chi_d(n) exp(-pi n^2 t / d) on [1, infinity); omega is
  independent of s and cached per discriminant, so one evaluation costs a
  few hundred complex exponentials. Contour sweeps and family scans run on
  this path; certificates are re-verified on the precise path. The fast
  path is cross-validated against the precise path at construction.

An independent oracle (Hurwitz zeta by Euler-Maclaurin) lives alongside for
cross-checking; it shares no code with either path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .characters import chi_values
from .errors import ConditioningError, DomainError, NearZeroError, ResourceError
from .specialfn import bernoulli_numbers, gamma, upper_gamma

# Strip the evaluators are tuned for; slightly wider than client-facing
# contracts so that sampling circles for contour work stay legal.
RE_MIN, RE_MAX = -0.30, 2.05
COMPLEX_STEP_H = 1e-20
ROUND_REL = 2e-13          # per-term rounding/backend model for the precise path
L_FLOOR = 1e-12            # conditioning floor for -L'/L
GAMMA_FACTOR_FLOOR = 1e-280


@dataclass
class LValue:
    """One evaluation: s, Lambda(s), L(s), and the absolute error estimate on Lambda."""

    s: complex
    lam: complex
    l: complex
    err_est: float


class LEngine:
    """Configured evaluator for one discriminant.

    Parameters
    ----------
    d : family discriminant (8m), positive
    eps_target : absolute accuracy goal for Lambda on the strip
    t_cap : largest |Im s| this engine will be asked for; sets the fast-path
        quadrature density
    n_trunc : override for the expansion length (must satisfy the tail
        invariant or construction fails)
    """

    def __init__(self, d: int, eps_target: float = 1e-12, t_cap: float = 12.0,
                 n_trunc: int | None = None):
        if d <= 0 or d % 8 != 0:
            raise DomainError(f"engine requires a family discriminant 8m, got {d}")
        self.d = int(d)
        self.eps_target = float(eps_target)
        self.t_cap = float(t_cap)
        need = math.ceil(math.sqrt(d * (math.log(1.0 / eps_target) + 5.0) / math.pi))
        if n_trunc is None:
            n_trunc = need
        if math.pi * n_trunc**2 / d < math.log(1.0 / eps_target) + 5.0 - 1e-9:
            raise ResourceError(
                f"n_trunc={n_trunc} leaves the expansion tail above eps_target; need N >= {need}"
            )
        self.n_trunc = int(n_trunc)
        n = np.arange(1, self.n_trunc + 1, dtype=np.int64)
        self._chi = chi_values(self.d, n).astype(np.float64)
        self._logn = np.log(n.astype(np.float64))
        self._x = math.pi * n.astype(np.float64) ** 2 / self.d
        self._log_d_pi = math.log(self.d / math.pi)
        self._tail = self._tail_bound()
        self._theta = None  # fast-path cache, built lazily
        self.fast_rel_err = None

    # -- precise path -----------------------------------------------------

    def _tail_bound(self) -> float:
        # sum_{n > N} 2 (d/pi) n^-2 e^{-pi n^2/d}, 256 explicit terms plus a
        # geometric remainder (consecutive ratio e^{-pi(2n+1)/d}).
        n = np.arange(self.n_trunc + 1, self.n_trunc + 257, dtype=np.float64)
        terms = 2.0 * (self.d / math.pi) * n**-2 * np.exp(-math.pi * n**2 / self.d)
        ratio = math.exp(-math.pi * (2 * n[-1] + 1) / self.d)
        return float(terms.sum() + terms[-1] * ratio / (1.0 - ratio))

    def _check_strip(self, s: complex) -> None:
        if not (RE_MIN <= s.real <= RE_MAX):
            raise DomainError(f"Re(s)={s.real} outside engine strip [{RE_MIN}, {RE_MAX}]")
        if abs(s.imag) > self.t_cap + 2.0:
            raise DomainError(f"|Im(s)|={abs(s.imag)} beyond engine cap {self.t_cap}")

    def lambda_batch(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Lambda(s) and error estimates for an array of strip points."""
        s = np.asarray(s, dtype=np.complex128).ravel()
        for v in s[:1]:
            self._check_strip(complex(v))
        out = np.empty(s.shape, dtype=np.complex128)
        err = np.empty(s.shape, dtype=np.float64)
        rows = max(1, int(3.0e6 // max(1, self.n_trunc)))
        for i in range(0, s.size, rows):
            sb = s[i: i + rows, None]
            g1 = upper_gamma(sb / 2.0, self._x[None, :])
            g2 = upper_gamma((1.0 - sb) / 2.0, self._x[None, :])
            t1 = np.exp((sb / 2.0) * self._log_d_pi - sb * self._logn[None, :]) * g1
            t2 = np.exp(((1.0 - sb) / 2.0) * self._log_d_pi
                        - (1.0 - sb) * self._logn[None, :]) * g2
            mag = np.abs(t1) + np.abs(t2)
            out[i: i + rows] = ((t1 + t2) * self._chi[None, :]).sum(axis=1)
            err[i: i + rows] = self._tail + ROUND_REL * mag.sum(axis=1)
        return out, err

    def lambda_value(self, s: complex) -> LValue:
        s = complex(s)
        self._check_strip(s)
        lam, err = self.lambda_batch(np.array([s]))
        gf = self.gamma_factor(s)
        return LValue(s=s, lam=complex(lam[0]), l=complex(lam[0] / gf), err_est=float(err[0]))

    def gamma_factor(self, s: complex) -> complex:
        """(d/pi)^{s/2} Gamma(s/2)."""
        s = complex(s)
        if s == 0.0:
            raise ConditioningError("gamma factor pole at s = 0")
        return complex(np.exp((s / 2.0) * self._log_d_pi) * gamma(s / 2.0))

    def completed_lambda(self, s: complex) -> LValue:
        return self.lambda_value(s)

    def l_value(self, s: complex) -> tuple[complex, float]:
        """L(s, chi_d) with propagated absolute error estimate."""
        v = self.lambda_value(s)
        gf = self.gamma_factor(s)
        if abs(gf) < GAMMA_FACTOR_FLOOR:
            raise ConditioningError(f"gamma factor {abs(gf):.3e} too small at s={s}")
        return v.l, v.err_est / abs(gf)

    def l_prime(self, sigma: float) -> tuple[float, float]:
        """L'(sigma) for real sigma by complex-step differentiation.

        The expansion is evaluated in complex arithmetic and L is real on the
        real axis, so Im L(sigma + ih)/h is a cancellation-free derivative;
        the h^2 truncation term sits at 1e-40.
        """
        sigma = float(sigma)
        val, err = self.l_value(sigma + 1j * COMPLEX_STEP_H)
        # first-order scale factor for d(log L)/ds across the strip
        kappa = 0.5 * abs(self._log_d_pi) + math.log(self.n_trunc + 1) + 4.0
        return val.imag / COMPLEX_STEP_H, err * kappa

    def l_prime_central(self, sigma: float, h: float = 1e-6) -> float:
        """Central-difference cross-check for l_prime (independent route)."""
        lp, _ = self.l_value(sigma + h)
        lm, _ = self.l_value(sigma - h)
        return (lp.real - lm.real) / (2.0 * h)

    def log_deriv(self, s: complex) -> tuple[complex, float]:
        """-L'/L(s). Raises NearZeroError when |L| is under the floor."""
        s = complex(s)
        if s.imag == 0.0:
            val, err = self.l_value(s.real + 1j * COMPLEX_STEP_H)
            l_re, l_im = val.real, val.imag
            if abs(l_re) < L_FLOOR:
                raise NearZeroError(f"|L({s})| = {abs(l_re):.3e} under conditioning floor",
                                    magnitude=abs(l_re))
            deriv = l_im / COMPLEX_STEP_H
            kappa = 0.5 * abs(self._log_d_pi) + math.log(self.n_trunc + 1) + 4.0
            out = -deriv / l_re
            rel = err * kappa / max(abs(l_re), L_FLOOR) * (1.0 + abs(out))
            return complex(out), rel
        # off the real axis: fourth-order central differences of L
        h = 1e-4
        vals = [self.l_value(s + k * h)[0] for k in (-2, -1, 1, 2)]
        l0, err0 = self.l_value(s)
        if abs(l0) < L_FLOOR:
            raise NearZeroError(f"|L({s})| = {abs(l0):.3e} under conditioning floor",
                                magnitude=abs(l0))
        deriv = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12.0 * h)
        return -deriv / l0, (err0 / h + 1e-14 * abs(deriv)) / abs(l0)

    # -- fast path ---------------------------------------------------------

    def _build_theta(self) -> None:
        eps_q = 1e-15
        c = math.log(1.0 / eps_q) + 3.0
        t_max = max(self.d * c / math.pi, 40.0)
        U = math.log(t_max)
        width = min(0.7, 4.0 * math.pi / max(self.t_cap, 1.0) / 1.5)
        panels = max(4, math.ceil(U / width))
        gl_x, gl_w = np.polynomial.legendre.leggauss(16)
        edges = np.linspace(0.0, U, panels + 1)
        half = np.diff(edges) / 2.0
        mid = (edges[:-1] + edges[1:]) / 2.0
        u = (mid[:, None] + half[:, None] * gl_x[None, :]).ravel()
        w = (half[:, None] * gl_w[None, :]).ravel()
        t = np.exp(u)
        n_theta = math.ceil(math.sqrt(self.d * c / math.pi))
        n = np.arange(1, n_theta + 1, dtype=np.float64)
        chi = chi_values(self.d, np.arange(1, n_theta + 1, dtype=np.int64)).astype(np.float64)
        with np.errstate(under="ignore"):
            expo = -math.pi * np.outer(n**2, t) / self.d
            np.clip(expo, -745.0, None, out=expo)
            omega = chi @ np.exp(expo)
        self._theta = (u, w * omega)
        # cross-validate against the precise path
        probes = np.array([0.62, 0.93 + 0.6j * min(self.t_cap, 10.0),
                           1.21 - 0.25j * min(self.t_cap, 10.0)], dtype=np.complex128)
        ref, referr = self.lambda_batch(probes)
        fast = self._lambda_fast_raw(probes)
        scale = np.abs(ref) + 1e-30
        self.fast_rel_err = float(np.max(np.abs(fast - ref) / scale)) * 4.0 + 1e-12

    def _lambda_fast_raw(self, s: np.ndarray) -> np.ndarray:
        u, wo = self._theta
        s = np.asarray(s, dtype=np.complex128)
        e1 = np.exp(np.multiply.outer(s / 2.0, u))
        e2 = np.exp(np.multiply.outer((1.0 - s) / 2.0, u))
        return (e1 + e2) @ wo

    def lambda_fast(self, s: np.ndarray) -> np.ndarray:
        """Lambda(s) on the cached theta quadrature (vectorized over s)."""
        if self._theta is None:
            self._build_theta()
        return self._lambda_fast_raw(np.asarray(s, dtype=np.complex128))

    def l_fast(self, s: np.ndarray) -> np.ndarray:
        """L(s) on the fast path (vectorized)."""
        s = np.asarray(s, dtype=np.complex128)
        lam = self.lambda_fast(s)
        gf = np.exp((s / 2.0) * self._log_d_pi) * gamma(s / 2.0)
        return lam / gf

    def log_deriv_fast(self, sigma: float) -> float:
        """-L'/L at a real point on the fast path (complex step)."""
        v = self.l_fast(np.array([sigma + 1j * COMPLEX_STEP_H]))[0]
        if abs(v.real) < L_FLOOR:
            raise NearZeroError(f"|L({sigma})| under floor on fast path", magnitude=abs(v.real))
        return -v.imag / COMPLEX_STEP_H / v.real


@lru_cache(maxsize=24)
def engine_for(d: int, eps_target: float = 1e-12, t_cap: float = 12.0) -> LEngine:
    """Process-wide engine cache; engines are immutable after construction."""
    return LEngine(d, eps_target=eps_target, t_cap=t_cap)


# -- independent oracle ----------------------------------------------------

ORACLE_D_CAP = 10**4


def hurwitz_zeta_shifted(s: complex, q: np.ndarray, k_shift: int | None = None,
                         j_terms: int = 14) -> np.ndarray:
    """zeta(s, q) - 1/((s-1) (q+K)^{s-1})-style variant: Euler-Maclaurin with the
    constant 1/(s-1) part replaced by ((q+K)^{1-s} - 1)/(s-1).

    The omitted constant is independent of q, so it cancels in any sum
    weighted by a character with vanishing full-period sum; dropping it makes
    the expression regular at s = 1.
    """
    s = complex(s)
    q = np.asarray(q, dtype=np.float64)
    K = k_shift if k_shift is not None else 24 + math.ceil(1.2 * abs(s.imag))
    acc = np.zeros(q.shape, dtype=np.complex128)
    for k in range(K):
        acc += np.exp(-s * np.log(q + k))
    qK = q + K
    logqK = np.log(qK)
    w = (1.0 - s) * logqK
    if abs(s - 1.0) < 1e-8:
        # (e^w - 1)/(s-1) = -logqK (1 + w/2 + w^2/6) + O(w^3/(s-1)) stably
        acc += -logqK * (1.0 + w / 2.0 + w * w / 6.0)
    else:
        acc += (np.exp(w) - 1.0) / (s - 1.0)
    acc += 0.5 * np.exp(-s * logqK)
    bern = bernoulli_numbers()
    rising = s
    fact = 1.0
    for j in range(1, j_terms + 1):
        fact *= (2 * j) * (2 * j - 1)
        coeff = float(bern[2 * j]) / fact
        acc += coeff * rising * np.exp((-s - 2 * j + 1) * logqK)
        rising = rising * (s + 2 * j - 1) * (s + 2 * j)
    return acc


def euler_maclaurin_oracle(d: int, s: complex) -> complex:
    """Reference L(s, chi_d) = d^{-s} sum_a chi_d(a) zeta(s, a/d).

    Shares nothing with the expansion path. Cost O(d) per point; capped.
    """
    if d > ORACLE_D_CAP:
        raise ResourceError(f"oracle cost is O(d); d={d} exceeds cap {ORACLE_D_CAP}")
    s = complex(s)
    a = np.arange(1, d + 1, dtype=np.int64)
    chi = chi_values(d, a).astype(np.float64)
    z = hurwitz_zeta_shifted(s, a.astype(np.float64) / d)
    return complex(np.exp(-s * math.log(d)) * np.sum(chi * z))


def dirichlet_series_oracle(d: int, s: complex, n_max: int = 10**6) -> complex:
    """Direct series sum_{n<=n_max} chi_d(n) n^{-s}; only sensible for Re s > 1."""
    n = np.arange(1, n_max + 1, dtype=np.float64)
    chi = chi_values(d, np.arange(1, n_max + 1, dtype=np.int64)).astype(np.float64)
    return complex(np.sum(chi * np.exp(-complex(s) * np.log(n))))


def log_deriv_series_oracle(d: int, s: complex, n_max: int = 10**6) -> complex:
    """Direct series for -L'/L(s) = sum Lambda(n) chi_d(n) n^{-s}, Re s > 1."""
    from .primes import prime_power_table

    pp, lam = prime_power_table(n_max)
    chi = chi_values(d, pp).astype(np.float64)
    return complex(np.sum(lam * chi * np.exp(-complex(s) * np.log(pp.astype(np.float64)))))
