"""The random multiplicative model for the family's characters.

Independent three-point variables per odd prime,

    P(X(p) = +1) = P(X(p) = -1) = p / (2(p+1)),   P(X(p) = 0) = 1/(p+1),

with X(2) = 0, extended completely multiplicatively. Sampling is counter
based: every (seed, draw, prime-index) triple maps through a splitmix64-style
mixer to one uniform, so assignments are bit-reproducible and independent of
chunking or worker count.

The model series

    sum_p X(p) log p / (p^z - X(p))

converges almost surely for Re z > 1/2 but not absolutely for z <= 1, so a
truncation at P leaves two effects: a mean-zero fluctuation (its standard
deviation is bounded here and reported) and an absolutely convergent part
bounded by sum_{p>P} log p / (p^z (p^z - 1)). Both bounds come from partial
summation against theta(t) = sum_{p<=t} log p with theta(t) < C_THETA t:
for nonincreasing f >= 0,

    sum_{p > P} f(p) log p <= C_THETA (P f(P) + int_P^inf f dt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, ResourceError, TruncationError
from .primes import factorize, prime_sieve

C_THETA = 1.02  # theta(t) < 1.01624 t for all t > 0 (Rosser-Schoenfeld), rounded up
DEFAULT_TAIL_TOL_FACTOR = 1e-6  # default absolute tail tolerance is this times V_z
CUTOFF_CAP = 2**31

_G1 = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SH30, _SH27, _SH31, _SH11 = (np.uint64(30), np.uint64(27), np.uint64(31), np.uint64(11))
_INV53 = float(2.0**-53)


def v_norm(z: complex) -> float:
    """V_z = 1/(Re z - 1/2), the natural scale of the log-derivative near 1/2."""
    z = complex(z)
    if z.real <= 0.5:
        raise DomainError(f"V_z needs Re z > 1/2, got {z}")
    return 1.0 / (z.real - 0.5)


def _mix(z: np.ndarray) -> np.ndarray:
    # uint64 wraparound is the point; silence the overflow warnings
    with np.errstate(over="ignore"):
        z = (z + _G1).astype(np.uint64)
        z = (z ^ (z >> _SH30)) * _M1
        z = (z ^ (z >> _SH27)) * _M2
        return z ^ (z >> _SH31)


def _uniforms(seed: int, draw: np.ndarray, stream: np.ndarray) -> np.ndarray:
    """Uniforms in [0,1) for (seed, draw, stream) triples; broadcasts."""
    with np.errstate(over="ignore"):
        s0 = _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
        h = _mix(s0 + np.asarray(draw, dtype=np.uint64) * _G1)
        h = _mix(h + np.asarray(stream, dtype=np.uint64) * _G1)
    return (h >> _SH11).astype(np.float64) * _INV53


def _values_from_uniforms(u: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Map uniforms to {-1, 0, +1} under the per-prime three-point law."""
    q = p / (2.0 * (p + 1.0))
    out = np.zeros(u.shape, dtype=np.int8)
    out[u < 2.0 * q] = -1
    out[u < q] = 1
    return out


@dataclass(frozen=True)
class RandomAssignment:
    """One realization of {X(p)} for primes p <= prime_cutoff."""

    seed: int
    prime_cutoff: int
    primes: np.ndarray
    values: np.ndarray  # int8, aligned with primes; value at 2 is always 0

    def value_at(self, p: int) -> int:
        i = int(np.searchsorted(self.primes, p))
        if i >= len(self.primes) or self.primes[i] != p:
            raise DomainError(f"{p} is not a prime <= {self.prime_cutoff}")
        return int(self.values[i])


def sample_assignment(seed: int, prime_cutoff: int, draw: int = 0) -> RandomAssignment:
    """Draw an assignment; p = 2 is pinned to 0, odd primes follow the law."""
    if prime_cutoff < 3:
        raise DomainError(f"prime cutoff must be >= 3, got {prime_cutoff}")
    primes = prime_sieve(prime_cutoff)
    pf = primes.astype(np.float64)
    u = _uniforms(seed, np.uint64(draw), np.arange(len(primes), dtype=np.uint64))
    vals = _values_from_uniforms(u, pf)
    vals[primes == 2] = 0
    return RandomAssignment(seed=seed, prime_cutoff=prime_cutoff, primes=primes, values=vals)


def x_of(n: int, assignment: RandomAssignment) -> int:
    """X(n) = prod X(p)^a over the factorization of n; X(1) = 1."""
    if n < 1:
        raise DomainError(f"X(n) needs n >= 1, got {n}")
    fac = factorize(n)
    for p, _ in fac:
        if p > assignment.prime_cutoff:
            raise DomainError(f"prime factor {p} exceeds cutoff {assignment.prime_cutoff}")
    out = 1
    for p, a in fac:
        v = assignment.value_at(p)
        out *= v if a % 2 == 1 else v * v
        if out == 0:
            return 0
    return out


def expect_x(n: int) -> Fraction:
    """Exact E[X(n)]: zero unless n is an odd perfect square, else prod p/(p+1)."""
    if n < 1:
        raise DomainError(f"E[X(n)] needs n >= 1, got {n}")
    out = Fraction(1)
    for p, a in factorize(n):
        if p == 2 or a % 2 == 1:
            return Fraction(0)
        out *= Fraction(p, p + 1)
    return out


# ---------------------------------------------------------------------------
# truncation bounds
# ---------------------------------------------------------------------------

def _geom_integral(z: float, P: float) -> float:
    """int_P^inf dt / (t^z (t^z - 1)) = sum_{j>=2} P^{1-jz}/(jz-1)."""
    total = 0.0
    j = 2
    while True:
        term = P ** (1.0 - j * z) / (j * z - 1.0)
        total += term
        if term < 1e-22 * total or j > 8000:
            break
        j += 1
    return total


def tail_bias_bound(z: float, P: int) -> float:
    """Certified bound on sum_{p>P} log p / (p^z (p^z - 1)) (the non-random
    part of the truncated model series)."""
    if not 0.5 < z <= 1.0:
        raise DomainError(f"z must lie in (1/2, 1], got {z}")
    f_at_p = 1.0 / (P**z * (P**z - 1.0))
    return C_THETA * (P * f_at_p + _geom_integral(z, float(P)))


def tail_std_bound(z: float, P: int) -> float:
    """Bound on the standard deviation of the omitted mean-zero tail,
    sqrt(sum_{p>P} (log p)^2 / p^{2z})."""
    if not 0.5 < z <= 1.0:
        raise DomainError(f"z must lie in (1/2, 1], got {z}")
    w = 2.0 * z - 1.0
    f_at_p = math.log(P) / P ** (2.0 * z)
    integral = P**-w * (math.log(P) / w + 1.0 / w**2)
    return math.sqrt(C_THETA * (P * f_at_p + integral))


def default_cutoff(z: float, tol: float | None = None) -> int:
    """Smallest power-of-two-stepped P with tail_bias_bound(z, P) < tol.

    tol defaults to DEFAULT_TAIL_TOL_FACTOR * V_z. Raises TruncationError when
    the cap is hit (the caller should pass a looser tolerance).
    """
    if tol is None:
        tol = DEFAULT_TAIL_TOL_FACTOR * v_norm(z)
    lo, hi = 8, 16
    while tail_bias_bound(z, hi) >= tol:
        lo, hi = hi, hi * 2
        if hi > CUTOFF_CAP:
            raise TruncationError(
                f"tail tolerance {tol:.3e} needs a prime cutoff beyond {CUTOFF_CAP} at z={z}",
                suggested=hi,
            )
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if tail_bias_bound(z, mid) < tol:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class RandSeries:
    """One truncated draw of the model log-derivative series at real z."""

    z: float
    prime_cutoff: int
    value: float
    tail_bound: float  # bound on the absolutely convergent omitted part
    tail_std: float    # std bound on the omitted mean-zero part


def sample_l_rand(z: float, prime_cutoff: int, assignment: RandomAssignment,
                  tol: float | None = None) -> RandSeries:
    """One draw of sum_{p <= P} X(p) log p / (p^z - X(p)) with certified bounds."""
    if not 0.5 < z <= 1.0:
        raise DomainError(f"z must lie in (1/2, 1], got {z}")
    if tol is None:
        tol = DEFAULT_TAIL_TOL_FACTOR * v_norm(z)
    bias = tail_bias_bound(z, prime_cutoff)
    if bias > tol:
        raise TruncationError(
            f"tail bound {bias:.3e} exceeds tolerance {tol:.3e} at P={prime_cutoff}",
            suggested=default_cutoff(z, tol),
        )
    mask = assignment.primes <= prime_cutoff
    p = assignment.primes[mask].astype(np.float64)
    v = assignment.values[mask].astype(np.float64)
    lp = np.log(p)
    val = float(np.sum(np.where(v != 0.0, v * lp / (p**z - v), 0.0)))
    return RandSeries(z=z, prime_cutoff=prime_cutoff, value=val,
                      tail_bound=bias, tail_std=tail_std_bound(z, prime_cutoff))


_MC_CACHE: dict[tuple, np.ndarray] = {}


def mc_values_cached(z: float, prime_cutoff: int, seed: int, n_draws: int) -> np.ndarray:
    """mc_values with a small process-wide cache (draws are x-independent,
    so distribution sweeps over several x reuse one sample set)."""
    key = (float(z), int(prime_cutoff), int(seed), int(n_draws))
    got = _MC_CACHE.get(key)
    if got is None:
        if len(_MC_CACHE) > 4:
            _MC_CACHE.clear()
        got = mc_values(z, prime_cutoff, seed, n_draws)
        _MC_CACHE[key] = got
    return got


def mc_values(z: float, prime_cutoff: int, seed: int, n_draws: int,
              chunk: int = 512) -> np.ndarray:
    """n_draws independent truncated draws of the model series (vectorized).

    Draw k uses counter streams (seed, k, prime index); the result is
    bit-identical for any chunk size or worker split.
    """
    primes = prime_sieve(prime_cutoff)
    odd = primes[primes > 2]
    pf = odd.astype(np.float64)
    lp = np.log(pf)
    w_plus = lp / (pf**z - 1.0)
    w_minus = lp / (pf**z + 1.0)
    q = pf / (2.0 * (pf + 1.0))
    # prime-index streams are global (offset by one for the skipped p = 2)
    stream = np.arange(1, len(odd) + 1, dtype=np.uint64)
    out = np.empty(n_draws, dtype=np.float64)
    for i in range(0, n_draws, chunk):
        ks = np.arange(i, min(i + chunk, n_draws), dtype=np.uint64)
        u = _uniforms(seed, ks[:, None], stream[None, :])
        contrib = np.where(u < q, w_plus, 0.0) - np.where((u >= q) & (u < 2.0 * q), w_minus, 0.0)
        out[i: i + len(ks)] = contrib.sum(axis=1)
    return out


def char_fn_rand(z: float, u, n_samples: int, seed: int,
                 prime_cutoff: int | None = None, tol: float | None = None):
    """Monte Carlo characteristic function E[exp(2 pi i u L_rand(z)/V_z)].

    Returns (estimates, standard_errors) with one entry per u; all u values
    reuse the same sample set so conjugation symmetry holds exactly.
    """
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    if prime_cutoff is None:
        prime_cutoff = default_cutoff(z, tol)
    vz = v_norm(z)
    vals = mc_values(z, prime_cutoff, seed, n_samples)
    u_arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
    phases = np.exp(2j * math.pi * np.outer(u_arr, vals / vz))
    est = phases.mean(axis=1)
    se = phases.std(axis=1) / math.sqrt(n_samples)
    if np.ndim(u) == 0:
        return complex(est[0]), float(se[0])
    return est, se


def samples_to_csv(path: str, z: float, prime_cutoff: int, seed: int,
                   n_draws: int, tol: float | None = None,
                   provenance: str | None = None) -> None:
    """Dump independent truncated draws as CSV rows `seed,z,P,value,tail_bound`.

    Row k is the draw generated by master seed `seed + k`, so every row is
    reproducible in isolation.
    """
    bias = tail_bias_bound(z, prime_cutoff)
    if tol is not None and bias > tol:
        raise TruncationError(
            f"tail bound {bias:.3e} exceeds tolerance {tol:.3e} at P={prime_cutoff}",
            suggested=default_cutoff(z, tol),
        )
    with open(path, "w", encoding="utf-8") as fh:
        if provenance is not None:
            fh.write(f"# {provenance}\n")
        fh.write("seed,z,P,value,tail_bound\n")
        for k in range(n_draws):
            v = mc_values(z, prime_cutoff, seed=seed + k, n_draws=1)[0]
            fh.write(f"{seed + k},{z!r},{prime_cutoff},{float(v)!r},{bias!r}\n")


# ---------------------------------------------------------------------------
# exact moments
# ---------------------------------------------------------------------------

MOMENT_Y_CAP = 30
MOMENT_K_CAP = 6
MOMENT_STATE_BUDGET = 200_000


def moment_rand(b: dict[int, object], y_max: int, k: int) -> Fraction:
    """Exact E[(sum_{n<=Y} b(n) X(n))^k] by multinomial expansion.

    States track, per odd prime, the running exponent parity (the expectation
    only depends on parities and support), plus a dead flag for any factor of
    2. Budgeted; exact rational arithmetic throughout.
    """
    if y_max > MOMENT_Y_CAP:
        raise DomainError(f"Y={y_max} exceeds feasibility cap {MOMENT_Y_CAP}")
    if k > MOMENT_K_CAP:
        raise DomainError(f"k={k} exceeds cap {MOMENT_K_CAP}")
    if k < 0:
        raise DomainError("k must be nonnegative")
    coeffs = {n: Fraction(v) for n, v in b.items() if 1 <= n <= y_max and v}
    if k == 0:
        return Fraction(1)
    if not coeffs:
        return Fraction(0)
    # signature: (has_two, ((p, parity), ...)) for odd primes with exponent > 0
    sigs = {}
    for n, c in coeffs.items():
        has2 = False
        odd = {}
        for p, a in factorize(n):
            if p == 2:
                has2 = True
            else:
                odd[p] = a % 2
        sigs[n] = (has2, tuple(sorted(odd.items())))

    def combine(s1, s2):
        # support is the union; parities add mod 2 (a prime with parity 0 but
        # positive exponent still contributes its p/(p+1) factor at the end)
        has2 = s1[0] or s2[0]
        m = dict(s1[1])
        for p, par in s2[1]:
            m[p] = (m.get(p, 0) + par) % 2
        return (has2, tuple(sorted(m.items())))

    state = {(False, ()): Fraction(1)}
    for _ in range(k):
        new: dict = {}
        for sig, coeff in state.items():
            for n, c in coeffs.items():
                ns = combine(sig, sigs[n])
                new[ns] = new.get(ns, Fraction(0)) + coeff * c
        if len(new) > MOMENT_STATE_BUDGET:
            raise ResourceError(f"moment expansion exceeded {MOMENT_STATE_BUDGET} states")
        state = new
    total = Fraction(0)
    for (has2, parities), coeff in state.items():
        if has2 or any(par == 1 for _, par in parities):
            continue
        w = Fraction(1)
        for p, _ in parities:
            w *= Fraction(p, p + 1)
        total += coeff * w
    return total
