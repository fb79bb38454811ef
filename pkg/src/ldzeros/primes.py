"""Sieve-backed arithmetic arrays shared across the package.

Everything here is deterministic and cached per bound: prime sieves, smallest
prime factor tables, von Mangoldt values on prime powers, and squarefree masks
over segments (the family enumeration needs squarefreeness on [x/2, x] without
factoring each element).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def prime_sieve(n: int) -> np.ndarray:
    """Primes up to n inclusive, as an int64 array."""
    if n < 2:
        return np.array([], dtype=np.int64)
    is_p = np.ones(n + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if is_p[p]:
            is_p[p * p:: p] = False
    return np.nonzero(is_p)[0].astype(np.int64)


@lru_cache(maxsize=8)
def smallest_prime_factor(n: int) -> np.ndarray:
    """spf[k] = smallest prime factor of k for 0 <= k <= n (spf[0] = spf[1] = 0)."""
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in range(2, math.isqrt(n) + 1):
        if spf[p] == 0:
            view = spf[p * p:: p]
            view[view == 0] = p
    unmarked = np.nonzero(spf == 0)[0]
    spf[unmarked] = unmarked  # the remaining entries are prime (or 0, 1)
    spf[:2] = 0
    return spf


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization [(p, a), ...] by trial division, ascending p."""
    if n < 1:
        raise ValueError(f"cannot factor n={n}")
    out: list[tuple[int, int]] = []
    for p in (2, 3):
        if n % p == 0:
            a = 0
            while n % p == 0:
                n //= p
                a += 1
            out.append((p, a))
    f = 5
    while f * f <= n:
        if n % f == 0:
            a = 0
            while n % f == 0:
                n //= f
                a += 1
            out.append((f, a))
        f += 2 if f % 6 == 5 else 4
    if n > 1:
        out.append((n, 1))
    return out


def squarefree_segment(lo: int, hi: int) -> np.ndarray:
    """Boolean mask over [lo, hi] (inclusive): mask[m - lo] = m is squarefree.

    Marks multiples of p^2 for p^2 <= hi; no per-element factorization.
    """
    if lo < 1 or hi < lo:
        raise ValueError(f"bad segment [{lo}, {hi}]")
    mask = np.ones(hi - lo + 1, dtype=bool)
    for p in prime_sieve(math.isqrt(hi)):
        q = int(p) * int(p)
        start = ((lo + q - 1) // q) * q
        if start <= hi:
            mask[start - lo:: q] = False
    return mask


@lru_cache(maxsize=4)
def prime_power_table(n: int) -> tuple[np.ndarray, np.ndarray]:
    """(pp, lam): prime powers pp <= n ascending and lam = Lambda(pp) = log p.

    Composite n with at least two distinct prime factors never appear; the
    von Mangoldt function vanishes there.
    """
    primes = prime_sieve(n)
    pps = [primes]
    lams = [np.log(primes.astype(np.float64))]
    for p in primes:
        p = int(p)
        if p * p > n:
            break
        q = p * p
        lp = math.log(p)
        while q <= n:
            pps.append(np.array([q], dtype=np.int64))
            lams.append(np.array([lp]))
            q *= p
    pp = np.concatenate(pps)
    lam = np.concatenate(lams)
    order = np.argsort(pp, kind="stable")
    return pp[order], lam[order]


def von_mangoldt(n: int) -> float:
    """Lambda(n): log p if n = p^k, else 0."""
    if n <= 1:
        return 0.0
    fac = factorize(n)
    if len(fac) == 1:
        return math.log(fac[0][0])
    return 0.0
