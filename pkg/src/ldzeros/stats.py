"""Family-scale experiments: moment matching against the random model,
large-sieve moment bounds, the empirical distribution of -L'/L(z)/V_z and its
discrepancy from the model, moments near the central point, and statistics of
real-zero counts of L'.

Non-effective implied constants are handled uniformly: each check computes a
ratio against the explicit envelope and asserts boundedness across a sweep,
never a literal inequality with an invented constant. Reductions are
fixed-order, so outputs are byte-identical across worker counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .characters import Family, chi_values, enumerate_family
from .errors import DomainError, IndeterminateError
from .lfunc import LEngine
from .primes import prime_power_table, prime_sieve
from .randmodel import default_cutoff, mc_values_cached, v_norm
from .selberg import SigmaYD, sigma_y_d
from .zeros import ZeroRecord, count_real_zeros, hypothesis_ld_check, make_region_scanner

# y = exp(c V_z log(log x / V_z)): c = 20 for distribution experiments, 10 for
# moment-bound experiments (both appear in the source material; parametrized).
MEMBERSHIP_C_DISTRIBUTION = 20.0
MEMBERSHIP_C_MOMENTS = 10.0
DEFAULT_SCAN_HEIGHT_CAP = 10.0
MC_TAIL_TOL_FACTOR = 1e-4


def default_engine_factory(d: int, t_cap: float = 12.0) -> LEngine:
    return LEngine(d, t_cap=t_cap)


# ---------------------------------------------------------------------------
# moment matching (family vs random model)
# ---------------------------------------------------------------------------

def moment_lhs(family: Family, b: dict[int, float], y_max: int, k: int) -> float:
    """(1/|D(x)|) sum_d (sum_{n<=Y} b(n) chi_d(n))^k by direct computation."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    if k > math.log(family.x) / math.log(max(y_max, 2)) + 1e-12:
        raise DomainError(
            f"k={k} outside the admissible range log x/log Y = "
            f"{math.log(family.x) / math.log(max(y_max, 2)):.3f}"
        )
    items = [(n, c) for n, c in sorted(b.items()) if 1 <= n <= y_max and c]
    if not items:
        return 0.0
    ns = np.array([n for n, _ in items], dtype=np.int64)
    cs = np.array([c for _, c in items], dtype=np.float64)
    total = 0.0
    for f in family.members:
        chi = chi_values(f.d, ns).astype(np.float64)
        total += float(np.dot(cs, chi)) ** k
    return total / len(family)


@dataclass(frozen=True)
class LargeSieveReport:
    lhs: float
    rhs_diagonal: float
    rhs_squares: float
    rhs_small: float
    ratio: float
    k: int
    in_lemma_range: bool


def large_sieve_check(family: Family, a, y_lo: float, z_hi: float, k: int,
                      strict_range: bool = False) -> LargeSieveReport:
    """Moment of the prime-power sum against its explicit-constant envelope.

    a maps n -> coefficient with |a(n)| <= 1 (dict or callable). The stated
    admissible range k <= log x / (10 log z) is unreachable at desk scale, so
    by default it is reported, not enforced.
    """
    if k < 1:
        raise DomainError("k must be a positive integer")
    coeff = a if callable(a) else (lambda n: a.get(n, 0.0))
    in_range = k <= math.log(family.x) / (10.0 * math.log(z_hi))
    if strict_range and not in_range:
        raise DomainError(f"k={k} outside log x/(10 log z) = "
                          f"{math.log(family.x) / (10 * math.log(z_hi)):.3f}")
    pp, lam = prime_power_table(int(math.floor(z_hi)))
    keep = pp >= y_lo
    pp, lam = pp[keep], lam[keep]
    avals = np.array([coeff(int(n)) for n in pp], dtype=np.complex128)
    if np.any(np.abs(avals) > 1.0 + 1e-12):
        raise DomainError("|a(n)| <= 1 violated")
    w = avals * lam / np.sqrt(pp.astype(np.float64))
    lhs = 0.0
    for f in family.members:
        chi = chi_values(f.d, pp).astype(np.float64)
        lhs += float(abs(np.dot(w, chi))) ** (2 * k)
    lhs /= len(family)
    primes = prime_sieve(int(math.floor(z_hi)))
    pr = primes[(primes >= y_lo) & (primes <= z_hi)].astype(np.float64)
    ap = np.array([abs(coeff(int(p))) for p in pr])
    diag_sum = float(np.sum(ap**2 * np.log(pr) ** 2 / pr))
    sq = primes[(primes >= math.sqrt(y_lo)) & (primes <= math.sqrt(z_hi))].astype(np.float64)
    asq = np.array([abs(coeff(int(p * p))) for p in sq]) if len(sq) else np.array([])
    sq_sum = float(np.sum(asq * np.log(sq) / sq)) if len(sq) else 0.0
    # log-domain so the k at its cap cannot overflow
    t1 = math.exp(k * math.log(20.0 * k * diag_sum)) if diag_sum > 0 else 0.0
    t2 = math.exp(2 * k * math.log(3.0 * sq_sum)) if sq_sum > 0 else 0.0
    t3 = math.exp(k * math.log(y_lo ** (-1.0 / 3.0)))
    rhs = t1 + t2 + t3
    return LargeSieveReport(lhs=lhs, rhs_diagonal=t1, rhs_squares=t2, rhs_small=t3,
                            ratio=lhs / rhs, k=k, in_lemma_range=in_range)


# ---------------------------------------------------------------------------
# empirical distribution of Ld(z)/V_z over the certified subfamily
# ---------------------------------------------------------------------------

@dataclass
class EmpiricalDistribution:
    x: float
    z: float
    v_z: float
    y: float
    values: np.ndarray                      # sorted, one per included d
    included: list[int] = field(default_factory=list)
    excluded: list[tuple[int, str]] = field(default_factory=list)
    sigma_results: dict[int, SigmaYD] = field(default_factory=dict)


def membership_y(x: float, z: float, c: float = MEMBERSHIP_C_DISTRIBUTION) -> float:
    vz = v_norm(z)
    return math.exp(c * vz * math.log(math.log(x) / vz))


def _membership_worker(args) -> tuple[int, str | None, float | None, SigmaYD | None]:
    """Per-d membership certificate plus the normalized value (pool-safe)."""
    d, z, y, scan_height_cap, eps_target = args
    try:
        eng = LEngine(d, eps_target=eps_target, t_cap=12.0)
        scanner = make_region_scanner(eng, scan_height_cap=scan_height_cap)
        sig = sigma_y_d(d, y, 0.0, scanner)
        if not sig.attained_by_default:
            return d, f"sigma above default: {sig.value:.6f}", None, sig
        if z < sig.value - 1e-12:
            return d, f"z below sigma_y_d = {sig.value:.6f}", None, sig
        return d, None, eng.log_deriv_fast(z) / v_norm(z), sig
    except IndeterminateError as exc:
        return d, f"indeterminate: {exc}", None, None


def empirical_distribution(family: Family, z: float, engine_factory=None,
                           members=None, scan_height_cap: float = DEFAULT_SCAN_HEIGHT_CAP,
                           membership_c: float = MEMBERSHIP_C_DISTRIBUTION,
                           eps_target: float = 1e-12, mapper=map,
                           ) -> EmpiricalDistribution:
    """Ld(z)/V_z over family members certified to carry the default Selberg
    abscissa at y = exp(c V_z log(log x / V_z)); exclusions carry reasons.

    mapper may be a multiprocessing map; results are canonicalized by d, so
    output does not depend on the worker split.
    """
    x = family.x
    nu_floor = 0.5 + math.log(math.log(x)) / math.log(x)
    if not (nu_floor - 1e-12 <= z <= 1.0):
        raise DomainError(f"z={z} outside [1/2 + loglog x/log x, 1] = [{nu_floor:.4f}, 1]")
    y = membership_y(x, z, membership_c)
    vz = v_norm(z)
    out = EmpiricalDistribution(x=x, z=z, v_z=vz, y=y, values=np.array([]))
    use = family.members if members is None else members
    args = [(f.d, z, y, scan_height_cap, eps_target) for f in use]
    results = sorted(mapper(_membership_worker, args), key=lambda r: r[0])
    vals = []
    for d, reason, value, sig in results:
        if sig is not None:
            out.sigma_results[d] = sig
        if reason is not None:
            out.excluded.append((d, reason))
        else:
            vals.append(value)
            out.included.append(d)
    out.values = np.array(sorted(vals), dtype=np.float64)
    return out


# ---------------------------------------------------------------------------
# discrepancy against the random model
# ---------------------------------------------------------------------------

def ks_two_sample(a: np.ndarray, b: np.ndarray) -> float:
    """Exact sup distance between two empirical CDFs (merged jump points)."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if len(a) == 0 or len(b) == 0:
        raise DomainError("empty sample")
    allpts = np.concatenate([a, b])
    ca = np.searchsorted(a, allpts, side="right") / len(a)
    cb = np.searchsorted(b, allpts, side="right") / len(b)
    return float(np.max(np.abs(ca - cb)))


def theory_bound(x: float, z: float) -> float:
    vz = v_norm(z)
    return math.sqrt(vz * math.log(math.log(x) / vz) / math.log(x))


@dataclass
class DiscrepancyReport:
    x: float
    z: float
    v_z: float
    n_family: int
    n_mc: int
    prime_cutoff: int
    d_stat: float
    bound: float
    ratio: float
    excluded: list[tuple[int, str]]
    family_values: np.ndarray
    mc_values: np.ndarray


def discrepancy(family: Family, z: float, mc_samples: int, seed: int,
                engine_factory=None, members=None,
                scan_height_cap: float = DEFAULT_SCAN_HEIGHT_CAP,
                mapper=map) -> DiscrepancyReport:
    """Exact two-sample sup-CDF distance between the family values and Monte
    Carlo draws of the model, plus the theoretical envelope and their ratio."""
    if mc_samples < 1:
        raise DomainError("mc_samples must be positive")
    emp = empirical_distribution(family, z, engine_factory=engine_factory,
                                 members=members, scan_height_cap=scan_height_cap,
                                 mapper=mapper)
    if len(emp.values) == 0:
        raise DomainError("family empty after membership exclusions")
    cutoff = default_cutoff(z, MC_TAIL_TOL_FACTOR * v_norm(z))
    draws = mc_values_cached(z, cutoff, seed=seed, n_draws=mc_samples) / v_norm(z)
    d_stat = ks_two_sample(emp.values, draws)
    bound = theory_bound(family.x, z)
    return DiscrepancyReport(x=family.x, z=z, v_z=v_norm(z), n_family=len(emp.values),
                             n_mc=mc_samples, prime_cutoff=cutoff, d_stat=d_stat,
                             bound=bound, ratio=d_stat / bound, excluded=emp.excluded,
                             family_values=emp.values, mc_values=np.sort(draws))


# ---------------------------------------------------------------------------
# moments near the central point
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CentralMomentReport:
    x: float
    nu: float
    k: int
    s: complex
    moment: float
    n_restricted: int
    n_family: int
    envelope_first: float    # nu^{4k} (k (log x)^2)^k
    envelope_second: float   # nu^{8k} (k (log x)^2)^k
    ratio_first: float
    ratio_second: float
    k_in_range: bool
    excluded: tuple[tuple[int, str], ...]


def central_moments(family: Family, nu: float, k: int, s: complex,
                    engine_factory=None, members=None,
                    scan_height_cap: float = DEFAULT_SCAN_HEIGHT_CAP) -> CentralMomentReport:
    """(1/|D(x)|) sum over the restricted subfamily of |Ld(s)|^{2k}, with both
    candidate envelopes (the two exponent variants are both reported rather
    than adjudicated).

    Restriction: default Selberg abscissa at y = x^{4/nu}, and the low-zero
    disc check with its own capped nu.
    """
    if k < 1:
        raise DomainError("k must be a positive integer")
    x = family.x
    logx = math.log(x)
    llx = math.log(logx)
    k_ok = k <= nu / 20.0
    if engine_factory is None:
        engine_factory = default_engine_factory
    y = x ** (4.0 / nu)
    nu_hyp = min(nu, llx**0.2)
    hyp_x_cap = llx**0.2
    total = 0.0
    n_restricted = 0
    excluded: list[tuple[int, str]] = []
    use = family.members if members is None else members
    for f in use:
        try:
            eng = engine_factory(f.d)
            scanner = make_region_scanner(eng, scan_height_cap=scan_height_cap)
            sig = sigma_y_d(f.d, max(y, 10.0), 0.0, scanner)
            if not sig.attained_by_default:
                excluded.append((f.d, "sigma above default"))
                continue
            hyp = hypothesis_ld_check(eng, x, min(nu_hyp, hyp_x_cap))
            if not hyp.passed:
                excluded.append((f.d, f"low-zero disc contains {hyp.count} zeros"))
                continue
            ld, _ = eng.log_deriv(complex(s))
            total += abs(ld) ** (2 * k)
            n_restricted += 1
        except IndeterminateError as exc:
            excluded.append((f.d, f"indeterminate: {exc}"))
    moment = total / len(family)
    env1 = nu ** (4 * k) * (k * logx**2) ** k
    env2 = nu ** (8 * k) * (k * logx**2) ** k
    return CentralMomentReport(x=x, nu=nu, k=k, s=complex(s), moment=moment,
                               n_restricted=n_restricted, n_family=len(family),
                               envelope_first=env1, envelope_second=env2,
                               ratio_first=moment / env1, ratio_second=moment / env2,
                               k_in_range=k_ok, excluded=tuple(excluded))


# ---------------------------------------------------------------------------
# real-zero count statistics
# ---------------------------------------------------------------------------

def nu_from_policy(policy: str | float, x: float) -> float:
    llx = math.log(math.log(x))
    if policy == "auto":
        return llx
    if policy == "hyp":
        return llx**0.2
    return float(policy)


@dataclass
class RdSample:
    x: float
    nu: float
    sigma1: float
    d_values: list[int]
    counts: list[int]
    suspects: int
    mean: float
    std_err: float
    max_count: int
    histogram: dict[int, int]
    loglog_x: float
    logloglog_x: float
    near_half_counts: dict[int, int] = field(default_factory=dict)
    records: dict[int, ZeroRecord] = field(default_factory=dict)


@dataclass
class RdStatistics:
    nu_policy: str | float
    seed: int
    samples: list[RdSample] = field(default_factory=list)


def sample_members(family: Family, sample_size: int, seed: int):
    if sample_size > len(family):
        raise DomainError(f"sample_size {sample_size} exceeds family size {len(family)}")
    if sample_size == len(family):
        return list(family.members)
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(len(family.members), size=sample_size, replace=False))
    return [family.members[i] for i in idx]


def _rd_worker(args):
    """Per-d certified zero count on [sigma1, 1] (pool-safe)."""
    d, x, sigma1, nu, eps_target, near_half = args
    eng = LEngine(d, eps_target=eps_target, t_cap=12.0)
    rec = count_real_zeros(eng, sigma1, 1.0)
    near = None
    if near_half:
        llx = math.log(math.log(x))
        try:
            hyp = hypothesis_ld_check(eng, x, min(nu, llx**0.2))
            if hyp.passed:
                nr = count_real_zeros(eng, 0.5 + 1e-3, sigma1,
                                      grid_step=(sigma1 - 0.5 - 1e-3) / 64)
                near = nr.count
        except IndeterminateError:
            pass
    return d, rec, near


def rd_statistics(x_list, nu_policy, sample_size: int, seed: int,
                  eps_target: float = 1e-12, near_half: bool = False,
                  mapper=map) -> RdStatistics:
    """Per-x samples of R_d(1/2 + nu/log x, 1), all counts certified or
    explicitly suspect; optional near-1/2 split for members passing the
    low-zero disc check."""
    out = RdStatistics(nu_policy=nu_policy, seed=seed)
    for x in x_list:
        if x < 1e3:
            raise DomainError(f"x={x} below the stated floor 1e3")
        fam = enumerate_family(x)
        nu = nu_from_policy(nu_policy, x)
        sigma1 = 0.5 + nu / math.log(x)
        members = sample_members(fam, min(sample_size, len(fam)), seed)
        args = [(f.d, x, sigma1, nu, eps_target, near_half) for f in members]
        results = sorted(mapper(_rd_worker, args), key=lambda r: r[0])
        counts = []
        suspects = 0
        near = {}
        records = {}
        for d, rec, nr in results:
            counts.append(rec.count)
            suspects += len(rec.suspects)
            records[d] = rec
            if nr is not None:
                near[d] = nr
        arr = np.array(counts, dtype=np.float64)
        hist: dict[int, int] = {}
        for c in counts:
            hist[c] = hist.get(c, 0) + 1
        out.samples.append(RdSample(
            x=float(x), nu=nu, sigma1=sigma1, d_values=[f.d for f in members],
            counts=counts, suspects=suspects, mean=float(arr.mean()),
            std_err=float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0,
            max_count=int(arr.max()) if len(arr) else 0, histogram=hist,
            loglog_x=math.log(math.log(x)),
            logloglog_x=math.log(math.log(math.log(x))),
            near_half_counts=near, records=records))
    return out
