"""The family of cubic characters with squarefree modulus = 1 mod 9:
enumeration, the squarefree-decomposition weights M_Y/R_Y, moment
experiments against the predicted main terms, and the mollifier.

Moment sums follow a fixed sharding discipline: the family is split into
contiguous norm shards, each shard is accumulated serially, and shards are
merged in index order -- so results are bit-identical for any worker count
(workers only decide how shards are scheduled, never how they are summed).
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .eisenstein import EisInt, ONE, as_eis, primary_elements
from .errors import CacheMismatch, ThetaOutOfRange
from .euler import cached_constant, mf_G, mf_H, mf_h, mf_r, zeta_k
from .factor import (
    EisFactorization,
    PrimeTable,
    shared_prime_table,
    smallest_prime_factor_table,
)
from .gauss import GaussSumTable
from .lfun import AfeContext, LValueCache, LValueRecord, TRUNC_MULT, a1_tail_bound
from .symbols import OMEGA_LUT, symbol_values_array
from .weights import f_check, test_function

#: density of the family: |F| in (X, 2X] ~ DENSITY * X
def family_density() -> float:
    return math.pi * math.sqrt(3.0) / (108.0 * zeta_k(2.0))


@dataclass(frozen=True)
class FamilyElement:
    q: EisInt
    norm: int
    factorization: EisFactorization
    q1: Optional[EisInt] = None
    q2: Optional[EisInt] = None


def _factor_primary_fast(a: int, b: int, n: int, spf: np.ndarray,
                         pt: PrimeTable) -> Optional[List[Tuple[EisInt, int]]]:
    """Prime-power factorization of a primary element with norm n.

    Returns None when the element is not squarefree (early exit used by the
    family sieve); otherwise the sorted list of (primary prime, exponent=1).
    """
    x = EisInt(a, b)
    out: List[Tuple[EisInt, int]] = []
    m = n
    while m > 1:
        p = int(spf[m])
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if p % 3 == 2:
            if e % 2 or e > 2:
                if e % 2:
                    raise ArithmeticError("inert prime with odd norm valuation")
                return None
            out.append((EisInt(-p, 0), 1))
            continue
        pi, pibar = pt.split_prime(p)
        if e == 1:
            out.append((pi, 1) if _divides(pi, x) else (pibar, 1))
            continue
        # e >= 2: squarefree only when both conjugates divide exactly once
        v1 = _valuation(pi, x)
        if e - v1 != v1 or v1 != 1:
            return None
        out.append((pi, 1))
        out.append((pibar, 1))
    out.sort(key=lambda t: t[0].key())
    return out


def _divides(pi: EisInt, x: EisInt) -> bool:
    return (x % pi).is_zero()


def _valuation(pi: EisInt, x: EisInt) -> int:
    v = 0
    while True:
        q, r = divmod(x, pi)
        if not r.is_zero():
            return v
        x, v = q, v + 1


def enumerate_f3prime(x_max: int, prime_table: Optional[PrimeTable] = None,
                      spf: Optional[np.ndarray] = None) -> List[FamilyElement]:
    """All q primary squarefree, q = 1 mod 9, 1 < N(q) <= x_max.

    Deterministic (norm, a, b) order; factorizations attached.
    """
    pt = prime_table if prime_table is not None else shared_prime_table(int(x_max))
    if spf is None:
        spf = smallest_prime_factor_table(int(x_max))
    rows = primary_elements(int(x_max))
    mask = (rows[:, 1] % 9 == 1) & (rows[:, 2] % 9 == 0) & (rows[:, 0] > 1)
    out: List[FamilyElement] = []
    for n, a, b in rows[mask]:
        n, a, b = int(n), int(a), int(b)
        primes = _factor_primary_fast(a, b, n, spf, pt)
        if primes is None:
            continue
        fact = EisFactorization(ONE, 0, tuple(primes))
        out.append(FamilyElement(EisInt(a, b), n, fact))
    return out


def enumerate_f3(max_conductor_norm: int) -> List[FamilyElement]:
    """Elements q = q1 q2^2 of the full mod-9 family with N(q1 q2) <= bound.

    Used by the root-number checks and the sieve probe; q2 = 1 members are
    exactly the thin squarefree subfamily.
    """
    from .factor import factor, is_squarefree

    bound = int(max_conductor_norm)
    prims = [EisInt(int(a), int(b)) for _, a, b in primary_elements(bound)]
    out: List[FamilyElement] = []
    for q1 in prims:
        for q2 in prims:
            if q1.norm * q2.norm > bound:
                break  # prims sorted by norm? not within equal norms; keep simple
            q = q1 * q2 * q2
            if q == ONE or (q.a % 9, q.b % 9) != (1, 0):
                continue
            prod = q1 * q2
            if not is_squarefree(prod):
                continue
            out.append(FamilyElement(q, q.norm, factor(q), q1, q2))
    out.sort(key=lambda e: (e.norm, e.q.a, e.q.b, e.q1.key()))
    return out


# ---------------------------------------------------------------------------
# M_Y / R_Y decomposition of mu^2
# ---------------------------------------------------------------------------

def m_y(q_or_fact, y: float) -> int:
    """M_Y(q) = sum over square ideal divisors l^2 | q with N(l) <= Y of mu(l)."""
    return _my_ry(q_or_fact, y)[0]


def r_y(q_or_fact, y: float) -> int:
    """R_Y(q): the complementary sum over N(l) > Y; M_Y + R_Y = mu^2(q)."""
    return _my_ry(q_or_fact, y)[1]


def _my_ry(q_or_fact, y: float) -> Tuple[int, int]:
    from .factor import factor

    f = q_or_fact if isinstance(q_or_fact, EisFactorization) else factor(as_eis(q_or_fact))
    gens: List[int] = []
    if f.lambda_exp >= 2:
        gens.append(3)
    gens.extend(pi.norm for pi, e in f.primes if e >= 2)
    m_val = r_val = 0
    for mask in range(1 << len(gens)):
        norm = 1
        bits = 0
        mm = mask
        i = 0
        while mm:
            if mm & 1:
                norm *= gens[i]
                bits += 1
            mm >>= 1
            i += 1
        if norm <= y:
            m_val += (-1) ** bits
        else:
            r_val += (-1) ** bits
    return m_val, r_val


# ---------------------------------------------------------------------------
# L-values over the family (threaded, deterministic shard merge)
# ---------------------------------------------------------------------------

def worker_count() -> int:
    env = os.environ.get("CML_WORKERS", "")
    if env.strip():
        return max(1, int(env))
    return os.cpu_count() or 1


def compute_l_values(ctx: AfeContext, family: Sequence[FamilyElement],
                     workers: Optional[int] = None,
                     cache: Optional[LValueCache] = None,
                     n_shards: int = 64) -> List[LValueRecord]:
    """Central L-values for every family element, cache-aware.

    The shard partition is fixed by n_shards (not by the worker count), so
    per-shard accumulation order and hence all floating-point results are
    identical no matter how many threads execute.
    """
    cached: Dict[Tuple[int, int], Tuple[complex, int]] = cache.load() if cache else {}
    nw = worker_count() if workers is None else max(1, workers)
    bounds = np.linspace(0, len(family), n_shards + 1).astype(int)

    def run_shard(si: int) -> List[LValueRecord]:
        out: List[LValueRecord] = []
        for el in family[bounds[si]:bounds[si + 1]]:
            key = (el.q.a, el.q.b)
            hit = cached.get(key)
            if hit is not None:
                scale = math.sqrt(3.0 * el.norm)
                out.append(LValueRecord(el.q, el.norm, hit[0], complex(0), None,
                                        hit[1], a1_tail_bound(ctx.trunc_mult * scale, scale)))
                continue
            out.append(ctx.l_half(el.q, el.factorization))
        return out

    if nw <= 1:
        shards = [run_shard(i) for i in range(n_shards)]
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            shards = list(pool.map(run_shard, range(n_shards)))
    records = [r for shard in shards for r in shard]
    if cache is not None:
        cache.write(records)
    return records


# ---------------------------------------------------------------------------
# Moment reports
# ---------------------------------------------------------------------------

@dataclass
class MomentReport:
    kind: str
    x: float
    f_kind: str
    raw_sum: complex
    main_term: float
    ratio: float
    count: int
    wall_time: float
    slope: Optional[float] = None
    intercept: Optional[float] = None
    slope_target: Optional[float] = None
    extras: Dict[str, float] = field(default_factory=dict)


def _window_weights(norms: np.ndarray, x: float, f_kind: str) -> np.ndarray:
    return test_function(f_kind, norms / x)


def moment(kind: str, x: float, records: Sequence[LValueRecord],
           f_kind: str = "smoothstep",
           grid: Optional[Sequence[float]] = None,
           consts_bound: int = 10**5) -> MomentReport:
    """Smoothed moment of the family L-values against the predicted main term.

    kind "first":  sum mu^2(q) L(1/2) F(N/x)      vs  C F^(0) x
    kind "second": sum mu^2(q) |L(1/2)|^2 F(N/x)  vs  2 D F^(0) x (log x + c),
                   with an affine fit of S2/x against log x over the grid
    kind "nonvanishing": weighted fraction with |L| above the tail bound
    """
    t0 = time.time()
    norms = np.array([r.conductor_norm for r in records], dtype=float)
    lvals = np.array([r.L_half for r in records])
    fc0 = float(f_check(f_kind, 0).real)
    if kind == "first":
        w = _window_weights(norms, x, f_kind)
        raw = complex(np.sum(w * lvals))
        main = cached_constant("C", consts_bound) * fc0 * x
        used = int(np.count_nonzero(w))
        return MomentReport("first", x, f_kind, raw, main, raw.real / main,
                            used, time.time() - t0)
    if kind == "second":
        gx = sorted(set(grid)) if grid else [x]
        s2 = []
        for xi in gx:
            w = _window_weights(norms, xi, f_kind)
            s2.append(float(np.sum(w * np.abs(lvals) ** 2)))
        two_d_fc = 2.0 * cached_constant("D", consts_bound) * fc0
        slope = intercept = None
        if len(gx) >= 2:
            slope, intercept = np.polyfit(np.log(gx), np.array(s2) / np.array(gx), 1)
        w = _window_weights(norms, x, f_kind)
        raw = complex(np.sum(w * np.abs(lvals) ** 2))
        main = two_d_fc * x * math.log(x)
        rep = MomentReport("second", x, f_kind, raw, main, raw.real / main,
                           int(np.count_nonzero(w)), time.time() - t0,
                           slope, intercept, two_d_fc)
        rep.extras = {f"s2_over_x@{xi:g}": s / xi for xi, s in zip(gx, s2)}
        return rep
    if kind == "nonvanishing":
        w = _window_weights(norms, x, f_kind)
        tails = np.array([r.afe_tail_bound for r in records])
        nz = np.abs(lvals) > tails
        smoothed = float(np.sum(w * nz) / np.sum(w))
        sharp_mask = (norms > x) & (norms <= 2 * x)
        sharp = float(np.mean(nz[sharp_mask])) if np.any(sharp_mask) else float("nan")
        rep = MomentReport("nonvanishing", x, f_kind, complex(smoothed), 1 / 7,
                           smoothed / (1 / 7), int(np.count_nonzero(w)),
                           time.time() - t0)
        rep.extras = {"smoothed_fraction": smoothed, "sharp_fraction": sharp,
                      "undetermined": float(np.sum(~nz))}
        return rep
    raise ValueError(f"unknown moment kind {kind!r}")


def density_check(x: int, family: Sequence[FamilyElement]) -> Tuple[int, float]:
    """(count of family elements in (x, 2x], predicted kappa * x)."""
    count = sum(1 for el in family if x < el.norm <= 2 * x)
    return count, family_density() * x


# ---------------------------------------------------------------------------
# Mollifier
# ---------------------------------------------------------------------------

@dataclass
class MollifierSpec:
    """Short Dirichlet polynomial damping the L-values.

    Keys of xi/lam are primary generators of squarefree ideals coprime to 3
    with norm <= M; lam arises from xi by the Moebius-h inversion.
    """

    theta: float
    m_len: float
    xi: Dict[EisInt, float]
    lam: Dict[EisInt, float]

    def __post_init__(self):
        gens = sorted(self.lam, key=lambda g: g.key())
        self._aa = np.array([g.a for g in gens], dtype=np.int64)
        self._bb = np.array([g.b for g in gens], dtype=np.int64)
        self._coef = np.array([self.lam[g] * math.sqrt(g.norm) for g in gens])

    def value(self, q: EisInt) -> complex:
        """M(q) = sum over ideals b of lam(b) sqrt(N(b)) chi_q(b)."""
        codes = symbol_values_array(self._aa, self._bb, q)
        return complex(np.dot(self._coef, OMEGA_LUT[codes]))

    def abs_bound(self) -> float:
        """Triangle bound sum |lam(b)| sqrt(N(b)) on |M(q)|."""
        return float(np.sum(np.abs(self._coef)))


def trivial_mollifier(theta: float = 1.0 / 6.0) -> MollifierSpec:
    """M = 1: lam(1) = 1 only; mollified moments reduce to unmollified."""
    return MollifierSpec(theta, 1.0, {ONE: 1.0}, {ONE: 1.0})


def _squarefree_gens(m_len: float) -> List[Tuple[EisInt, List[EisInt]]]:
    from .factor import factor

    out = []
    for n, a, b in primary_elements(int(m_len)):
        gen = EisInt(int(a), int(b))
        f = factor(gen)
        if f.is_squarefree():
            out.append((gen, [pi for pi, _ in f.primes]))
    return out


def build_mollifier(theta: float, x: float,
                    consts_bound: int = 10**5) -> MollifierSpec:
    """Optimal-damping coefficients xi(d) = (C / (D log M)) G(d)/(N(d) H(d)).

    lam recovers from xi via lam(l) = sum_a mu(a) h(a) xi(l a); both live on
    squarefree ideals coprime to 3 with norm <= M = x^theta.
    """
    if not (0.0 < theta <= 1.0 / 6.0):
        raise ThetaOutOfRange(f"theta = {theta} outside (0, 1/6]")
    m_len = float(x) ** theta
    if m_len <= 1.0 + 1e-12:
        return trivial_mollifier(theta)
    scale = cached_constant("C", consts_bound) / (
        cached_constant("D", consts_bound) * math.log(m_len))
    gens = _squarefree_gens(m_len)
    xi: Dict[EisInt, float] = {}
    for gen, primes in gens:
        val = scale / gen.norm
        for pi in primes:
            val *= mf_G(pi.norm) / mf_H(pi.norm)
        xi[gen] = val
    lam: Dict[EisInt, float] = {}
    for gen, _ in gens:
        total = 0.0
        for agen, aprimes in gens:
            if gen.norm * agen.norm > m_len:
                continue
            if any(_divides(pi, gen) for pi in aprimes):
                continue  # need a coprime to l so that l*a stays squarefree
            mu_h = 1.0
            for pi in aprimes:
                mu_h *= -mf_h(pi.norm)
            total += mu_h * xi[gen * agen]
        lam[gen] = total
    return MollifierSpec(theta, m_len, xi, lam)


def q1_two_ways(spec: MollifierSpec) -> Tuple[float, float]:
    """Q1(M) two ways: sum lam(b) r(b)/sqrt(N(b)) and sum xi(d) G(d)."""
    from .factor import factor

    via_lam = 0.0
    for gen, lam in spec.lam.items():
        rb = 1.0
        for pi, _ in factor(gen).primes:
            rb *= mf_r(pi.norm)
        via_lam += lam * rb / math.sqrt(gen.norm)
    via_xi = 0.0
    for gen, xi in spec.xi.items():
        gd = 1.0
        for pi, _ in factor(gen).primes:
            gd *= mf_G(pi.norm)
        via_xi += xi * gd
    return via_lam, via_xi


def mollified_moment(x: float, spec: MollifierSpec,
                     records: Sequence[LValueRecord],
                     f_kind: str = "smoothstep") -> MomentReport:
    """First and second mollified moments and the Cauchy-Schwarz ratio.

    ratio = |S1|^2 / (S2 * S_count) <= 1 bounds the non-vanishing fraction
    from below; it is reported against theta/(theta+1).
    """
    t0 = time.time()
    norms = np.array([r.conductor_norm for r in records], dtype=float)
    w = _window_weights(norms, x, f_kind)
    keep = np.nonzero(w)[0]
    mvals = np.array([spec.value(records[i].q) for i in keep])
    lv = np.array([records[i].L_half for i in keep])
    wk = w[keep]
    s1 = complex(np.sum(wk * lv * mvals))
    s2 = float(np.sum(wk * np.abs(lv * mvals) ** 2))
    s_count = float(np.sum(wk))
    ratio = abs(s1) ** 2 / (s2 * s_count) if s2 > 0 and s_count > 0 else 0.0
    rep = MomentReport("mollified", x, f_kind, s1, s2, ratio,
                       len(keep), time.time() - t0)
    rep.extras = {"S2": s2, "S_count": s_count,
                  "cs_ratio": ratio,
                  "target_theta_over_1p": spec.theta / (spec.theta + 1.0)}
    return rep
