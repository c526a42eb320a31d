"""Numerical laboratory for twisted sums of cubic Gauss sums.

The Dirichlet series psi(r, s) = sum over primary c of g3(r, c) N(c)^(-s)
has a simple pole at s = 4/3 with residue c0 tau3(r) / N(r)^(1/6); via
Perron this transfers to the normalized partial sums

    sum_{N(n) <= T} g3~(r, n)  ~  (6/5) c0 tau3(r) N(r)^(-1/6) T^(5/6),

the T^(5/6) bias of the Gauss-sum angles.  This module provides truncated
psi evaluations, that polar prediction, dyadic bias scans, the exact
coprimality-removal identities (checked at matched truncation), a cubic
large-sieve ratio probe, and the radial Poisson-summation identity check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .eisenstein import EisInt, LAMBDA, ONE, as_eis, primary_elements, residues_mod_pairs
from .errors import CapExceeded, ZeroInput
from .factor import (
    PrimeTable,
    factor,
    is_squarefree,
    shared_prime_table,
    smallest_prime_factor_table,
)
from .gauss import GaussSumTable, g3_fast, tau3
from .symbols import OMEGA_LUT, symbol_values_array
from .weights import v_ddot

PSI_CAP = 10**7


# ---------------------------------------------------------------------------
# Factored element table (CSR) for bulk Gauss-sum evaluation
# ---------------------------------------------------------------------------

class BiasContext:
    """Primary elements up to a bound with factorizations and prime data.

    The CSR layout (ptr/idx/exp into the prime arrays) feeds the factored
    Gauss-sum kernel; built once, read-only afterwards.
    """

    def __init__(self, bound: int, gauss_table: Optional[GaussSumTable] = None,
                 prime_table: Optional[PrimeTable] = None):
        self.bound = int(bound)
        pt = prime_table if prime_table is not None else shared_prime_table(self.bound)
        self.gauss = gauss_table if gauss_table is not None else \
            GaussSumTable.build(self.bound, pt)
        spf = smallest_prime_factor_table(self.bound)
        rows = primary_elements(self.bound)
        self.norms = np.ascontiguousarray(rows[:, 0])
        self.pa = np.ascontiguousarray(rows[:, 1])
        self.pb = np.ascontiguousarray(rows[:, 2])
        n = len(rows)
        ptr = np.zeros(n + 1, dtype=np.int64)
        idx: List[int] = []
        exps: List[int] = []
        g = self.gauss
        inert_idx = {int(p): g.prime_index(EisInt(-int(p), 0)) for p in pt.inert_p}
        split_idx = {}
        for p in pt.split_p:
            pi, pibar = pt.split_prime(int(p))
            split_idx[int(p)] = (pi.a, pi.b, pi.norm,
                                 g.prime_index(pi), g.prime_index(pibar))
        for i in range(n):
            nn, xa, xb = int(rows[i, 0]), int(rows[i, 1]), int(rows[i, 2])
            m = nn
            while m > 1:
                p = int(spf[m])
                e = 0
                while m % p == 0:
                    m //= p
                    e += 1
                if p % 3 == 2:
                    idx.append(inert_idx[p])
                    exps.append(e // 2)
                    continue
                ca, cb, cn, i1, i2 = split_idx[p]
                # valuation of pi in x by exact division (raw coordinates)
                v, ya, yb = 0, xa, xb
                while v < e:
                    ua = ya * (ca - cb) + yb * cb
                    ub = yb * ca - ya * cb
                    if ua % cn or ub % cn:
                        break
                    ya, yb = ua // cn, ub // cn
                    v += 1
                if v:
                    idx.append(i1)
                    exps.append(v)
                if e - v:
                    idx.append(i2)
                    exps.append(e - v)
            ptr[i + 1] = len(idx)
        self.ptr = ptr
        self.pidx = np.array(idx, dtype=np.int64)
        self.pexp = np.array(exps, dtype=np.int64)

    def g3_array(self, shift) -> np.ndarray:
        """g3(shift, n) for every primary n with N(n) <= bound (unnormalized)."""
        shift = as_eis(shift)
        if shift.is_zero():
            raise ZeroInput("shift must be nonzero")
        return kernels.g3_factored(shift.a, shift.b, self.ptr, self.pidx,
                                   self.pexp, self.gauss.pa, self.gauss.pb,
                                   self.gauss.pnorm, self.gauss.g3)


def _valuation_pair(pi: EisInt, x: EisInt) -> int:
    v = 0
    while True:
        q, r = divmod(x, pi)
        if not r.is_zero():
            return v
        x, v = q, v + 1


# ---------------------------------------------------------------------------
# Truncated psi and the coprimality-removal identities
# ---------------------------------------------------------------------------

def _coprime_mask(ctx: BiasContext, alpha: EisInt) -> np.ndarray:
    mask = np.ones(len(ctx.norms), dtype=bool)
    if alpha.norm == 1:
        return mask
    for pi, _ in factor(alpha).primes:
        nn = pi.norm
        ua = ctx.pa * (pi.a - pi.b) + ctx.pb * pi.b
        ub = ctx.pb * pi.a - ctx.pa * pi.b
        mask &= ~((ua % nn == 0) & (ub % nn == 0))
    return mask


def psi_truncated(r, s: complex, t_bound: float, alpha=ONE,
                  ctx: Optional[BiasContext] = None, cap: int = PSI_CAP) -> complex:
    """sum over primary c with N(c) <= T, (c, alpha) = 1 of g3(r, c) N(c)^(-s)."""
    r, alpha = as_eis(r), as_eis(alpha)
    if r.is_zero():
        raise ZeroInput("psi shift must be nonzero")
    if t_bound > cap:
        raise CapExceeded(f"T = {t_bound} exceeds cap {cap}")
    if ctx is None or ctx.bound < t_bound:
        ctx = BiasContext(int(t_bound))
    k = int(np.searchsorted(ctx.norms, t_bound, side="right"))
    g3 = ctx.g3_array(r)[:k]
    mask = _coprime_mask(ctx, alpha)[:k]
    return complex(np.sum(g3[mask] * ctx.norms[:k][mask].astype(float) ** (-s)))


def delta_alpha(alpha, s: complex) -> complex:
    """prod over primes pi | alpha of (1 - N(pi)^(2 - 3s))."""
    out = 1.0 + 0j
    for pi, _ in factor(as_eis(alpha)).primes:
        out *= 1.0 - float(pi.norm) ** complex(2 - 3 * s)
    return out


def _element_divisors(x: EisInt) -> List[Tuple[EisInt, int]]:
    """(d, mu(d)) over primary divisors of squarefree primary x."""
    primes = [pi for pi, _ in factor(x).primes]
    out = []
    for mask in range(1 << len(primes)):
        d = ONE
        bits = 0
        for i, pi in enumerate(primes):
            if mask >> i & 1:
                d = d * pi
                bits += 1
        out.append((d, (-1) ** bits))
    return out


def coprimality_identity_check(alpha, beta, r, s: complex = 2.0,
                               t_bound: float = 10**4,
                               ctx: Optional[BiasContext] = None) -> Dict[str, float]:
    """Residuals of the three coprimality-removal identities at matched T.

    Requires mu^2(alpha) = 1 and (alpha, beta * r) = 1.  Both sides use
    psi's truncated at the same length T, so the residual is a tail
    mismatch of size O(T^(-1/2)) at Re(s) = 2.
    """
    from .eisenstein import gcd as eis_gcd

    alpha, beta, r = as_eis(alpha), as_eis(beta), as_eis(r)
    if not is_squarefree(alpha):
        raise ValueError("alpha must be squarefree")
    if eis_gcd(alpha, beta * r).norm != 1:
        raise ValueError("(alpha, beta r) must be 1")
    if ctx is None:
        ctx = BiasContext(int(t_bound))
    ab = alpha * beta
    da = delta_alpha(alpha, s)
    divs = _element_divisors(alpha)
    out: Dict[str, float] = {}
    # (i)
    lhs = psi_truncated(alpha * alpha * r, s, t_bound, ab, ctx) * da
    rhs = psi_truncated(alpha * alpha * r, s, t_bound, beta, ctx)
    out["i"] = abs(lhs - rhs)
    # (ii)
    lhs = psi_truncated(alpha * r, s, t_bound, ab, ctx) * da
    rhs = 0.0 + 0j
    for d, mu in divs:
        arg = (alpha * r) // d
        rhs += (mu * float(d.norm) ** complex(1 - 2 * s)
                * np.conj(g3_fast(arg, d, ctx.gauss))
                * psi_truncated(arg, s, t_bound, beta, ctx))
    out["ii"] = abs(lhs - rhs)
    # (iii)
    lhs = psi_truncated(r, s, t_bound, ab, ctx) * da
    rhs = 0.0 + 0j
    for d, mu in divs:
        rhs += (mu * float(d.norm) ** complex(-s) * g3_fast(r, d, ctx.gauss)
                * psi_truncated(r * d, s, t_bound, beta, ctx))
    out["iii"] = abs(lhs - rhs)
    return out


def cube_free_removal_check(a, b, c, r, s: complex = 2.0,
                            t_bound: float = 10**4,
                            ctx: Optional[BiasContext] = None) -> float:
    """Residual of the cube-free-twist removal identity at matched T:

    psi_{abc}(a b^2 r, s) = Delta_{abc}(s)^(-1) * double sum over d | a,
    e | c of mu(de) N(d) N(d^2 e)^(-s) conj(g3(a b^2 r / d, d))
    g3(a b^2 r / d, e) psi(a b^2 e r / d, s).
    """
    from .eisenstein import gcd as eis_gcd

    a, b, c, r = as_eis(a), as_eis(b), as_eis(c), as_eis(r)
    abc = a * b * c
    if not is_squarefree(abc):
        raise ValueError("abc must be squarefree")
    if eis_gcd(abc, r).norm != 1:
        raise ValueError("(abc, r) must be 1")
    if ctx is None:
        ctx = BiasContext(int(t_bound))
    shift = a * b * b * r
    lhs = psi_truncated(shift, s, t_bound, abc, ctx)
    rhs = 0.0 + 0j
    for d, mu_d in _element_divisors(a):
        arg = shift // d
        gd = np.conj(g3_fast(arg, d, ctx.gauss))
        for e, mu_e in _element_divisors(c):
            rhs += (mu_d * mu_e * float(d.norm)
                    * float(d.norm ** 2 * e.norm) ** complex(-s)
                    * gd * g3_fast(arg, e, ctx.gauss)
                    * psi_truncated(arg * e, s, t_bound, ONE, ctx))
    rhs /= delta_alpha(abc, s)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# Polar prediction and the dyadic bias scan
# ---------------------------------------------------------------------------

def polar_prediction(r, table: Optional[GaussSumTable] = None) -> complex:
    """Residue of psi(r, s) at s = 4/3: c0 tau3(r) / N(r)^(1/6)."""
    from .euler import constant

    r = as_eis(r)
    if r.is_zero():
        raise ZeroInput("polar_prediction(0)")
    c0 = constant("c0").value
    return c0 * tau3(r, table) / float(r.norm) ** (1.0 / 6.0)


@dataclass
class BiasReport:
    shift: EisInt
    ts: np.ndarray
    partial_sums: np.ndarray
    predictions: np.ndarray
    exponent: float
    exponent_window: Tuple[float, float]
    ratio: complex

    def abs_ratio(self) -> float:
        return abs(self.ratio)


def bias_scan(k, t_max: float, ctx: Optional[BiasContext] = None,
              n_dyadic: int = 11, fit_min_t: float = 10**3,
              cap: float = 10**7) -> BiasReport:
    """Partial sums S(T) = sum_{N(n) <= T} g3~(k, n) on a dyadic T grid.

    Fits the growth exponent of |S| on the dyadic points with T >= fit_min_t
    and forms the ratio against the Perron transfer of the polar term,
    (6/5) c0 tau3(k) N(k)^(-1/6) T^(5/6).
    """
    k = as_eis(k)
    if t_max > cap:
        raise CapExceeded(f"T = {t_max} exceeds cap {cap}")
    if ctx is None or ctx.bound < t_max:
        ctx = BiasContext(int(t_max))
    vals = ctx.g3_array(k) / np.sqrt(ctx.norms.astype(float))
    csum = np.cumsum(vals)
    ts = t_max / 2.0 ** np.arange(n_dyadic - 1, -1, -1)
    cuts = np.searchsorted(ctx.norms, ts, side="right")
    sums = np.where(cuts > 0, csum[np.maximum(cuts - 1, 0)], 0.0)
    coef = (6.0 / 5.0) * polar_prediction(k, ctx.gauss)
    preds = coef * ts ** (5.0 / 6.0)
    fit = ts >= fit_min_t
    mags = np.abs(sums[fit])
    expo = float(np.polyfit(np.log(ts[fit]), np.log(np.maximum(mags, 1e-300)), 1)[0])
    ratio = complex(sums[-1] / preds[-1]) if preds[-1] != 0 else complex(np.inf)
    return BiasReport(k, ts, sums, preds, expo, (float(ts[fit][0]), float(ts[-1])),
                      ratio)


# ---------------------------------------------------------------------------
# Cubic large-sieve ratio probe
# ---------------------------------------------------------------------------

def _squarefree_primary_coords(bound: int) -> Tuple[np.ndarray, np.ndarray]:
    rows = primary_elements(bound)
    keep = [i for i in range(len(rows))
            if is_squarefree(EisInt(int(rows[i, 1]), int(rows[i, 2])))]
    sel = rows[keep]
    return sel[:, 1].copy(), sel[:, 2].copy()


def large_sieve_ratio(a_bound: int, b_bound: int, trials: int = 20,
                      seed: int = 1, cap: int = 5000) -> Dict[str, float]:
    """max over random sign vectors of LHS / (||lambda||^2 (A + B + (AB)^(2/3))).

    LHS = sum over squarefree primary a <= A of
    |sum over squarefree primary b <= B of lambda_b chi_a(b)|^2.
    The implied constant of the bound is inexplicit, so the ratio is
    reported, not asserted against a hard threshold.
    """
    if max(a_bound, b_bound) > cap:
        raise CapExceeded(f"bounds exceed cap {cap}")
    aa, ab = _squarefree_primary_coords(a_bound)
    ba, bb = _squarefree_primary_coords(b_bound)
    mat = np.empty((len(aa), len(ba)), dtype=np.complex128)
    for i in range(len(aa)):
        codes = kernels.symbol_array(ba, bb, int(aa[i]), int(ab[i]))
        mat[i] = OMEGA_LUT[codes]
    normalizer = a_bound + b_bound + (a_bound * b_bound) ** (2.0 / 3.0)
    worst = 0.0
    for t in range(trials):
        rng = np.random.default_rng(seed * 100003 + t)
        lam = rng.choice([-1.0, 1.0], size=len(ba))
        lhs = float(np.sum(np.abs(mat @ lam) ** 2))
        ratio = lhs / (float(np.sum(lam**2)) * normalizer)
        worst = max(worst, ratio)
    return {"max_ratio": worst, "n_a": float(len(aa)), "n_b": float(len(ba)),
            "normalizer": normalizer}


# ---------------------------------------------------------------------------
# Radial Poisson summation check
# ---------------------------------------------------------------------------

def poisson_check(q, c_class=ONE, m_scale: float = 400.0,
                  v_kind: str = "bump", k_start: int = 12,
                  tail_tol: float = 1e-11) -> Dict[str, float]:
    """Residual of the radial Poisson identity for Psi = chi_q.

    LHS: sum over lattice m = c mod 9 of chi_q(m) V(N(m)/M).
    RHS: (4 pi M / (3^(9/2) N(q))) * sum over k of Psi''(k)
         e(Tr(-k c q^2 / (9 lam))) Vdd(k sqrt(M)/q), with Psi'' the finite
         Fourier transform of b -> chi_q(9 lam b) mod q and Vdd the radial
         Bessel transform.  Both sides are computed independently.
    """
    q, c_class = as_eis(q), as_eis(c_class)
    if q.norm > 50:
        raise CapExceeded("poisson_check supports N(q) <= 50")
    # --- LHS ---------------------------------------------------------------
    box = int(math.isqrt(int(8 * m_scale))) + 2
    g = np.arange(-box, box + 1, dtype=np.int64)
    A, B = np.meshgrid(g, g, indexing="ij")
    sel = ((A % 9 == c_class.a % 9) & (B % 9 == c_class.b % 9))
    A, B = A[sel], B[sel]
    nrm = A * A - A * B + B * B
    win = (nrm > m_scale) & (nrm < 2 * m_scale)  # V supported in (1,2)
    A, B, nrm = A[win], B[win], nrm[win]
    from .weights import test_function

    if q.norm == 1:
        chi = np.ones(len(A))
    else:
        chi = OMEGA_LUT[kernels.symbol_array(A.copy(), B.copy(), q.a, q.b)]
    lhs = complex(np.sum(chi * test_function(v_kind, nrm / m_scale)))
    # --- RHS ---------------------------------------------------------------
    prefactor = 4 * math.pi * m_scale / (3.0**4.5 * q.norm)
    res = residues_mod_pairs(q)
    if q.norm == 1:
        chi_b = np.ones(1)
    else:
        nine_lam = EisInt(9, 0) * LAMBDA
        scaled_a = nine_lam.a * res[:, 0] - nine_lam.b * res[:, 1]
        scaled_b = nine_lam.a * res[:, 1] + nine_lam.b * res[:, 0] - nine_lam.b * res[:, 1]
        chi_b = OMEGA_LUT[kernels.symbol_array(
            np.ascontiguousarray(scaled_a), np.ascontiguousarray(scaled_b), q.a, q.b)]
    qc = q.conj()
    vdd_cache: Dict[int, float] = {}

    def vdd(knorm: int) -> float:
        if knorm not in vdd_cache:
            vdd_cache[knorm] = v_ddot(v_kind, math.sqrt(knorm * m_scale / q.norm))
        return vdd_cache[knorm]

    def psi_dd(ka: int, kb: int) -> complex:
        # sum over b mod q of chi_q(9 lam b) e(Tr(-k b conj(q))/N(q))
        w = EisInt(ka, kb) * qc
        ua = w.a * res[:, 0] - w.b * res[:, 1]
        ub = w.a * res[:, 1] + w.b * res[:, 0] - w.b * res[:, 1]
        ph = np.exp((-2j * math.pi / q.norm) * ((2 * ua - ub) % q.norm))
        return complex(np.dot(chi_b, ph))

    def phase27(ka: int, kb: int) -> complex:
        # e(Tr(-k c q^2 / (9 lam))) = e(Tr(k c q^2 lam) / 27)
        w = EisInt(ka, kb) * c_class * q * q * LAMBDA
        return complex(np.exp(2j * math.pi * ((2 * w.a - w.b) % 27) / 27.0))

    kbox = k_start
    rhs = 0.0 + 0j
    done: set = set()
    psi_cap = float(q.norm)  # |Psi''(k)| <= number of residues
    while True:
        added = 0.0
        for ka in range(-kbox, kbox + 1):
            for kb in range(-kbox, kbox + 1):
                if (ka, kb) in done:
                    continue
                done.add((ka, kb))
                kn = ka * ka - ka * kb + kb * kb
                if kn == 0:
                    term = psi_dd(0, 0) * vdd(0) + 0j
                elif psi_cap * abs(vdd(kn)) < 0.01 * tail_tol:
                    term = 0.0
                else:
                    term = psi_dd(ka, kb) * phase27(ka, kb) * vdd(kn)
                rhs += term
                added += abs(term)
        # a priori bound on the next shell: min |k|^2 on it is kbox^2 * 3/4
        nxt = psi_cap * abs(vdd(int(0.75 * kbox * kbox) + 1)) * 12 * kbox
        if added + nxt < tail_tol * max(1.0, abs(rhs)) or kbox > 192:
            break
        kbox *= 2
    rhs *= prefactor
    scale = max(abs(lhs), abs(rhs), 1e-30)
    return {"lhs_re": lhs.real, "lhs_im": lhs.imag,
            "rhs_re": rhs.real, "rhs_im": rhs.imag,
            "residual": abs(lhs - rhs), "relative": abs(lhs - rhs) / scale,
            "k_box": float(kbox)}
