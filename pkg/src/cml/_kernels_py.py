"""Pure-Python/NumPy fallback for the hot kernels.

Mirrors the API of the compiled extension (_ckernels).  Exact integer
arithmetic throughout (Python ints never overflow), so this is also the
reference implementation the compiled kernels are tested against.
"""

from __future__ import annotations

import math
from typing import Tuple

import numpy as np

IMPLEMENTATION = "python"

_OMEGA = complex(-0.5, 0.8660254037844386467637231707529362)
_OMEGA_POW = (1.0 + 0j, _OMEGA, _OMEGA.conjugate())


def _supp_exponents(c: int, d: int) -> Tuple[int, int]:
    """(alpha2, alpha3) in {-1,0,1} for the primary denominator c + d*w.

    Determined by c + d*w = 1 + alpha2*lam^2 + alpha3*lam^3 mod 9; then
    (w / den) = w^alpha2 and (lam / den) = w^(-alpha3).
    """
    u = ((c % 9) - 1) // 3  # in {0,1,2}
    v = (d % 9) // 3
    a3 = v if v < 2 else v - 3
    t = (-u - a3) % 3
    a2 = t if t < 2 else t - 3
    return a2, a3


def cubic_symbol(a: int, b: int, c: int, d: int) -> int:
    """Cubic residue symbol ((a+bw) / (c+dw))_3 for primary c + d*w.

    Returns k in {0,1,2} for the value w^k, or 3 for the value 0 (non-coprime
    arguments).  Euclidean algorithm: reduce the top mod the bottom, strip
    powers of lam and the unit with the supplementary laws, swap the (now
    primary, coprime) pair by cubic reciprocity, repeat until the bottom is 1.
    """
    t = 0
    while True:
        n = c * c - c * d + d * d
        if n == 1:
            return t % 3
        # reduce a + b*w modulo c + d*w (rounded division)
        u = a * (c - d) + b * d
        v = b * c - a * d
        qa = (2 * u + n) // (2 * n)
        qb = (2 * v + n) // (2 * n)
        a -= qa * c - qb * d
        b -= qa * d + qb * c - qb * d
        if a == 0 and b == 0:
            return 3
        a2, a3 = _supp_exponents(c, d)
        # strip lam^j
        while (a + b) % 3 == 0:
            a, b = (2 * b - a) // 3, (b - 2 * a) // 3
            t -= a3
        # unit-normalize the top to primary form (exactly one of the six
        # associates +-w^e * top is primary; sign flips cost nothing)
        e = 0
        while not (a % 3 == 1 and b % 3 == 0):
            if (-a) % 3 == 1 and (-b) % 3 == 0:
                a, b = -a, -b
                continue
            a, b = -b, a - b  # multiply by w
            e += 1
        t -= e * a2
        # cubic reciprocity: (top/bottom) = (bottom/top), both primary
        a, b, c, d = c, d, a, b


def symbol_array(aa: np.ndarray, bb: np.ndarray, c: int, d: int) -> np.ndarray:
    """cubic_symbol for many tops against one primary bottom."""
    out = np.empty(len(aa), dtype=np.uint8)
    c = int(c)
    d = int(d)
    for i in range(len(aa)):
        out[i] = cubic_symbol(int(aa[i]), int(bb[i]), c, d)
    return out


def _powers_mod(g: int, count: int, p: int) -> np.ndarray:
    """[g^0, g^1, ..., g^(count-1)] mod p, vectorized in sqrt-blocks."""
    s = max(1, math.isqrt(count) + 1)
    inner = np.empty(s, dtype=np.int64)
    x = 1
    for i in range(s):
        inner[i] = x
        x = x * g % p
    gs = x  # g^s
    n_outer = (count + s - 1) // s
    outer = np.empty(n_outer, dtype=np.int64)
    x = 1
    for j in range(n_outer):
        outer[j] = x
        x = x * gs % p
    grid = (outer[:, None] * inner[None, :]) % p
    return grid.ravel()[:count]


def _primitive_root(p: int, spf: np.ndarray) -> int:
    m = p - 1
    qs = []
    while m > 1:
        q = int(spf[m])
        qs.append(q)
        while m % q == 0:
            m //= q
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in qs):
            return g
    raise AssertionError("no primitive root found")


def gauss_prime_sums(ps: np.ndarray, aa: np.ndarray, bb: np.ndarray,
                     spf: np.ndarray) -> np.ndarray:
    """g3(1, pi) for primary split primes pi = a + b*w of norm p.

    Reduces to the classical cubic Gauss sum mod p: with j = w mod pi and
    chi the cubic residue character mod p matching chi_pi, one has
    g3(1, pi) = conj(chi(2a - b)) * sum_t chi(t) e(t/p).
    """
    out = np.empty(len(ps), dtype=np.complex128)
    for i in range(len(ps)):
        p, a, b = int(ps[i]), int(aa[i]), int(bb[i])
        out[i] = _gauss_sum_one(p, a, b, spf)
    return out


def _gauss_sum_one(p: int, a: int, b: int, spf: np.ndarray) -> complex:
    g = _primitive_root(p, spf)
    j = (-a * pow(b, p - 2, p)) % p  # w mod pi
    assert (j * j + j + 1) % p == 0
    h = pow(g, (p - 1) // 3, p)
    eps = 1 if h == j else 2
    assert h == j or h == j * j % p
    t_seq = _powers_mod(g, p - 1, p)
    z = np.exp((2j * np.pi / p) * t_seq)
    k_seq = (eps * np.arange(p - 1, dtype=np.int64)) % 3
    gsum = complex(0)
    for k in range(3):
        gsum += _OMEGA_POW[k] * z[k_seq == k].sum()
    m = (2 * a - b) % p
    hm = pow(m, (p - 1) // 3, p)
    kappa = 0 if hm == 1 else (1 if hm == j else 2)
    return _OMEGA_POW[(-kappa) % 3] * gsum


def g3_factored(ra: int, rb: int,
                ptr: np.ndarray, pidx: np.ndarray, pexp: np.ndarray,
                pa: np.ndarray, pb: np.ndarray, pnorm: np.ndarray,
                pg3: np.ndarray) -> np.ndarray:
    """g3(r, c_i) for factored moduli c_i (CSR prime-power lists).

    Uses g3(r, c1*c2) = g3(r, c1) * g3(r*c1, c2) on the prime powers of c_i
    together with the local prime-power table and the twist
    g3(nu * pi^v, pi^l) = conj(chi_pi(nu))^l * g3(pi^v, pi^l).
    """
    n = len(ptr) - 1
    out = np.empty(n, dtype=np.complex128)
    for i in range(n):
        out[i] = _g3_one(int(ra), int(rb), ptr, pidx, pexp, pa, pb, pnorm, pg3, i)
    return out


def _g3_one(ra, rb, ptr, pidx, pexp, pa, pb, pnorm, pg3, i) -> complex:
    g = complex(1.0)
    ma, mb = 1, 0
    for k in range(int(ptr[i]), int(ptr[i + 1])):
        jj = int(pidx[k])
        ell = int(pexp[k])
        ca, cb = int(pa[jj]), int(pb[jj])
        q = int(pnorm[jj])
        # mu = r * m
        ua = ra * ma - rb * mb
        ub = ra * mb + rb * ma - rb * mb
        # v = v_pi(mu), nu = mu / pi^v
        v = 0
        while True:
            nn = ca * ca - ca * cb + cb * cb
            tu = ua * (ca - cb) + ub * cb
            tv = ub * ca - ua * cb
            if tu % nn or tv % nn:
                break
            ua, ub = tu // nn, tv // nn
            v += 1
        if ell <= v:
            if ell % 3:
                return 0.0
            local = float(q) ** ell - float(q) ** (ell - 1)  # phi(pi^ell)
        elif ell == v + 1:
            r3 = ell % 3
            if r3 == 0:
                local = -(float(q) ** v)
            elif r3 == 1:
                local = float(q) ** v * pg3[jj]
            else:
                local = float(q) ** v * np.conj(pg3[jj])
        else:
            return 0.0
        s = cubic_symbol(ua, ub, ca, cb)
        local = local * _OMEGA_POW[(-s * ell) % 3]
        g *= local
        # m *= pi^ell
        for _ in range(ell):
            ma, mb = ma * ca - mb * cb, ma * cb + mb * ca - mb * cb
    return g


def a2_pair_sum(vals: np.ndarray, tvals: np.ndarray, w: np.ndarray,
                bound: int) -> complex:
    """sum over pairs (i, j) with vals[i]*vals[j] <= bound of
    tvals[i] * conj(tvals[j]) * w[vals[i]*vals[j]].

    vals must be sorted ascending; w is indexed by the integer product.
    """
    acc = complex(0)
    n = len(vals)
    for i in range(n):
        vi = int(vals[i])
        if vi * int(vals[0]) > bound:
            break
        lim = bound // vi
        hi = np.searchsorted(vals, lim, side="right")
        if hi == 0:
            continue
        prods = vi * vals[:hi]
        acc += tvals[i] * np.vdot(tvals[:hi], w[prods])
    return acc
