"""Cubic Gauss sums g3(mu, c), their normalized and twisted variants,
root numbers, and the Fourier coefficients tau3 of the cubic theta function.

Two evaluation routes are kept deliberately independent:

* g3_direct sums over an exact residue system mod c with exact rational
  phase arguments (integer k / N(c)); cost O(N(c)).
* g3_fast factors c and assembles the sum from prime data using twisted
  multiplicativity g3(mu, c1 c2) = g3(mu, c1) g3(mu c1, c2) and the local
  prime-power table; cost O(log N(c)) given the prime table.

Prime values g3(pi) come from a classical-character walk mod p for split
primes (norm p), and equal p itself for inert primes (the sum is real and
the cube relation g3(pi)^3 = -pi^2 conj(pi) fixes it to +p).
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from . import kernels
from .eisenstein import (
    EisInt,
    LAMBDA,
    ONE,
    as_eis,
    gcd as eis_gcd,
    primary_associate,
    primary_decompose,
    residues_mod_pairs,
)
from .errors import BadModulus, CapExceeded, NotInFamily, NotSplit, ZeroInput
from .factor import (
    EisFactorization,
    check_primary_prime,
    factor,
    is_rational_prime,
    rational_primes_upto,
    smallest_prime_factor_table,
)
from .symbols import OMEGA_LUT, symbol, symbol_values_array

DIRECT_CAP = 10**6


def _exact_phases(mu: EisInt, c: EisInt, pairs: np.ndarray) -> np.ndarray:
    """e(Tr(mu*d/c)) for residues d, with the argument reduced exactly.

    mu*d/c = mu*d*conj(c)/N(c) has trace (integer k_d)/N(c); the phases are
    exp(2 pi i k_d / N) with k_d computed in exact integer arithmetic.
    """
    n = c.norm
    cc = c.conj()
    w = mu * cc  # mu * conj(c)
    da, db = pairs[:, 0], pairs[:, 1]
    # (w * d) coordinates: w = (wa, wb), d = (da, db)
    ua = w.a * da - w.b * db
    ub = w.a * db + w.b * da - w.b * db
    k = (2 * ua - ub) % n
    return np.exp((2j * np.pi / n) * k)


def g3_direct(mu, c, cap: int = DIRECT_CAP) -> complex:
    """g3(mu, c) = sum over d mod c of chi_c(d) e(Tr(mu d / c))."""
    mu, c = as_eis(mu), as_eis(c)
    if c.is_zero() or not c.is_primary():
        raise BadModulus(f"modulus {c} must be = 1 mod 3")
    if c.norm > cap:
        raise CapExceeded(f"N(c) = {c.norm} exceeds direct cap {cap}")
    if c.norm == 1:
        return 1.0 + 0j
    pairs = residues_mod_pairs(c)
    codes = symbol_values_array(pairs[:, 0], pairs[:, 1], c)
    return complex(np.dot(OMEGA_LUT[codes], _exact_phases(mu, c, pairs)))


@dataclass
class GaussSumTable:
    """g3(pi) for every primary prime pi with N(pi) <= bound.

    Arrays are indexed consistently: pa/pb are coordinates, pnorm the norms,
    g3 the Gauss sums.  Index layout: for each split rational prime p the
    stored representative pi (smallest (norm,a,b) key) is immediately
    followed by the primary associate of conj(pi); inert primes follow.
    """

    bound: int
    pa: np.ndarray
    pb: np.ndarray
    pnorm: np.ndarray
    g3: np.ndarray
    _index: Dict[Tuple[int, int], int] = field(default_factory=dict, repr=False)

    @staticmethod
    def build(bound: int, prime_table=None, cache_path: Optional[str] = None,
              spf: Optional[np.ndarray] = None) -> "GaussSumTable":
        from .factor import shared_prime_table

        pt = prime_table if prime_table is not None else shared_prime_table(bound)
        cached: Dict[Tuple[int, int], complex] = {}
        if cache_path and os.path.exists(cache_path):
            cached = _read_g3_cache(cache_path)
        split_p = pt.split_p
        need = [i for i, p in enumerate(split_p)
                if (int(pt.split_a[i]), int(pt.split_b[i])) not in cached]
        if need:
            if spf is None:
                spf = smallest_prime_factor_table(max(int(split_p.max(initial=2)), 2))
            vals = kernels.gauss_prime_sums(
                np.ascontiguousarray(split_p[need]),
                np.ascontiguousarray(pt.split_a[need]),
                np.ascontiguousarray(pt.split_b[need]), spf)
            for j, i in enumerate(need):
                cached[(int(pt.split_a[i]), int(pt.split_b[i]))] = complex(vals[j])
        rows = []
        for i, p in enumerate(split_p):
            a, b = int(pt.split_a[i]), int(pt.split_b[i])
            g = cached[(a, b)]
            pi = EisInt(a, b)
            _, pibar = primary_associate(pi.conj())
            rows.append((a, b, int(p), g))
            rows.append((pibar.a, pibar.b, int(p), g.conjugate()))
        for p in pt.inert_p:
            # inert primes: the sum is real and the cube relation forces +p
            rows.append((-int(p), 0, int(p) * int(p), complex(p)))
        pa = np.array([r[0] for r in rows], dtype=np.int64)
        pb = np.array([r[1] for r in rows], dtype=np.int64)
        pn = np.array([r[2] for r in rows], dtype=np.int64)
        g3 = np.array([r[3] for r in rows], dtype=np.complex128)
        index = {(int(pa[i]), int(pb[i])): i for i in range(len(rows))}
        table = GaussSumTable(bound, pa, pb, pn, g3, index)
        if cache_path:
            _write_g3_cache(cache_path, table)
        return table

    def g3_prime(self, pi) -> complex:
        pi = as_eis(pi)
        try:
            return complex(self.g3[self._index[(pi.a, pi.b)]])
        except KeyError:
            raise KeyError(f"prime {pi} not in table (bound {self.bound})") from None

    def prime_index(self, pi: EisInt) -> int:
        return self._index[(pi.a, pi.b)]


def _write_g3_cache(path: str, table: GaussSumTable) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a", "b", "re", "im"])
        for i in range(len(table.pa)):
            if table.pnorm[i] == table.pa[i] * table.pa[i]:  # skip inert (trivial)
                continue
            w.writerow([int(table.pa[i]), int(table.pb[i]),
                        repr(float(table.g3[i].real)), repr(float(table.g3[i].imag))])
    os.replace(tmp, path)


def _read_g3_cache(path: str) -> Dict[Tuple[int, int], complex]:
    out: Dict[Tuple[int, int], complex] = {}
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        if next(r, None) != ["a", "b", "re", "im"]:
            return {}
        for row in r:
            out[(int(row[0]), int(row[1]))] = complex(float(row[2]), float(row[3]))
    return out


def _g3_local(mu: EisInt, pi: EisInt, ell: int, g3pi: complex) -> complex:
    """g3(mu, pi^ell) via the prime-power table and the coprime twist."""
    q = pi.norm
    v = 0
    nu = mu
    while True:
        quot, rem = divmod(nu, pi)
        if not rem.is_zero():
            break
        nu, v = quot, v + 1
    if ell <= v:
        if ell % 3:
            return 0.0
        local = float(q) ** ell - float(q) ** (ell - 1)
    elif ell == v + 1:
        r3 = ell % 3
        if r3 == 0:
            local = -(float(q) ** v)
        elif r3 == 1:
            local = float(q) ** v * g3pi
        else:
            local = float(q) ** v * np.conj(g3pi)
    else:
        return 0.0
    s = symbol(nu, pi)
    return local * complex(OMEGA_LUT[(-s.code * ell) % 3])


def g3_fast(mu, c, table: Optional[GaussSumTable] = None,
            fact: Optional[EisFactorization] = None) -> complex:
    """g3(mu, c) assembled from the factorization of c."""
    mu, c = as_eis(mu), as_eis(c)
    if c.is_zero() or not c.is_primary():
        raise BadModulus(f"modulus {c} must be = 1 mod 3")
    if mu.is_zero():
        # g3(0, c) = phi(c) if c is a cube, else 0
        f = fact if fact is not None else factor(c)
        if any(e % 3 for _, e in f.primes):
            return 0.0
        val = 1.0
        for pi, e in f.primes:
            q = float(pi.norm)
            val *= q**e - q ** (e - 1)
        return complex(val)
    f = fact if fact is not None else factor(c)
    if table is None:
        table = _default_table(c.norm)
    g = 1.0 + 0j
    m = ONE
    for pi, e in f.primes:
        g *= _g3_local(mu * m, pi, e, table.g3_prime(pi))
        if g == 0:
            return 0.0
        m = m * pi**e
    return complex(g)


_TABLE_CACHE: Dict[int, GaussSumTable] = {}


def _default_table(min_bound: int) -> GaussSumTable:
    for b, t in _TABLE_CACHE.items():
        if b >= min_bound:
            return t
    bound = max(min_bound, 10**4)
    table = GaussSumTable.build(bound)
    _TABLE_CACHE.clear()
    _TABLE_CACHE[bound] = table
    return table


def g3_tilde(mu, c, table=None, fact=None) -> complex:
    """Normalized Gauss sum g3(mu, c) / sqrt(N(c))."""
    c = as_eis(c)
    return g3_fast(mu, c, table, fact) / math.sqrt(c.norm)


def cube_relation_check(pi, require_split: bool = False,
                        table: Optional[GaussSumTable] = None) -> float:
    """|g3(pi)^3 + pi^2 conj(pi)| for a primary prime (exact relation: 0)."""
    pi = check_primary_prime(pi)
    if require_split and not is_rational_prime(pi.norm):
        raise NotSplit(f"{pi} is inert, not split")
    if table is not None:
        g = table.g3_prime(pi)
    elif pi.norm <= DIRECT_CAP:
        g = g3_direct(1, pi)
    else:
        g = g3_fast(1, pi)
    target = (pi * pi * pi.conj()).to_complex()
    return abs(g**3 + target)


def h3_tilde(mu, c1, c2, cap: int = DIRECT_CAP) -> complex:
    """Finite Fourier transform of chi_{c1 c2^2} at mu, normalized.

    N(c1 c2)^{-1/2} sum over x mod c1 c2 coprime to c1 c2 of
    chi_{c1}(x) conj(chi_{c2}(x)) e(Tr(mu x / (c1 c2))).
    """
    mu, c1, c2 = as_eis(mu), as_eis(c1), as_eis(c2)
    m = c1 * c2
    if m.is_zero() or not m.is_primary():
        raise BadModulus("c1 c2 must be = 1 mod 3")
    if m.norm > cap:
        raise CapExceeded(f"N(c1 c2) = {m.norm} exceeds cap {cap}")
    if m.norm == 1:
        return 1.0 + 0j
    pairs = residues_mod_pairs(m)
    s1 = symbol_values_array(pairs[:, 0], pairs[:, 1], c1) if c1.norm > 1 else None
    s2 = symbol_values_array(pairs[:, 0], pairs[:, 1], c2) if c2.norm > 1 else None
    chi = np.ones(len(pairs), dtype=np.complex128)
    if s1 is not None:
        chi *= OMEGA_LUT[s1]
    if s2 is not None:
        chi *= np.conj(OMEGA_LUT[s2])
    # enforce coprimality to both factors even when one modulus is 1
    phases = _exact_phases(mu, m, pairs)
    return complex(np.dot(chi, phases)) / math.sqrt(m.norm)


def _check_family(q1: EisInt, q2: EisInt) -> None:
    from .factor import is_squarefree

    if not (q1.is_primary() and q2.is_primary()):
        raise NotInFamily("q1, q2 must be primary")
    prod = q1 * q2
    if prod.is_zero() or not is_squarefree(prod):
        raise NotInFamily("q1 q2 must be squarefree (so q1, q2 coprime and squarefree)")
    q = q1 * q2 * q2
    if (q.a % 9, q.b % 9) != (1, 0):
        raise NotInFamily(f"q = q1 q2^2 = {q} is not 1 mod 9")
    if q == ONE:
        raise NotInFamily("q = 1 is excluded from the family")


def root_number(q1, q2=ONE, method: str = "product",
                table: Optional[GaussSumTable] = None,
                cap: int = DIRECT_CAP) -> complex:
    """W(chi_q)/sqrt(N(q1 q2)) for q = q1 q2^2 in the mod-9 family.

    method="product" uses g3~(q1) * conj(g3~(q2)); method="direct" evaluates
    the defining character sum W = sum_x chi_q(x) e(Tr(x/(lam q1 q2))).
    """
    q1, q2 = as_eis(q1), as_eis(q2)
    _check_family(q1, q2)
    if method == "product":
        return g3_tilde(1, q1, table) * np.conj(g3_tilde(1, q2, table))
    if method != "direct":
        raise ValueError("method must be 'product' or 'direct'")
    m = q1 * q2
    if m.norm > cap:
        raise CapExceeded(f"N(q1 q2) = {m.norm} exceeds cap {cap}")
    pairs = residues_mod_pairs(m)
    chi = np.ones(len(pairs), dtype=np.complex128)
    if q1.norm > 1:
        chi *= OMEGA_LUT[symbol_values_array(pairs[:, 0], pairs[:, 1], q1)]
    if q2.norm > 1:
        chi *= np.conj(OMEGA_LUT[symbol_values_array(pairs[:, 0], pairs[:, 1], q2)])
    # phases e(Tr(x / (lam m))): x * conj(lam m) / (3 N(m))
    n3 = 3 * m.norm
    w = (LAMBDA * m).conj()
    ua = w.a * pairs[:, 0] - w.b * pairs[:, 1]
    ub = w.a * pairs[:, 1] + w.b * pairs[:, 0] - w.b * pairs[:, 1]
    k = (2 * ua - ub) % n3
    phases = np.exp((2j * np.pi / n3) * k)
    return complex(np.dot(chi, phases)) / math.sqrt(m.norm)


# ---------------------------------------------------------------------------
# Patterson theta coefficients
# ---------------------------------------------------------------------------

_E_NINTH = complex(np.exp(-2j * np.pi / 9))  # e(-1/9)


def _cube_split(c: EisInt, fact: Optional[EisFactorization] = None
                ) -> Optional[Tuple[EisInt, EisInt]]:
    """Write a primary element as c0 * d^3 with c0 primary squarefree.

    Returns None when impossible (some prime exponent is 2 mod 3).
    """
    f = fact if fact is not None else factor(c)
    c0, d = ONE, ONE
    for pi, e in f.primes:
        r = e % 3
        if r == 2:
            return None
        if r == 1:
            c0 = c0 * pi
        d = d * pi ** (e // 3)
    return c0, d


def tau3(r, table: Optional[GaussSumTable] = None,
         fact: Optional[EisFactorization] = None) -> complex:
    """Fourier coefficient of the cubic theta function at r in Z[w].

    Nonzero only for r = +-w^a lam^m c d^3 with c primary squarefree and
    either m = 2 mod 3 (unit class a = 0,1,2 with phases 1, e(-1/9), e(1/9)
    and Gauss-sum shifts lam^2, w lam^2, w^2 lam^2) or m = 0 mod 3 with
    a = 0 (shift 1).  Writing m = 3n-4 resp. 3n-3 the magnitudes carry
    3^(n/2+2) resp. 3^((n+5)/2) times |d/c|.
    """
    r = as_eis(r)
    if r.is_zero():
        raise ZeroInput("tau3(0)")
    unit, m, rp = primary_decompose(r)
    # unit = +-w^a
    a = next(k for k in range(3) if unit in (_OMEGA_POWERS[k], -_OMEGA_POWERS[k]))
    split = _cube_split(rp, fact)
    if split is None:
        return 0.0
    c, d = split
    ratio = math.sqrt(d.norm / c.norm)
    if m % 3 == 2:
        n = (m + 4) // 3  # n >= 2
        shift = _OMEGA_POWERS[a] * LAMBDA * LAMBDA
        phase = (1.0, _E_NINTH, _E_NINTH.conjugate())[a]
        g = g3_fast(shift, c, table) if c.norm > 1 else 1.0 + 0j
        return phase * np.conj(g) * ratio * 3.0 ** (n / 2 + 2)
    if m % 3 == 0:
        if a != 0:
            return 0.0
        n = m // 3 + 1  # n >= 1
        g = g3_fast(1, c, table) if c.norm > 1 else 1.0 + 0j
        return np.conj(g) * ratio * 3.0 ** ((n + 5) / 2)
    return 0.0


_OMEGA_POWERS = (ONE, EisInt(0, 1), EisInt(-1, -1))
