"""Factorization and multiplicative functions on Z[w].

Everything is driven by rational factorization of the norm: a rational prime
p = 3 ramifies as (lam^2) up to units, p = 2 mod 3 stays inert (norm p^2),
and p = 1 mod 3 splits as p = pi * conj(pi) with N(pi) = p.  Splitting a
prime finds a primitive cube root of unity r mod p (so r^2 + r + 1 = 0) and
takes gcd(p, r - w) in Z[w].
"""

from __future__ import annotations

import csv
import math
import os
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .eisenstein import (
    EisInt,
    LAMBDA,
    ONE,
    as_eis,
    eis_divmod,
    gcd as eis_gcd,
    primary_associate,
    primary_decompose,
)
from .errors import NotPrime, NotPrimaryPrime, ZeroInput

_TRIAL_BOUND = 1_000_000


def is_rational_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all n < 3.3 * 10^24."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int, rng: random.Random) -> int:
    if n % 2 == 0:
        return 2
    while True:
        x = rng.randrange(2, n)
        y, c, d = x, rng.randrange(1, n), 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d


def rational_factor(n: int) -> Dict[int, int]:
    """Prime factorization of n >= 1 (trial division then Pollard rho)."""
    if n < 1:
        raise ValueError("rational_factor expects n >= 1")
    out: Dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    d = 5
    while d * d <= n and d <= _TRIAL_BOUND:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 2 if d % 6 == 5 else 4
    if n == 1:
        return out
    rng = random.Random(0xE15E)
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_rational_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_rho(m, rng)
        stack.extend([d, m // d])
    return out


def cube_root_of_unity_mod(p: int, seed: int = 1) -> int:
    """A root of r^2 + r + 1 = 0 mod p, for p = 1 mod 3 prime.

    Uses g^((p-1)/3) for successive g from a seeded generator until the
    result is a primitive cube root; deterministic for reproducibility.
    """
    if p % 3 != 1:
        raise NotPrime(f"{p} is not 1 mod 3")
    rng = random.Random((seed << 20) ^ p)
    e = (p - 1) // 3
    while True:
        g = rng.randrange(2, p)
        r = pow(g, e, p)
        if r != 1:
            # r is a primitive cube root of unity; r or r^2 solves x^2+x+1=0
            if (r * r + r + 1) % p == 0:
                return r
            r2 = r * r % p
            if (r2 * r2 + r2 + 1) % p == 0:
                return r2


@dataclass(frozen=True)
class SplitResult:
    kind: str  # "ramified" | "inert" | "split"
    primes: Tuple[EisInt, ...]  # primary primes above p (lam for ramified)


def split_rational_prime(p: int) -> SplitResult:
    """Splitting of a rational prime in Z[w]."""
    p = int(p)
    if not is_rational_prime(p):
        raise NotPrime(f"{p} is not a rational prime")
    if p == 3:
        return SplitResult("ramified", (LAMBDA,))
    if p % 3 == 2:
        _, prim = primary_associate(EisInt(p, 0))
        return SplitResult("inert", (prim,))
    r = cube_root_of_unity_mod(p)
    pi = eis_gcd(EisInt(p, 0), EisInt(r, -1))  # gcd(p, r - w)
    _, pi = primary_associate(pi)
    assert pi.norm == p
    pibar = pi.conj()
    _, pibar = primary_associate(pibar)
    # deterministic order: the conjugate pair sorted by (norm, a, b)
    first, second = sorted((pi, pibar), key=lambda x: x.key())
    return SplitResult("split", (first, second))


@dataclass(frozen=True)
class EisFactorization:
    """unit * lam^lambda_exp * prod(pi_i^e_i) with primary primes pi_i."""

    unit: EisInt
    lambda_exp: int
    primes: Tuple[Tuple[EisInt, int], ...]  # sorted by (norm, a, b)

    def value(self) -> EisInt:
        x = self.unit * LAMBDA**self.lambda_exp
        for pi, e in self.primes:
            x = x * pi**e
        return x

    @property
    def norm(self) -> int:
        n = 3**self.lambda_exp
        for pi, e in self.primes:
            n *= pi.norm**e
        return n

    def is_squarefree(self) -> bool:
        return self.lambda_exp <= 1 and all(e == 1 for _, e in self.primes)

    def mobius(self) -> int:
        if self.lambda_exp >= 2 or any(e > 1 for _, e in self.primes):
            return 0
        k = self.lambda_exp + len(self.primes)
        return -1 if k % 2 else 1

    def num_divisors(self) -> int:
        d = self.lambda_exp + 1
        for _, e in self.primes:
            d *= e + 1
        return d

    def radical(self) -> EisInt:
        x = LAMBDA if self.lambda_exp else ONE
        for pi, _ in self.primes:
            x = x * pi
        return x


def _exact_divide(x: EisInt, y: EisInt) -> Optional[EisInt]:
    q, r = eis_divmod(x, y)
    return q if r.is_zero() else None


def factor(x) -> EisFactorization:
    """Unique factorization of a nonzero element of Z[w]."""
    x = as_eis(x)
    if x.is_zero():
        raise ZeroInput("cannot factor 0")
    unit, lam_exp, c = primary_decompose(x)
    primes: List[Tuple[EisInt, int]] = []
    n = c.norm
    for p, ep in sorted(rational_factor(n).items()):
        if p % 3 == 2:
            # inert: p^2 | n exactly 2*e times
            assert ep % 2 == 0
            _, prim = primary_associate(EisInt(p, 0))
            primes.append((prim, ep // 2))
            continue
        # split prime: distribute ep between pi and conj(pi)
        pi, pibar = split_rational_prime(p).primes
        for cand in (pi, pibar):
            e, y = 0, c
            while True:
                q = _exact_divide(y, cand)
                if q is None:
                    break
                y, e = q, e + 1
            if e:
                primes.append((cand, e))
    primes.sort(key=lambda t: t[0].key())
    f = EisFactorization(unit, lam_exp, tuple(primes))
    assert f.norm == x.norm
    return f


def is_squarefree(x) -> bool:
    x = as_eis(x)
    if x.is_zero():
        raise ZeroInput("is_squarefree(0)")
    return factor(x).is_squarefree()


def mobius(x) -> int:
    x = as_eis(x)
    if x.is_zero():
        raise ZeroInput("mobius(0)")
    return factor(x).mobius()


def num_divisors(x) -> int:
    x = as_eis(x)
    if x.is_zero():
        raise ZeroInput("num_divisors(0)")
    return factor(x).num_divisors()


def radical(x) -> EisInt:
    x = as_eis(x)
    if x.is_zero():
        raise ZeroInput("radical(0)")
    return factor(x).radical()


def ideal_divisors(x) -> List[EisInt]:
    """Generators (lam^k * primary) of all ideal divisors of (x)."""
    f = factor(x)
    divs = [ONE]
    gens = [(LAMBDA, f.lambda_exp)] + list(f.primes)
    for pi, e in gens:
        divs = [d * pi**k for d in divs for k in range(e + 1)]
    return sorted(divs, key=lambda d: d.key())


def is_eis_prime(x) -> bool:
    """True when x generates a prime ideal of Z[w]."""
    x = as_eis(x)
    if x.is_zero() or x.is_unit():
        return False
    n = x.norm
    if n == 3:
        return True
    if is_rational_prime(n):
        return True
    r = math.isqrt(n)
    return r * r == n and r % 3 == 2 and is_rational_prime(r)


def check_primary_prime(pi) -> EisInt:
    pi = as_eis(pi)
    if not pi.is_primary():
        raise NotPrimaryPrime(f"{pi} is not primary (= 1 mod 3)")
    if not is_eis_prime(pi):
        raise NotPrimaryPrime(f"{pi} is not prime in Z[w]")
    return pi


# ---------------------------------------------------------------------------
# Prime tables
# ---------------------------------------------------------------------------

def rational_primes_upto(n: int) -> np.ndarray:
    """All rational primes <= n (numpy sieve)."""
    if n < 2:
        return np.empty(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p:: p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def smallest_prime_factor_table(n: int) -> np.ndarray:
    """spf[m] = smallest prime factor of m, for 0 <= m <= n (spf[0:2] = 0/1)."""
    spf = np.arange(n + 1, dtype=np.int64)
    for p in range(2, math.isqrt(n) + 1):
        if spf[p] == p:
            sl = spf[p * p:: p]
            sl[sl == np.arange(p * p, n + 1, p)] = p
    return spf


@dataclass
class PrimeTable:
    """Primary primes of Z[w] with norm <= bound, with fast lookups.

    split_a/split_b hold, for each split rational prime p = 1 mod 3 <= bound,
    the primary prime pi = a + b*w of norm p whose key (norm, a, b) is
    smallest; its conjugate's primary associate is the other prime above p.
    """

    bound: int
    split_p: np.ndarray = field(repr=False)
    split_a: np.ndarray = field(repr=False)
    split_b: np.ndarray = field(repr=False)
    inert_p: np.ndarray = field(repr=False)
    _index: Dict[int, int] = field(default_factory=dict, repr=False)

    @staticmethod
    def build(bound: int, cache_path: Optional[str] = None) -> "PrimeTable":
        cached = None
        if cache_path and os.path.exists(cache_path):
            cached = _read_split_cache(cache_path)
        primes = rational_primes_upto(bound)
        split = primes[primes % 3 == 1]
        inert = primes[(primes % 3 == 2) & (primes * primes <= bound)]
        a = np.empty(len(split), dtype=np.int64)
        b = np.empty(len(split), dtype=np.int64)
        for i, p in enumerate(split):
            p = int(p)
            if cached is not None and p in cached:
                a[i], b[i] = cached[p]
                continue
            pi = split_rational_prime(p).primes[0]
            a[i], b[i] = pi.a, pi.b
        table = PrimeTable(bound, split, a, b, inert,
                           {int(p): i for i, p in enumerate(split)})
        if cache_path and cached is None:
            _write_split_cache(cache_path, split, a, b)
        return table

    def split_prime(self, p: int) -> Tuple[EisInt, EisInt]:
        i = self._index[p]
        pi = EisInt(int(self.split_a[i]), int(self.split_b[i]))
        _, pibar = primary_associate(pi.conj())
        return pi, pibar


def _write_split_cache(path: str, ps: np.ndarray, aa: np.ndarray, bb: np.ndarray) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "a", "b"])
        for p, a, b in zip(ps, aa, bb):
            w.writerow([int(p), int(a), int(b)])
    os.replace(tmp, path)


def _read_split_cache(path: str) -> Dict[int, Tuple[int, int]]:
    out: Dict[int, Tuple[int, int]] = {}
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header != ["p", "a", "b"]:
            return {}
        for row in r:
            out[int(row[0])] = (int(row[1]), int(row[2]))
    return out


@lru_cache(maxsize=4)
def shared_prime_table(bound: int) -> PrimeTable:
    """Process-wide read-only prime table (build once, reuse everywhere)."""
    return PrimeTable.build(bound)
