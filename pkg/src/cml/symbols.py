"""Cubic residue symbols, the characters chi_q, and mod-9 detection.

The symbol (a/b)_3 for primary b takes values in {0, 1, w, w^2}.  On primes
it is a^((N(pi)-1)/3) mod pi; the fast evaluator avoids factoring b entirely
via a Jacobi-style Euclidean reduction built on cubic reciprocity and the
supplementary laws for units and lam (see kernels.cubic_symbol).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from . import kernels
from .eisenstein import EisInt, LAMBDA, OMEGA, ONE, as_eis, eis_divmod
from .errors import BadModulus, NotPrimaryPrime
from .factor import check_primary_prime

OMEGA_C = complex(-0.5, 0.8660254037844386467637231707529362)

#: complex value of w^k for k = 0,1,2 and 0 for the "zero" tag 3
OMEGA_LUT = np.array([1.0 + 0j, OMEGA_C, OMEGA_C.conjugate(), 0.0 + 0j])


@dataclass(frozen=True)
class CubicSymbolValue:
    """Element of {0, 1, w, w^2}: k is the exponent of w, or None for 0."""

    k: Optional[int]

    @staticmethod
    def from_code(code: int) -> "CubicSymbolValue":
        return _BY_CODE[code]

    @property
    def is_zero(self) -> bool:
        return self.k is None

    @property
    def code(self) -> int:
        """Kernel encoding: 0..2 = exponent of w, 3 = zero."""
        return 3 if self.k is None else self.k

    def __mul__(self, other: "CubicSymbolValue") -> "CubicSymbolValue":
        if self.k is None or other.k is None:
            return SYMBOL_ZERO
        return _BY_CODE[(self.k + other.k) % 3]

    def __pow__(self, n: int) -> "CubicSymbolValue":
        if self.k is None:
            return self if n else SYMBOL_ONE
        return _BY_CODE[(self.k * n) % 3]

    def conj(self) -> "CubicSymbolValue":
        if self.k is None:
            return self
        return _BY_CODE[(-self.k) % 3]

    def to_complex(self) -> complex:
        return complex(OMEGA_LUT[self.code])

    def __repr__(self) -> str:
        return "Zero" if self.k is None else f"Root({self.k})"


SYMBOL_ZERO = CubicSymbolValue(None)
SYMBOL_ONE = CubicSymbolValue(0)
_BY_CODE = (SYMBOL_ONE, CubicSymbolValue(1), CubicSymbolValue(2), SYMBOL_ZERO)


def supp_exponents(d) -> Tuple[int, int]:
    """(alpha2, alpha3) with d = 1 + alpha2 lam^2 + alpha3 lam^3 mod 9.

    Then (w/d)_3 = w^alpha2 and (lam/d)_3 = w^(-alpha3); requires d primary.
    """
    d = as_eis(d)
    if not d.is_primary():
        raise BadModulus(f"{d} is not primary")
    u = ((d.a % 9) - 1) // 3
    v = (d.b % 9) // 3
    a3 = v if v < 2 else v - 3
    t = (-u - a3) % 3
    a2 = t if t < 2 else t - 3
    return a2, a3


def symbol(a, b) -> CubicSymbolValue:
    """Cubic Jacobi symbol (a/b)_3 for b = 1 mod 3 (no factoring of b)."""
    a, b = as_eis(a), as_eis(b)
    if b.is_zero() or not b.is_primary():
        raise BadModulus(f"modulus {b} is not = 1 mod 3")
    return CubicSymbolValue.from_code(kernels.cubic_symbol(a.a, a.b, b.a, b.b))


def symbol_definition(a, pi) -> CubicSymbolValue:
    """Power-residue definition on primes: a^((N(pi)-1)/3) mod pi.

    Independent of the Euclidean route: modular exponentiation in Z[w]/(pi)
    followed by matching against the three cube roots of unity.
    """
    a = as_eis(a)
    pi = check_primary_prime(pi)
    if (a % pi).is_zero():
        return SYMBOL_ZERO
    e = (pi.norm - 1) // 3
    r = _eis_powmod(a, e, pi)
    for k, root in enumerate((ONE, OMEGA, OMEGA * OMEGA)):
        if ((r - root) % pi).is_zero():
            return CubicSymbolValue.from_code(k)
    raise NotPrimaryPrime(f"{pi}: power residue not a cube root of unity")


def _eis_powmod(x: EisInt, e: int, m: EisInt) -> EisInt:
    r = ONE
    x = x % m
    while e:
        if e & 1:
            r = (r * x) % m
        x = (x * x) % m
        e >>= 1
    return r


def symbol_values_array(aa: np.ndarray, bb: np.ndarray, b) -> np.ndarray:
    """Kernel codes (uint8) of (a_i/b)_3 for integer coordinate arrays."""
    b = as_eis(b)
    if b.is_zero() or not b.is_primary():
        raise BadModulus(f"modulus {b} is not = 1 mod 3")
    return kernels.symbol_array(np.ascontiguousarray(aa, dtype=np.int64),
                                np.ascontiguousarray(bb, dtype=np.int64),
                                b.a, b.b)


def chi_q(q, x: Union[EisInt, int, Tuple[int, int]],
          lambda_exp: int = 0) -> CubicSymbolValue:
    """The cubic character chi_q on elements or ideal generators.

    An ideal n = (lam^g n0) with n0 primary evaluates as
    (lam/q)^g (n0/q); pass lambda_exp=g.  For q in the mod-9 family the
    character is trivial on units and lam, hence well-defined on ideals.
    """
    q = as_eis(q)
    val = symbol(x, q)
    if lambda_exp:
        val = val * symbol(LAMBDA, q) ** lambda_exp
    return val


def indicator_mod9_via_characters(m, c) -> float:
    """Detect m = c mod 9 with cubic characters at the 18 divisors of 3.

    (1/18) sum over eta = zeta * lam^b (zeta a unit, 0 <= b <= 2) of
    chi_c(eta) conj(chi_m(eta)); the sign does not matter since the symbol
    is trivial at -1, so the sum folds to the 9-term version over w^a lam^b.
    """
    m, c = as_eis(m), as_eis(c)
    if not (m.is_primary() and c.is_primary()):
        raise BadModulus("both arguments must be primary")
    a2m, a3m = supp_exponents(m)
    a2c, a3c = supp_exponents(c)
    total = 0.0 + 0j
    for sign in (1, -1):
        for a in range(3):
            for b in range(3):
                kc = (a * a2c - b * a3c) % 3
                km = (a * a2m - b * a3m) % 3
                total += OMEGA_LUT[kc] * np.conj(OMEGA_LUT[km])
    total /= 18.0
    assert abs(total.imag) < 1e-12
    return float(total.real)
