"""Exact arithmetic in Z[w], w = exp(2*pi*i/3).

Elements are stored on the integral basis (1, w) as coordinate pairs (a, b)
meaning a + b*w.  The norm form is N(a + b*w) = a^2 - a*b + b^2.  The ring is
Euclidean for the norm; rounding division gives a remainder of norm at most
(3/4) of the divisor's norm.  The unit group is {±1, ±w, ±w^2} and the unique
ramified prime is lam = 1 + 2w with lam^2 = -3.

An element coprime to lam has exactly one unit multiple congruent to 1 mod 3;
that associate is called *primary* and is the canonical representative used
throughout (characters, Gauss sums, reciprocity all assume primary arguments).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Tuple, Union

import numpy as np

from .errors import BothZero, DivisibleByLambda, DivisionByZero, ZeroInput

Pair = Tuple[int, int]


class EisInt:
    """Immutable element a + b*w of Z[w]."""

    __slots__ = ("a", "b")

    def __init__(self, a: int, b: int = 0):
        object.__setattr__(self, "a", int(a))
        object.__setattr__(self, "b", int(b))

    def __setattr__(self, *args):
        raise AttributeError("EisInt is immutable")

    # -- basic structure ---------------------------------------------------
    @property
    def norm(self) -> int:
        return self.a * self.a - self.a * self.b + self.b * self.b

    @property
    def trace(self) -> int:
        # Tr(a + b*w) = 2a - b since w + conj(w) = -1.
        return 2 * self.a - self.b

    def conj(self) -> "EisInt":
        return EisInt(self.a - self.b, -self.b)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_unit(self) -> bool:
        return self.norm == 1

    def is_primary(self) -> bool:
        return self.a % 3 == 1 and self.b % 3 == 0

    def divisible_by_lambda(self) -> bool:
        # N(x) == 0 mod 3  <=>  lam | x, and N == (a+b)^2 mod 3.
        return (self.a + self.b) % 3 == 0

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other) -> "EisInt":
        other = as_eis(other)
        return EisInt(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other) -> "EisInt":
        other = as_eis(other)
        return EisInt(self.a - other.a, self.b - other.b)

    def __rsub__(self, other) -> "EisInt":
        return as_eis(other) - self

    def __mul__(self, other) -> "EisInt":
        other = as_eis(other)
        a, b, c, d = self.a, self.b, other.a, other.b
        # (a+bw)(c+dw) = ac - bd + (ad + bc - bd) w, using w^2 = -1 - w.
        return EisInt(a * c - b * d, a * d + b * c - b * d)

    __rmul__ = __mul__

    def __neg__(self) -> "EisInt":
        return EisInt(-self.a, -self.b)

    def __pow__(self, n: int) -> "EisInt":
        if n < 0:
            raise ValueError("negative powers leave Z[w]")
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __divmod__(self, other) -> Tuple["EisInt", "EisInt"]:
        return eis_divmod(self, other)

    def __floordiv__(self, other) -> "EisInt":
        return eis_divmod(self, other)[0]

    def __mod__(self, other) -> "EisInt":
        return eis_divmod(self, other)[1]

    # -- comparisons / misc --------------------------------------------------
    def __eq__(self, other) -> bool:
        try:
            other = as_eis(other)
        except TypeError:
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def key(self) -> Tuple[int, int, int]:
        """Deterministic sort key: (norm, a, b)."""
        return (self.norm, self.a, self.b)

    def pair(self) -> Pair:
        return (self.a, self.b)

    def to_complex(self) -> complex:
        return complex(self.a - 0.5 * self.b, 0.8660254037844386467637232 * self.b)

    def __repr__(self) -> str:
        if self.b == 0:
            return f"EisInt({self.a})"
        return f"EisInt({self.a}, {self.b})"

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}w"
        return f"{self.a}{'+' if self.b > 0 else '-'}{abs(self.b)}w"


def as_eis(x: Union["EisInt", int, Pair]) -> EisInt:
    if isinstance(x, EisInt):
        return x
    if isinstance(x, (int, np.integer)):
        return EisInt(int(x), 0)
    if isinstance(x, tuple) and len(x) == 2:
        return EisInt(int(x[0]), int(x[1]))
    raise TypeError(f"cannot interpret {x!r} as an Eisenstein integer")


ZERO = EisInt(0, 0)
ONE = EisInt(1, 0)
OMEGA = EisInt(0, 1)
OMEGA2 = EisInt(-1, -1)
LAMBDA = EisInt(1, 2)

#: The six units, ordered as w^k and -w^k for k = 0, 1, 2.
UNITS = (ONE, OMEGA, OMEGA2, -ONE, -OMEGA, -OMEGA2)


def norm(x) -> int:
    return as_eis(x).norm


def eis_divmod(x, y) -> Tuple[EisInt, EisInt]:
    """Rounded division: x = q*y + r with N(r) <= (3/4) N(y)."""
    x, y = as_eis(x), as_eis(y)
    if y.is_zero():
        raise DivisionByZero("division by zero in Z[w]")
    n = y.norm
    # x * conj(y) = u + v*w
    u = x.a * (y.a - y.b) + x.b * y.b
    v = x.b * y.a - x.a * y.b
    # round u/n, v/n to nearest integers (half away from zero is fine)
    qa = (2 * u + n) // (2 * n)
    qb = (2 * v + n) // (2 * n)
    q = EisInt(qa, qb)
    r = x - q * y
    return q, r


def primary_decompose(x) -> Tuple[EisInt, int, EisInt]:
    """Write x = unit * lam^k * c with c primary; returns (unit, k, c).

    Raises ZeroInput on x = 0.
    """
    x = as_eis(x)
    if x.is_zero():
        raise ZeroInput("0 has no primary decomposition")
    k = 0
    while x.divisible_by_lambda():
        # x / lam = -x*lam / 3
        y = x * LAMBDA
        x = EisInt(-y.a // 3, -y.b // 3)
        k += 1
    for u in UNITS:
        if (u * x).is_primary():
            # x = u^{-1} * (u x); unit in the decomposition is u^{-1}
            return (_unit_inverse(u), k, u * x)
    raise AssertionError("unreachable: one associate must be primary")


def _unit_inverse(u: EisInt) -> EisInt:
    idx = UNITS.index(u)
    sign, k = divmod(idx, 3) if idx < 3 else (1, idx - 3)
    inv = UNITS[(3 - k) % 3]
    return inv if idx < 3 else -inv


def primary_associate(x) -> Tuple[EisInt, EisInt]:
    """Unique (unit, primary) with primary = unit * x = 1 mod 3.

    Requires x nonzero and coprime to lam.
    """
    x = as_eis(x)
    if x.is_zero():
        raise ZeroInput("0 has no primary associate")
    if x.divisible_by_lambda():
        raise DivisibleByLambda(f"{x} is divisible by lam = 1 + 2w")
    for u in UNITS:
        c = u * x
        if c.is_primary():
            return u, c
    raise AssertionError("unreachable")


def gcd(x, y) -> EisInt:
    """Generator of (x) + (y), normalised to lam^k * (primary part)."""
    x, y = as_eis(x), as_eis(y)
    if x.is_zero() and y.is_zero():
        raise BothZero("gcd(0, 0) is undefined")
    while not y.is_zero():
        x, y = y, x % y
    if x.is_unit():
        return ONE
    unit, k, c = primary_decompose(x)
    return LAMBDA**k * c


def reduce_mod9(x) -> EisInt:
    """Representative of x mod the ideal (9) with coordinates in [0, 9)."""
    x = as_eis(x)
    return EisInt(x.a % 9, x.b % 9)


def congruent_mod9(x, y) -> bool:
    x, y = as_eis(x), as_eis(y)
    return (x.a - y.a) % 9 == 0 and (x.b - y.b) % 9 == 0


@dataclass(frozen=True)
class ResidueClassMod9:
    """A residue class mod (9) = (lam^4), tagged with coprimality to 3."""

    representative: EisInt
    coprime_to_3: bool

    @staticmethod
    def of(x) -> "ResidueClassMod9":
        r = reduce_mod9(x)
        return ResidueClassMod9(r, not r.divisible_by_lambda())

    def contains(self, x) -> bool:
        return congruent_mod9(x, self.representative)


def classes_mod9(coprime_only: bool = False, primary_only: bool = False) -> list:
    """All 81 residue classes mod 9 (54 coprime to 3, 9 of them = 1 mod 3)."""
    out = []
    for a in range(9):
        for b in range(9):
            r = EisInt(a, b)
            if coprime_only and r.divisible_by_lambda():
                continue
            if primary_only and not (a % 3 == 1 and b % 3 == 0):
                continue
            out.append(ResidueClassMod9(r, not r.divisible_by_lambda()))
    return out


# ---------------------------------------------------------------------------
# Enumeration by norm
# ---------------------------------------------------------------------------

def primary_elements(bound: int) -> "np.ndarray":
    """All primary elements with 0 < N <= bound as an int64 array [n, a, b].

    Sorted by (norm, a, b); one representative per associate class.  The box
    |a|, |b| <= ceil(2 sqrt(bound)) covers the norm-<=bound disc with room to
    spare (|z|^2 = N and coordinates are bounded by 2|z|/sqrt(3)).
    """
    if bound < 1:
        return np.empty((0, 3), dtype=np.int64)
    m = int(math.isqrt(4 * bound)) + 2
    a = np.arange(-m, m + 1, dtype=np.int64)
    A, B = np.meshgrid(a, a, indexing="ij")
    N = A * A - A * B + B * B
    mask = (N > 0) & (N <= bound) & (A % 3 == 1) & (B % 3 == 0)
    rows = np.stack([N[mask], A[mask], B[mask]], axis=1)
    order = np.lexsort((rows[:, 2], rows[:, 1], rows[:, 0]))
    return rows[order]


def enumerate_by_norm(bound: int, class_filter: Optional[ResidueClassMod9] = None,
                      primary_only: bool = True) -> Iterator[EisInt]:
    """Yield elements with 0 < N <= bound in (norm, a, b) order.

    With primary_only (the default) each associate class appears once, via its
    primary representative; class_filter additionally restricts mod 9.
    """
    if primary_only:
        for n, a, b in primary_elements(bound):
            x = EisInt(int(a), int(b))
            if class_filter is None or class_filter.contains(x):
                yield x
        return
    m = int(math.isqrt(4 * bound)) + 2
    rows = []
    for a in range(-m, m + 1):
        for b in range(-m, m + 1):
            n = a * a - a * b + b * b
            if 0 < n <= bound:
                rows.append((n, a, b))
    rows.sort()
    for n, a, b in rows:
        x = EisInt(a, b)
        if class_filter is None or class_filter.contains(x):
            yield x


def _hnf_basis(c: EisInt) -> Tuple[int, int]:
    """Triangular basis of the lattice c*Z[w] on (1, w) coordinates.

    Returns (h, k) such that the lattice has basis (h, 0), (x, k) for some x;
    then {(i, j): 0 <= i < h, 0 <= j < k} is a transversal of Z^2 / cZ[w] and
    h * k = N(c).
    """
    cw = c * OMEGA
    u1, u2 = c.a, c.b
    v1, v2 = cw.a, cw.b
    # Euclid on the second coordinates; column ops preserve the lattice.
    while v2 != 0:
        q = u2 // v2
        u1, u2, v1, v2 = v1, v2, u1 - q * v1, u2 - q * v2
    # now v = (v1, 0); u = (u1, u2) with u2 = +-gcd(c.b, cw.b)
    h = abs(v1)
    k = abs(u2)
    assert h * k == c.norm
    return h, k


def residues_mod(c) -> list:
    """A complete residue system of Z[w] mod c (exactly N(c) elements)."""
    c = as_eis(c)
    if c.is_zero():
        raise DivisionByZero("no residue system mod 0")
    h, k = _hnf_basis(c)
    return [EisInt(i, j) for j in range(k) for i in range(h)]


def residues_mod_pairs(c) -> "np.ndarray":
    """Residue system as an int64 array [[a, b], ...] (same order as residues_mod)."""
    c = as_eis(c)
    if c.is_zero():
        raise DivisionByZero("no residue system mod 0")
    h, k = _hnf_basis(c)
    i = np.arange(h, dtype=np.int64)
    j = np.arange(k, dtype=np.int64)
    A, B = np.meshgrid(i, j, indexing="ij")
    return np.stack([A.ravel(), B.ravel()], axis=1)
