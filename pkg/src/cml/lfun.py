"""Central values of the cubic Hecke L-functions by approximate functional
equation, plus the diagnostic second-moment form A2 and an off-center
evaluator on the critical strip.

For q squarefree and = 1 mod 9:

    L(1/2, chi_q)   = A1(q) + g3~(q) conj(A1(q)),
    |L(1/2, chi_q)|^2 = 2 A2(q),

with A1 a single smoothed ideal sum of length ~ sqrt(3 N(q)) and A2 the
corresponding double sum; the identity |L|^2 = 2 A2 is the module's central
cross-check since the two routes share nothing but the character.

Ideal sums run over n = (lam^g n0) with n0 primary, grouped by the lam
power; chi_q is trivial on units and lam for family moduli, so the
character of the ideal is the symbol (n0/q) alone times (lam/q)^g.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy.special import erfc

from . import kernels
from .eisenstein import EisInt, LAMBDA, ONE, as_eis, primary_elements
from .errors import BadModulus, CacheMismatch, CapExceeded, NotInFamily, OutOfStrip
from .factor import EisFactorization, factor, is_squarefree
from .gauss import GaussSumTable, g3_tilde
from .symbols import OMEGA_LUT, symbol, symbol_values_array
from .weights import PhiTable, v_s_batch

#: default truncation: N(ideal) <= TRUNC_MULT * sqrt(3 N(q))
TRUNC_MULT = 6.0
A2_CAP = 10**4

#: safe overcount constant for the ideal-count bound #{N(n) <= t} <= 4.5 t
_IDEAL_DENSITY_BOUND = 4.5


def a1_tail_bound(trunc: float, scale: float) -> float:
    """Certified-style bound for the truncated tail of the A1 sum.

    sum over ideals with N > T of N^(-1/2) Phi_1(N/S) is at most
    4.5 * sqrt(S) * I(T/S) with I(x) = int_x^inf u^(-1/2) erfc(sqrt(2 pi u)) du,
    which has the closed form 2 (exp(-2 pi x)/sqrt(2 pi^2) - sqrt(x) erfc(sqrt(2 pi x))).
    """
    x = trunc / scale
    ii = 2.0 * (math.exp(-2 * math.pi * x) / math.sqrt(2.0 * math.pi**2)
                - math.sqrt(x) * float(erfc(math.sqrt(2 * math.pi * x))))
    return _IDEAL_DENSITY_BOUND * math.sqrt(scale) * max(ii, 0.0) + 5e-14


@dataclass
class LValueRecord:
    q: EisInt
    conductor_norm: int
    L_half: complex
    a1: complex
    a2: Optional[float]
    terms_used: int
    afe_tail_bound: float


@lru_cache(maxsize=4)
def phi_table(j: int) -> PhiTable:
    """Process-wide Phi_j tables (built once, shared read-only)."""
    return PhiTable(j)


class AfeContext:
    """Shared tables for evaluating L(1/2, chi_q) across a family.

    Precomputes the primary elements up to the largest truncation length,
    the Phi weight tables, and (optionally) the prime Gauss-sum table for
    root numbers.  All members are read-only after construction; the
    evaluation methods are pure and safe to call from worker threads.
    """

    def __init__(self, max_norm: int, trunc_mult: float = TRUNC_MULT,
                 gauss_table: Optional[GaussSumTable] = None,
                 build_gauss: bool = True, a2_cap: int = A2_CAP):
        self.max_norm = int(max_norm)
        self.trunc_mult = float(trunc_mult)
        self.a2_cap = min(int(a2_cap), self.max_norm)
        self.phi1 = phi_table(1)
        self.phi2 = phi_table(2)
        # the a2 double sum needs single-ideal norms up to its full cutoff
        trunc_a1 = trunc_mult * math.sqrt(3.0 * max_norm)
        trunc_a2 = self.phi2.cutoff * 3.0 * self.a2_cap
        self.max_trunc = int(math.ceil(max(trunc_a1, trunc_a2))) + 1
        rows = primary_elements(self.max_trunc)
        self.pn = np.ascontiguousarray(rows[:, 0])
        self.pa = np.ascontiguousarray(rows[:, 1])
        self.pb = np.ascontiguousarray(rows[:, 2])
        if gauss_table is not None:
            self.gauss = gauss_table
        elif build_gauss:
            self.gauss = GaussSumTable.build(self.max_norm)
        else:
            self.gauss = None

    # -- A1 ---------------------------------------------------------------
    def _check_q(self, q: EisInt) -> None:
        if not q.is_primary():
            raise BadModulus(f"{q} is not primary")
        if q.norm > self.max_norm:
            raise CapExceeded(f"N(q) = {q.norm} exceeds context bound {self.max_norm}")

    def a1(self, q, trunc_mult: Optional[float] = None) -> Tuple[complex, int, float]:
        """A1(q) = sum over ideals of chi_q(n) N(n)^(-1/2) Phi_1(N(n)/sqrt(3 N(q))).

        Returns (value, terms_used, tail_bound).
        """
        q = as_eis(q)
        self._check_q(q)
        tm = self.trunc_mult if trunc_mult is None else trunc_mult
        scale = math.sqrt(3.0 * q.norm)
        trunc = tm * scale
        if trunc > self.max_trunc:
            raise CapExceeded("truncation exceeds precomputed element table")
        k = int(np.searchsorted(self.pn, trunc, side="right"))
        codes = kernels.symbol_array(self.pa[:k], self.pb[:k], q.a, q.b)
        chi = OMEGA_LUT[codes]
        chi_lam = symbol(LAMBDA, q).to_complex()
        total = 0.0 + 0.0j
        terms = 0
        g = 0
        while 3**g <= trunc:
            kk = int(np.searchsorted(self.pn, trunc / 3**g, side="right"))
            norms = (3**g) * self.pn[:kk].astype(float)
            wts = self.phi1(norms / scale) / np.sqrt(norms)
            total += (chi_lam**g) * np.dot(chi[:kk], wts)
            terms += kk
            g += 1
        return complex(total), terms, a1_tail_bound(trunc, scale)

    # -- A2 ---------------------------------------------------------------
    def a2(self, q, cap: Optional[int] = None) -> float:
        """A2(q): smoothed double ideal sum; equals |L(1/2, chi_q)|^2 / 2.

        Quadratic cost: the ideal sums are grouped by norm into
        T(v) = sum of chi_q over ideals of norm v, and the double sum
        becomes a weighted pair sum over norm values with weight
        Phi_2(v1 v2 / (3 N(q))) / sqrt(v1 v2).
        """
        q = as_eis(q)
        self._check_q(q)
        if q.norm > (self.a2_cap if cap is None else cap):
            raise CapExceeded(f"N(q) = {q.norm} exceeds the a2 cap")
        scale = 3.0 * q.norm
        bound = int(math.ceil(self.phi2.cutoff * scale))
        tarr = self._ideal_character_table(q, bound)
        vals = np.nonzero(tarr)[0].astype(np.int64)
        tv = np.ascontiguousarray(tarr[vals])
        m = np.arange(bound + 1, dtype=float)
        m[0] = 1.0
        w = np.zeros(bound + 1)
        w[1:] = self.phi2(m[1:] / scale) / np.sqrt(m[1:])
        total = kernels.a2_pair_sum(vals, tv, w, bound)
        rel = abs(total.imag) / max(abs(total), 1e-300)
        if rel > 1e-8:
            raise ArithmeticError(f"A2({q}) has non-negligible imaginary part {rel}")
        return float(total.real)

    def _ideal_character_table(self, q: EisInt, bound: int) -> np.ndarray:
        """T[v] = sum of chi_q(n) over ideals n of norm v <= bound."""
        if bound > self.max_trunc:
            raise CapExceeded("bound exceeds precomputed element table")
        k = int(np.searchsorted(self.pn, bound, side="right"))
        codes = kernels.symbol_array(self.pa[:k], self.pb[:k], q.a, q.b)
        chi = OMEGA_LUT[codes]
        chi_lam = symbol(LAMBDA, q).to_complex()
        tarr = np.zeros(bound + 1, dtype=np.complex128)
        g = 0
        while 3**g <= bound:
            kk = int(np.searchsorted(self.pn, bound // 3**g, side="right"))
            np.add.at(tarr, (3**g) * self.pn[:kk], (chi_lam**g) * chi[:kk])
            g += 1
        return tarr

    # -- L(1/2) ------------------------------------------------------------
    def root_unit(self, q: EisInt, fact: Optional[EisFactorization] = None) -> complex:
        """g3~(q) = g3(1, q)/sqrt(N(q)), the root number for squarefree q."""
        if self.gauss is None:
            raise RuntimeError("context built without a Gauss-sum table")
        return g3_tilde(1, q, self.gauss, fact)

    def l_half(self, q, fact: Optional[EisFactorization] = None,
               with_a2: bool = False) -> LValueRecord:
        """L(1/2, chi_q) = A1(q) + g3~(q) conj(A1(q)) for q in the family."""
        q = as_eis(q)
        if (q.a % 9, q.b % 9) != (1, 0) or q == ONE:
            raise NotInFamily(f"{q} is not = 1 mod 9 (or is 1)")
        f = fact if fact is not None else factor(q)
        if not f.is_squarefree():
            raise NotInFamily(f"{q} is not squarefree")
        a1_val, terms, tail = self.a1(q)
        lval = a1_val + self.root_unit(q, f) * np.conj(a1_val)
        a2_val = self.a2(q) if with_a2 else None
        return LValueRecord(q, q.norm, complex(lval), complex(a1_val),
                            a2_val, terms, tail)

    # -- off-center --------------------------------------------------------
    def l_strip(self, q1, q2, s: complex, y_balance: float = 1.0,
                v_tail: float = 1e-9) -> complex:
        """L(s, chi_q) for q = q1 q2^2 in the mod-9 family, 0 <= Re s <= 1.

        Two-sided smoothed sum with V_s / V_(1-s) weights and the root
        factor (3 N(q1 q2))^(1/2-s) (2 pi)^(2s-1) Gamma(1-s)/Gamma(s)
        g3~(q1) conj(g3~(q2)).
        """
        from scipy.special import gamma as cgamma

        s = complex(s)
        if not (0.0 <= s.real <= 1.0):
            raise OutOfStrip(f"Re(s) = {s.real} outside [0, 1]")
        q1, q2 = as_eis(q1), as_eis(q2)
        prod = q1 * q2
        q = q1 * q2 * q2
        if (q.a % 9, q.b % 9) != (1, 0) or q == ONE or not is_squarefree(prod):
            raise NotInFamily(f"{q} is not in the mod-9 family")
        m = prod.norm
        rootpart = ((3.0 * m) ** (0.5 - s) * (2 * math.pi) ** (2 * s - 1)
                    * cgamma(1 - s) / cgamma(s)
                    * g3_tilde(1, q1, self.gauss) * np.conj(g3_tilde(1, q2, self.gauss)))
        sqm = math.sqrt(3.0 * m)
        # V decays like y^(-3.9) past 1+|s| (contour up to the G pole at 4);
        # 60 units of decay keep the tail far below the 1e-4 consistency target
        ycut = (1 + abs(s)) * 60.0
        t1 = ycut * y_balance * sqm
        t2 = ycut * sqm / y_balance
        out = 0.0 + 0j
        for tr, sgn, ss, bal in ((t1, +1, s, y_balance),
                                 (t2, -1, 1 - s, 1.0 / y_balance)):
            if tr > self.max_trunc:
                raise CapExceeded("l_strip truncation exceeds element table")
            k = int(np.searchsorted(self.pn, tr, side="right"))
            c1 = kernels.symbol_array(self.pa[:k], self.pb[:k], q1.a, q1.b)
            chi = OMEGA_LUT[c1].copy()
            if q2.norm > 1:
                c2 = kernels.symbol_array(self.pa[:k], self.pb[:k], q2.a, q2.b)
                chi *= np.conj(OMEGA_LUT[c2])
            if sgn < 0:
                chi = np.conj(chi)
            chi_lam = symbol(LAMBDA, q).to_complex()
            if sgn < 0:
                chi_lam = np.conj(chi_lam)
            part = 0.0 + 0j
            g = 0
            while 3**g <= tr:
                kk = int(np.searchsorted(self.pn, tr / 3**g, side="right"))
                norms = (3**g) * self.pn[:kk].astype(float)
                ys = norms / (bal * sqm)
                uniq, inv = np.unique(ys, return_inverse=True)
                vv = v_s_batch(ss, uniq)
                wts = vv[inv] * norms ** (-ss)
                part += (chi_lam**g) * np.dot(chi[:kk], wts)
                g += 1
            out += part if sgn > 0 else rootpart * part
        return complex(out)


# ---------------------------------------------------------------------------
# L-value CSV cache
# ---------------------------------------------------------------------------

class LValueCache:
    """Append-only CSV cache of central L-values.

    Header comments record the evaluation parameters; reading with different
    parameters raises CacheMismatch.  Values round-trip exactly (repr).
    """

    COLUMNS = ["a", "b", "conductor_norm", "re_L", "im_L", "terms_used"]

    def __init__(self, path: str, max_norm: int, trunc_mult: float, f_kind: str):
        self.path = path
        self.key = {"max_norm": str(int(max_norm)),
                    "trunc_mult": repr(float(trunc_mult)),
                    "f_kind": f_kind}

    def load(self) -> Dict[Tuple[int, int], Tuple[complex, int]]:
        if not os.path.exists(self.path):
            return {}
        out: Dict[Tuple[int, int], Tuple[complex, int]] = {}
        with open(self.path, newline="") as fh:
            header: Dict[str, str] = {}
            rows = []
            for line in fh:
                if line.startswith("#"):
                    k, _, v = line[1:].strip().partition("=")
                    header[k.strip()] = v.strip()
                else:
                    rows.append(line)
            for k, v in self.key.items():
                if header.get(k) != v:
                    raise CacheMismatch(
                        f"cache {self.path}: {k}={header.get(k)!r} != expected {v!r}")
            rd = csv.reader(rows)
            cols = next(rd, None)
            if cols != self.COLUMNS:
                raise CacheMismatch(f"cache {self.path}: unexpected columns {cols}")
            for row in rd:
                out[(int(row[0]), int(row[1]))] = (
                    complex(float(row[3]), float(row[4])), int(row[5]))
        return out

    def write(self, records: Iterable[LValueRecord]) -> None:
        tmp = self.path + ".tmp"
        with open(tmp, "w", newline="") as fh:
            for k, v in self.key.items():
                fh.write(f"# {k} = {v}\n")
            w = csv.writer(fh)
            w.writerow(self.COLUMNS)
            for r in records:
                w.writerow([r.q.a, r.q.b, r.conductor_norm,
                            repr(r.L_half.real), repr(r.L_half.imag), r.terms_used])
        os.replace(tmp, self.path)
