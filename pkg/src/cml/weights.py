"""Smooth cutoff weights for the approximate functional equations and the
radial Poisson formula.

Phi_j(y) = (1/2 pi i) int_(c) (2 pi)^(-jw) y^(-w) (Gamma(1/2+w)/Gamma(1/2))^j dw/w

is evaluated by a trapezoidal rule on a vertical line.  For small y the
contour sits at Re(w) = -1/4 (collecting the residue 1 at w = 0, so the
computed integral is a small correction and there is no cancellation); for
large y it sits near the saddle w ~ 2 pi y^(1/j), so tiny values keep
relative accuracy.  For j = 1 there is a closed form, Phi_1(y) =
erfc(sqrt(2 pi y)), used as an independent cross-check.

V_s(y) uses the even entire factor G(u) = cos(pi u / (4A))^(-8A), whose
nearest poles sit at Re(u) = +-2A; contours stay inside (-1/2, 2A).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import erfc, gamma as cgamma, j0, loggamma
from scipy.special import roots_legendre as _roots_legendre

from .errors import QuadratureNotConverged


@lru_cache(maxsize=64)
def roots_legendre(n: int):
    """Cached Gauss-Legendre nodes (scipy recomputes them per call)."""
    return _roots_legendre(n)

ArrayLike = Union[float, np.ndarray]

_SQRT_PI = math.sqrt(math.pi)


def _phi_contour_sum(j: int, ys: np.ndarray, c: float, h: float, tmax: float) -> np.ndarray:
    """(1/2 pi) * h * sum over nodes w = c + i k h of the Phi_j integrand.

    Conjugate symmetry in t is used: value = h/(2 pi) * (f(c) + 2 Re sum_{k>=1}).
    """
    t = np.arange(0.0, tmax, h)
    w = c + 1j * t
    lg = j * (-w * math.log(2 * math.pi) + loggamma(0.5 + w) - math.log(_SQRT_PI))
    out = np.empty(len(ys))
    ly = np.log(ys)
    chunk = 256
    for i0 in range(0, len(ys), chunk):
        sl = slice(i0, min(i0 + chunk, len(ys)))
        vals = np.exp(lg - np.outer(ly[sl], w)) / w
        out[sl] = (vals[:, 0].real + 2.0 * vals[:, 1:].real.sum(axis=1)) * h / (2 * math.pi)
    return out


def _phi_refined(j: int, sub: np.ndarray, c: float, rtol: float,
                 max_refine: int) -> np.ndarray:
    h, tmax = 1.0 / 32, abs(c) + 60.0
    prev = _phi_contour_sum(j, sub, c, h, tmax)
    for _ in range(max_refine):
        h /= 2
        tmax *= 1.25
        cur = _phi_contour_sum(j, sub, c, h, tmax)
        if np.max(np.abs(cur - prev)) <= rtol * max(1.0, float(np.max(np.abs(cur)))):
            return cur
        prev = cur
    raise QuadratureNotConverged(f"Phi_{j} quadrature did not stabilise")


def mellin_phi(j: int, y: ArrayLike, rtol: float = 1e-9, max_refine: int = 6) -> ArrayLike:
    """Phi_j(y) by contour quadrature with doubling refinement.

    y < 1/2 uses Re(w) = -1/4 plus the residue 1 at w = 0; larger y is
    processed in octave bands with the contour near the saddle
    2 pi y^(1/j), which preserves relative accuracy deep in the tail.
    """
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(ys <= 0):
        raise ValueError("Phi_j is defined for y > 0")
    out = np.empty_like(ys)
    small = ys < 0.5
    if np.any(small):
        out[small] = _phi_refined(j, ys[small], -0.25, rtol, max_refine) + 1.0
    rest = ~small
    if np.any(rest):
        yr = ys[rest]
        octs = np.floor(np.log2(yr / 0.5)).astype(int)
        vals = np.empty_like(yr)
        for o in np.unique(octs):
            band = octs == o
            y0 = 0.5 * 2.0 ** (o + 0.5)  # geometric midpoint of the octave
            c = max(2.0, 2 * math.pi * y0 ** (1.0 / j))
            vals[band] = _phi_refined(j, yr[band], c, rtol, max_refine)
        out[rest] = vals
    return float(out[0]) if np.isscalar(y) or np.asarray(y).ndim == 0 else out


def phi(j: int, y: ArrayLike) -> ArrayLike:
    """The cutoff Phi_j; j = 1 satisfies Phi_1(y) = erfc(sqrt(2 pi y))."""
    if j not in (1, 2):
        raise ValueError("j must be 1 or 2")
    return mellin_phi(j, y)


class PhiTable:
    """Dense log-grid table of Phi_j with cubic-spline evaluation.

    Built once per run; absolute interpolation error is far below 1e-10, so
    the table can stand in for the quadrature inside the big character sums.
    """

    def __init__(self, j: int, ymin: float = 1e-7, ymax: float = 60.0,
                 step: float = 0.004):
        self.j = j
        n = int(math.ceil((math.log(ymax) - math.log(ymin)) / step)) + 1
        self.lg = np.linspace(math.log(ymin), math.log(ymax), n)
        grid = np.exp(self.lg)
        vals = mellin_phi(j, grid)
        self.ymin, self.ymax = ymin, ymax
        self._spline = CubicSpline(self.lg, vals)
        below = np.nonzero(np.abs(vals) < 1e-16)[0]
        #: smallest tabulated y with |Phi_j| < 1e-16 (truncation point)
        self.cutoff = float(grid[below[0]]) if len(below) else ymax

    def __call__(self, y: ArrayLike) -> ArrayLike:
        ys = np.asarray(y, dtype=float)
        scalar = ys.ndim == 0
        ys = np.atleast_1d(ys)
        out = np.zeros_like(ys)
        lo = ys < self.ymin
        mid = (~lo) & (ys <= self.ymax)
        if np.any(mid):
            out[mid] = self._spline(np.log(ys[mid]))
        if np.any(lo):
            out[lo] = mellin_phi(self.j, ys[lo])
        return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# V_s for the off-center functional equation
# ---------------------------------------------------------------------------

def _g_factor(w: np.ndarray, a_param: int) -> np.ndarray:
    return np.cos(math.pi * w / (4 * a_param)) ** (-8 * a_param)


def v_s(s: complex, y: float, a_param: int = 2, rtol: float = 1e-9,
        max_refine: int = 6) -> complex:
    """V_s(y): inverse Mellin of G(w) Gamma(s+w)/(Gamma(s) w) at (2 pi y)."""
    s = complex(s)
    if y <= 0:
        raise ValueError("y must be positive")
    if not (0.05 <= s.real <= 1.6):
        raise ValueError("v_s supports Re(s) in [0.05, 1.6]")
    ycut = 0.25 * (1 + abs(s))
    if y < ycut:
        c, resid = -min(s.real, 0.5) / 2, 1.0
    else:
        c, resid = min(max(2.0, 2 * math.pi * y), 2 * a_param - 0.5), 0.0

    def attempt(h: float, tmax: float) -> complex:
        t = np.arange(0.0, tmax, h)
        vals = _vs_integrand(s, y, a_param, c + 1j * t)
        # conjugate symmetry holds only for real s; sum both half-lines
        vals_m = _vs_integrand(s, y, a_param, c - 1j * t[1:])
        return (vals.sum() + vals_m.sum()) * h / (2 * math.pi)

    h, tmax = 1.0 / 32, 40.0
    prev = attempt(h, tmax)
    for _ in range(max_refine):
        h /= 2
        tmax *= 1.25
        cur = attempt(h, tmax)
        if abs(cur - prev) <= rtol * max(1.0, abs(cur)):
            return cur + resid
        prev = cur
    raise QuadratureNotConverged("V_s quadrature did not stabilise")


def _vs_integrand(s: complex, y: float, a_param: int, w: np.ndarray) -> np.ndarray:
    num = _g_factor(w, a_param) * cgamma(s + w) / cgamma(s)
    return (2 * math.pi * y) ** (-w) * num / w


def v_s_batch(s: complex, ys: np.ndarray, a_param: int = 2,
              h: float = 1.0 / 64, tmax: float = 60.0) -> np.ndarray:
    """Vectorized V_s over many arguments (fixed contours, two bands).

    Matches v_s to ~1e-10; used by the strip evaluator where thousands of
    weights share one s.
    """
    s = complex(s)
    ys = np.asarray(ys, dtype=float)
    out = np.empty(len(ys), dtype=np.complex128)
    ycut = 0.25 * (1 + abs(s))
    for mask, c, resid in ((ys < ycut, -min(s.real, 0.5) / 2, 1.0),
                           (ys >= ycut, 2.0, 0.0)):
        if not np.any(mask):
            continue
        t = np.arange(-tmax, tmax, h)
        w = c + 1j * t
        base = _g_factor(w, a_param) * cgamma(s + w) / (cgamma(s) * w)
        ly = np.log(2 * math.pi * ys[mask])
        vals = np.empty(int(mask.sum()), dtype=np.complex128)
        for i0 in range(0, len(vals), 256):
            sl = slice(i0, min(i0 + 256, len(vals)))
            vals[sl] = np.exp(-np.outer(ly[sl], w)) @ base
        out[mask] = vals * h / (2 * math.pi) + resid
    return out


# ---------------------------------------------------------------------------
# Test functions F and their Mellin transforms
# ---------------------------------------------------------------------------

def _bump(t: ArrayLike) -> ArrayLike:
    t = np.asarray(t, dtype=float)
    inside = (t > 1.0) & (t < 2.0)
    out = np.zeros_like(t)
    ti = t[inside]
    out[inside] = np.exp(-1.0 / ((ti - 1.0) * (2.0 - ti)))
    return out


def _smoothstep_sigma(x: ArrayLike) -> ArrayLike:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def _smoothstep(t: ArrayLike) -> ArrayLike:
    """C-infinity plateau: 0 outside (1,2), 1 on [1.1, 1.9]."""
    t = np.asarray(t, dtype=float)
    up = _smoothstep_sigma((t - 1.0) / 0.1)
    up = up / (up + _smoothstep_sigma((1.1 - t) / 0.1))
    dn = _smoothstep_sigma((2.0 - t) / 0.1)
    dn = dn / (dn + _smoothstep_sigma((t - 1.9) / 0.1))
    return up * dn


F_KINDS = ("bump", "smoothstep")


def test_function(kind: str, t: ArrayLike) -> ArrayLike:
    """The weight F: compactly supported in (1,2) with 0 <= F <= 1."""
    if kind == "bump":
        val = _bump(t)
    elif kind == "smoothstep":
        val = _smoothstep(t)
    else:
        raise ValueError(f"unknown test function kind {kind!r}")
    return float(val) if np.asarray(t).ndim == 0 else val


def f_check(kind: str, w: complex, n_nodes: int = 400) -> complex:
    """F-check(w) = int_0^infty F(t) t^w dt (support makes this finite)."""
    x, wts = roots_legendre(n_nodes)
    t = 1.5 + 0.5 * x  # map to (1, 2)
    f = test_function(kind, t)
    val = complex(np.sum(wts * f * t ** complex(w))) * 0.5
    x2, wts2 = roots_legendre(2 * n_nodes)
    t2 = 1.5 + 0.5 * x2
    val2 = complex(np.sum(wts2 * test_function(kind, t2) * t2 ** complex(w))) * 0.5
    if abs(val - val2) > 1e-10:
        raise QuadratureNotConverged(f"f_check({kind}, {w}) unstable")
    return val2


# ---------------------------------------------------------------------------
# Radial Fourier transform (Bessel)
# ---------------------------------------------------------------------------

_BESSEL_SCALE = 4 * math.pi / (9 * math.sqrt(3.0))


def v_ddot(v_func: Union[str, Callable[[np.ndarray], np.ndarray]],
           u_abs: float, rtol: float = 1e-9) -> float:
    """int_0^infty t V(t^2) J0(4 pi t |u| / (9 sqrt 3)) dt for compact V.

    V may be a test-function kind name or any callable supported in (1,2).
    """
    if isinstance(v_func, str):
        kind = v_func
        v_func = lambda x: test_function(kind, x)  # noqa: E731
    lo, hi = 1.0, math.sqrt(2.0)
    freq = _BESSEL_SCALE * abs(u_abs)
    # bucket the node count so the cached Legendre rules are reused
    need = 200 + 8 * int(freq * (hi - lo) / (2 * math.pi) + 1)
    n = 256 * int((need + 255) // 256)

    def attempt(m: int) -> float:
        x, wts = roots_legendre(min(m, 8192))
        t = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x
        vals = t * v_func(t * t) * j0(freq * t)
        return float(np.sum(wts * vals)) * 0.5 * (hi - lo)

    a, b = attempt(n), attempt(2 * n)
    if abs(a - b) > rtol * max(1.0, abs(b)) + 1e-14:
        c = attempt(4 * n)
        if abs(b - c) > rtol * max(1.0, abs(c)) + 1e-14:
            raise QuadratureNotConverged("v_ddot quadrature unstable")
        return c
    return b
