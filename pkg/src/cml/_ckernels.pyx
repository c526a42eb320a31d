# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: cubic residue symbol, prime cubic Gauss sums,
factored Gauss-sum assembly, and the central pair sum of the second-moment
oracle.  Same API and semantics as cml._kernels_py (the reference
implementation); int64 arithmetic, callers guarantee desk-scale ranges.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, M_PI
from libc.stdlib cimport free, malloc

cnp.import_array()

IMPLEMENTATION = "compiled"

cdef double OM_RE = -0.5
cdef double OM_IM = 0.8660254037844386467637231707529362


cdef inline cnp.int64_t _floordiv(cnp.int64_t a, cnp.int64_t b) nogil:
    # C division truncates toward zero; emulate Python floor division (b > 0)
    cdef cnp.int64_t q = a / b
    if a % b != 0 and (a < 0) != (b < 0):
        q -= 1
    return q


cdef inline cnp.int64_t _mod(cnp.int64_t a, cnp.int64_t b) nogil:
    cdef cnp.int64_t r = a % b
    if r < 0:
        r += b
    return r


cdef int _cubic_symbol(cnp.int64_t a, cnp.int64_t b,
                       cnp.int64_t c, cnp.int64_t d) nogil:
    """((a+bw)/(c+dw))_3 for primary c+dw: 0..2 = exponent of w, 3 = zero."""
    cdef cnp.int64_t t = 0, n, u, v, qa, qb, ta, tb, u9, v9, a2, a3, e, tmp
    while True:
        n = c * c - c * d + d * d
        if n == 1:
            return <int>_mod(t, 3)
        u = a * (c - d) + b * d
        v = b * c - a * d
        qa = _floordiv(2 * u + n, 2 * n)
        qb = _floordiv(2 * v + n, 2 * n)
        a -= qa * c - qb * d
        b -= qa * d + qb * c - qb * d
        if a == 0 and b == 0:
            return 3
        # supplementary-law exponents of the denominator
        u9 = (_mod(c, 9) - 1) / 3
        v9 = _mod(d, 9) / 3
        a3 = v9 if v9 < 2 else v9 - 3
        tmp = _mod(-u9 - a3, 3)
        a2 = tmp if tmp < 2 else tmp - 3
        while _mod(a + b, 3) == 0:
            ta = (2 * b - a) / 3
            tb = (b - 2 * a) / 3
            a = ta
            b = tb
            t -= a3
        e = 0
        while not (_mod(a, 3) == 1 and _mod(b, 3) == 0):
            if _mod(-a, 3) == 1 and _mod(-b, 3) == 0:
                a = -a
                b = -b
                continue
            ta = -b
            tb = a - b
            a = ta
            b = tb
            e += 1
        t -= e * a2
        ta = a
        tb = b
        a = c
        b = d
        c = ta
        d = tb


def cubic_symbol(a, b, c, d):
    return _cubic_symbol(a, b, c, d)


def symbol_array(cnp.int64_t[::1] aa, cnp.int64_t[::1] bb,
                 cnp.int64_t c, cnp.int64_t d):
    cdef Py_ssize_t n = aa.shape[0], i
    out = np.empty(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] ov = out
    with nogil:
        for i in range(n):
            ov[i] = <cnp.uint8_t>_cubic_symbol(aa[i], bb[i], c, d)
    return out


cdef inline cnp.int64_t _powmod(cnp.int64_t g, cnp.int64_t e, cnp.int64_t p) nogil:
    cdef cnp.int64_t r = 1
    g %= p
    while e:
        if e & 1:
            r = r * g % p
        g = g * g % p
        e >>= 1
    return r


cdef cnp.int64_t _primitive_root(cnp.int64_t p, cnp.int64_t[::1] spf) nogil:
    cdef cnp.int64_t qs[16]
    cdef int nq = 0, i
    cdef cnp.int64_t m = p - 1, q, g
    while m > 1:
        q = spf[m]
        qs[nq] = q
        nq += 1
        while m % q == 0:
            m /= q
    g = 2
    while g < p:
        for i in range(nq):
            if _powmod(g, (p - 1) / qs[i], p) == 1:
                break
        else:
            return g
        g += 1
    return 0


def gauss_prime_sums(cnp.int64_t[::1] ps, cnp.int64_t[::1] aa,
                     cnp.int64_t[::1] bb, cnp.int64_t[::1] spf):
    """Classical-walk evaluation of g3(1, pi) per split prime (see pure ref)."""
    cdef Py_ssize_t n = ps.shape[0], i
    cdef cnp.int64_t pmax = 0
    for i in range(n):
        if ps[i] > pmax:
            pmax = ps[i]
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef double *zre = <double *>malloc(pmax * sizeof(double))
    cdef double *zim = <double *>malloc(pmax * sizeof(double))
    if zre == NULL or zim == NULL:
        free(zre); free(zim)
        raise MemoryError()
    cdef cnp.int64_t p, a, b, g, j, h, eps, m, hm, kappa, tpos, u
    cdef cnp.int64_t k
    cdef double s0r, s0i, s1r, s1i, s2r, s2i, wr, wi, cr, ci, tr, ti, gr, gi
    cdef double ang, step
    try:
        with nogil:
            for i in range(n):
                p = ps[i]
                a = aa[i]
                b = bb[i]
                g = _primitive_root(p, spf)
                j = _mod(-a * _powmod(b, p - 2, p), p)
                h = _powmod(g, (p - 1) / 3, p)
                eps = 1 if h == j else 2
                # e(u/p) table, refreshed exactly every 256 steps
                step = 2.0 * M_PI / p
                wr = cos(step)
                wi = sin(step)
                cr = 1.0
                ci = 0.0
                for u in range(p):
                    if (u & 255) == 0:
                        ang = step * u
                        cr = cos(ang)
                        ci = sin(ang)
                    zre[u] = cr
                    zim[u] = ci
                    tr = cr * wr - ci * wi
                    ci = cr * wi + ci * wr
                    cr = tr
                s0r = s0i = s1r = s1i = s2r = s2i = 0.0
                tpos = 1
                k = 0
                for u in range(p - 1):
                    if k == 0:
                        s0r += zre[tpos]; s0i += zim[tpos]
                    elif k == 1:
                        s1r += zre[tpos]; s1i += zim[tpos]
                    else:
                        s2r += zre[tpos]; s2i += zim[tpos]
                    tpos = tpos * g % p
                    k += eps
                    if k >= 3:
                        k -= 3
                # g(chi) = S0 + w S1 + w^2 S2
                gr = s0r + OM_RE * s1r - OM_IM * s1i + OM_RE * s2r + OM_IM * s2i
                gi = s0i + OM_RE * s1i + OM_IM * s1r + OM_RE * s2i - OM_IM * s2r
                # twist by conj(chi(2a - b))
                m = _mod(2 * a - b, p)
                hm = _powmod(m, (p - 1) / 3, p)
                if hm == 1:
                    kappa = 0
                elif hm == j:
                    kappa = 1
                else:
                    kappa = 2
                if kappa == 1:  # multiply by w^-1 = w^2
                    tr = OM_RE * gr + OM_IM * gi
                    gi = OM_RE * gi - OM_IM * gr
                    gr = tr
                elif kappa == 2:  # multiply by w^-2 = w
                    tr = OM_RE * gr - OM_IM * gi
                    gi = OM_RE * gi + OM_IM * gr
                    gr = tr
                ov[i] = gr + 1j * gi
    finally:
        free(zre)
        free(zim)
    return out


def g3_factored(cnp.int64_t ra, cnp.int64_t rb,
                cnp.int64_t[::1] ptr, cnp.int64_t[::1] pidx,
                cnp.int64_t[::1] pexp,
                cnp.int64_t[::1] pa, cnp.int64_t[::1] pb,
                cnp.int64_t[::1] pnorm, double complex[::1] pg3):
    """g3(r, c_i) for factored moduli (see pure reference for the algebra)."""
    cdef Py_ssize_t n = ptr.shape[0] - 1, i
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef cnp.int64_t k, jj, ell, ca, cb, q, ma, mb, ua, ub, nn, tu, tv, v, t64, s, kk
    cdef double qp
    cdef double complex g, local, om, om2
    om = OM_RE + 1j * OM_IM
    om2 = OM_RE - 1j * OM_IM
    with nogil:
        for i in range(n):
            g = 1.0
            ma = 1
            mb = 0
            for k in range(ptr[i], ptr[i + 1]):
                jj = pidx[k]
                ell = pexp[k]
                ca = pa[jj]
                cb = pb[jj]
                q = pnorm[jj]
                ua = ra * ma - rb * mb
                ub = ra * mb + rb * ma - rb * mb
                v = 0
                nn = ca * ca - ca * cb + cb * cb
                while True:
                    tu = ua * (ca - cb) + ub * cb
                    tv = ub * ca - ua * cb
                    if tu % nn != 0 or tv % nn != 0:
                        break
                    ua = tu / nn
                    ub = tv / nn
                    v += 1
                if ell <= v:
                    if ell % 3 != 0:
                        g = 0.0
                        break
                    qp = 1.0
                    for t64 in range(ell - 1):
                        qp *= q
                    local = qp * (q - 1.0)  # phi(pi^ell)
                elif ell == v + 1:
                    qp = 1.0
                    for t64 in range(v):
                        qp *= q
                    kk = ell % 3
                    if kk == 0:
                        local = -qp
                    elif kk == 1:
                        local = qp * pg3[jj]
                    else:
                        local = qp * pg3[jj].conjugate()
                else:
                    g = 0.0
                    break
                s = _cubic_symbol(ua, ub, ca, cb)
                kk = _mod(-s * ell, 3)
                if kk == 1:
                    local = local * om
                elif kk == 2:
                    local = local * om2
                g = g * local
                for t64 in range(ell):
                    tu = ma * ca - mb * cb
                    mb = ma * cb + mb * ca - mb * cb
                    ma = tu
            ov[i] = g
    return out


def a2_pair_sum(cnp.int64_t[::1] vals, double complex[::1] tvals,
                double[::1] w, cnp.int64_t bound):
    """sum_{i,j: vals[i]*vals[j] <= bound} T_i conj(T_j) w[v_i v_j]."""
    cdef Py_ssize_t n = vals.shape[0], i, j
    cdef cnp.int64_t vi, lim, prod
    cdef double complex acc = 0.0, ti
    with nogil:
        for i in range(n):
            vi = vals[i]
            if vi * vals[0] > bound:
                break
            lim = bound / vi
            ti = tvals[i]
            j = 0
            while j < n and vals[j] <= lim:
                acc += ti * tvals[j].conjugate() * w[vi * vals[j]]
                j += 1
    return complex(acc)
