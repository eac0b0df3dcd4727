# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled compute core.

Numerically matching twin of ``stdpp._pykern``: same function names and
contracts, with the inner loops in C.  Selected by ``stdpp._backend`` when
available unless ``STDPP_BACKEND=python`` is set.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport (M_PI, cosh, exp, fabs, hypot, log, sin, sinh, sqrt)

cnp.import_array()

# Taylor coefficients of the reciprocal gamma function,
# 1/Gamma(z) = sum_{k>=1} c_k z^k  (Abramowitz & Stegun 6.1.34).
cdef double[27] _RGAMMA_C
_RGAMMA_C[0] = 0.0
_RGAMMA_C[1] = 1.0
_RGAMMA_C[2] = 0.57721566490153286061
_RGAMMA_C[3] = -0.65587807152025388108
_RGAMMA_C[4] = -0.04200263503409523553
_RGAMMA_C[5] = 0.16653861138229148950
_RGAMMA_C[6] = -0.04219773455554433675
_RGAMMA_C[7] = -0.00962197152787697356
_RGAMMA_C[8] = 0.00721894324666309954
_RGAMMA_C[9] = -0.00116516759185906511
_RGAMMA_C[10] = -0.00021524167411495097
_RGAMMA_C[11] = 0.00012805028238811619
_RGAMMA_C[12] = -0.00002013485478078824
_RGAMMA_C[13] = -0.00000125049348214267
_RGAMMA_C[14] = 0.00000113302723198170
_RGAMMA_C[15] = -0.00000020563384169776
_RGAMMA_C[16] = 0.00000000611609510448
_RGAMMA_C[17] = 0.00000000500200764447
_RGAMMA_C[18] = -0.00000000118127457049
_RGAMMA_C[19] = 0.00000000010434267117
_RGAMMA_C[20] = 0.00000000000778226344
_RGAMMA_C[21] = -0.00000000000369680562
_RGAMMA_C[22] = 0.00000000000051003703
_RGAMMA_C[23] = -0.00000000000002058326
_RGAMMA_C[24] = -0.00000000000000534812
_RGAMMA_C[25] = 0.00000000000000122678
_RGAMMA_C[26] = -0.00000000000000011813

cdef double _EPS = 1.0e-16
cdef int _MAXIT = 10000
cdef double _DBL_MIN = 2.2250738585072014e-308


cdef inline void _gam12(double mu, double *gam1, double *gam2) nogil:
    # Odd/even split of the reciprocal-gamma series; continuous at mu = 0.
    cdef double mu2 = mu * mu
    cdef double g1 = 0.0
    cdef double g2 = 0.0
    cdef double p = 1.0
    cdef int k
    for k in range(1, 27, 2):
        g2 += _RGAMMA_C[k] * p
        g1 += _RGAMMA_C[k + 1] * p
        p *= mu2
    gam1[0] = -g1
    gam2[0] = g2


cdef double _kv(double nu, double x) nogil:
    cdef int n = <int>(nu + 0.5)
    cdef double mu = nu - n
    cdef double mu2 = mu * mu
    cdef double x2, pimu, fact, d, e, fact2, gam1, gam2, gampl, gammi
    cdef double ff, ssum, ee, p, q, c, dl, ssum1
    cdef double b, h, delh, q1, q2, a1, a, s, qnew, dels, expx
    cdef double kmu, knu1, tmp
    cdef int i
    if x <= 2.0:
        x2 = 0.5 * x
        pimu = M_PI * mu
        fact = 1.0 if fabs(pimu) < 1e-290 else pimu / sin(pimu)
        d = -log(x2)
        e = mu * d
        fact2 = 1.0 if fabs(e) < 1e-290 else sinh(e) / e
        _gam12(mu, &gam1, &gam2)
        gampl = gam2 - mu * gam1
        gammi = gam2 + mu * gam1
        ff = fact * (gam1 * cosh(e) + gam2 * fact2 * d)
        ssum = ff
        ee = exp(e)
        p = 0.5 * ee / gampl
        q = 0.5 / (ee * gammi)
        c = 1.0
        d = x2 * x2
        ssum1 = p
        for i in range(1, _MAXIT + 1):
            ff = (i * ff + p + q) / (i * i - mu2)
            c *= d / i
            p /= i - mu
            q /= i + mu
            dl = c * ff
            ssum += dl
            ssum1 += c * (p - i * ff)
            if fabs(dl) < fabs(ssum) * _EPS:
                break
        kmu = ssum
        knu1 = ssum1 * (2.0 / x)
    else:
        b = 2.0 * (1.0 + x)
        d = 1.0 / b
        h = d
        delh = d
        q1 = 0.0
        q2 = 1.0
        a1 = 0.25 - mu2
        q = a1
        c = a1
        a = -a1
        s = 1.0 + q * delh
        for i in range(2, _MAXIT + 1):
            a -= 2 * (i - 1)
            c = -a * c / i
            qnew = (q1 - b * q2) / a
            q1 = q2
            q2 = qnew
            q += c * qnew
            b += 2.0
            d = 1.0 / (b + a * d)
            delh = (b * d - 1.0) * delh
            h += delh
            dels = q * delh
            s += dels
            if fabs(dels / s) < _EPS:
                break
        h = a1 * h
        expx = exp(-x)
        if expx == 0.0:
            return 0.0
        kmu = sqrt(M_PI / (2.0 * x)) * expx / s
        knu1 = kmu * (mu + x + 0.5 - h) / x
    for i in range(1, n + 1):
        tmp = kmu
        kmu = knu1
        knu1 = tmp + (2.0 * (mu + i) / x) * knu1
    if kmu < _DBL_MIN:
        return 0.0
    return kmu


def kv(double nu, double x):
    """Modified Bessel function K_nu(x), nu >= 0, x > 0.

    Temme's series for x <= 2, a Steed-type continued fraction (CF2) for
    x > 2, then upward recurrence in the order.  Subnormal results are
    flushed to 0.0.
    """
    return _kv(nu, x)


def kv_many(double nu, double[::1] x):
    """K_nu over a 1-D float64 array of positive abscissae."""
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            ov[i] = _kv(nu, x[i])
    return out


def xk1_many(double[::1] x):
    """x*K_1(x) over a 1-D float64 array, with the continuous value 1 at 0."""
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    cdef double v
    with nogil:
        for i in range(n):
            v = x[i]
            ov[i] = 1.0 if v == 0.0 else v * _kv(1.0, v)
    return out


def k_accumulate(double[::1] x, double[::1] y, double[::1] t,
                 double lx, double ly, double lt,
                 double[::1] ugrid, double[::1] tgrid):
    """Translation-weighted cumulative pair counts for the empirical K.

    Returns S with S[a, b] = sum over unordered pairs {i, j} of
    w_ij * 1[r_ij <= ugrid[a]] * 1[|t_i - t_j| <= tgrid[b]], where
    w_ij = 1 / ((lx - |dx|) (ly - |dy|) (lt - |dt|)).
    """
    cdef Py_ssize_t nu_ = ugrid.shape[0]
    cdef Py_ssize_t nt_ = tgrid.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] hist = \
        np.zeros((nu_ + 1, nt_ + 1))
    cdef double[:, ::1] hv = hist
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, j, ia, ib, lo, hi, mid
    cdef double dx, dy, dt, w, r
    with nogil:
        for i in range(n - 1):
            for j in range(i + 1, n):
                dx = fabs(x[j] - x[i])
                dy = fabs(y[j] - y[i])
                dt = fabs(t[j] - t[i])
                w = 1.0 / ((lx - dx) * (ly - dy) * (lt - dt))
                r = hypot(dx, dy)
                # first index with ugrid[ia] >= r (searchsorted 'left')
                lo = 0
                hi = nu_
                while lo < hi:
                    mid = (lo + hi) >> 1
                    if ugrid[mid] < r:
                        lo = mid + 1
                    else:
                        hi = mid
                ia = lo
                lo = 0
                hi = nt_
                while lo < hi:
                    mid = (lo + hi) >> 1
                    if tgrid[mid] < dt:
                        lo = mid + 1
                    else:
                        hi = mid
                ib = lo
                hv[ia, ib] += w
        for ia in range(1, nu_ + 1):
            for ib in range(nt_ + 1):
                hv[ia, ib] += hv[ia - 1, ib]
        for ia in range(nu_ + 1):
            for ib in range(1, nt_ + 1):
                hv[ia, ib] += hv[ia, ib - 1]
    return hist[:nu_, :nt_]


def g_accumulate(double[::1] x, double[::1] y, double[::1] t,
                 double lx, double ly, double lt,
                 double[::1] ugrid, double[::1] tgrid,
                 double bw_s, double bw_t):
    """Translation-weighted Epanechnikov pair sums for the empirical pcf.

    Returns S with S[a, b] = sum over unordered pairs of
    w_ij * k_{bw_s}(r_ij - ugrid[a]) * k_{bw_t}(|dt_ij| - tgrid[b]) where
    k_b(z) = 0.75 (1 - (z/b)^2)_+ / b.
    """
    cdef Py_ssize_t nu_ = ugrid.shape[0]
    cdef Py_ssize_t nt_ = tgrid.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] S = np.zeros((nu_, nt_))
    cdef double[:, ::1] sv = S
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, j, a, b
    cdef double dx, dy, dt, w, r, zs, zt, ks, wks
    with nogil:
        for i in range(n - 1):
            for j in range(i + 1, n):
                dx = fabs(x[j] - x[i])
                dy = fabs(y[j] - y[i])
                dt = fabs(t[j] - t[i])
                w = 1.0 / ((lx - dx) * (ly - dy) * (lt - dt))
                r = hypot(dx, dy)
                for a in range(nu_):
                    zs = (r - ugrid[a]) / bw_s
                    if zs >= 1.0 or zs <= -1.0:
                        continue
                    ks = 0.75 * (1.0 - zs * zs) / bw_s
                    wks = w * ks
                    for b in range(nt_):
                        zt = (dt - tgrid[b]) / bw_t
                        if zt > -1.0 and zt < 1.0:
                            sv[a, b] += wks * 0.75 * (1.0 - zt * zt) / bw_t
    return S
