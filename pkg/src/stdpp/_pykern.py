"""Pure-python compute core.

Numerically matching twin of the compiled ``stdpp._ckern`` extension.  Selected
by ``stdpp._backend`` when the extension is unavailable or when
``STDPP_BACKEND=python`` is set.  Same function names and contracts as the
extension; inputs are assumed pre-validated by the public wrappers.
"""

import math

import numpy as np

# Taylor coefficients of the reciprocal gamma function,
# 1/Gamma(z) = sum_{k>=1} c_k z^k  (Abramowitz & Stegun 6.1.34).
_RGAMMA_C = (
    0.0,  # pad so that _RGAMMA_C[k] = c_k
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.04200263503409523553,
    0.16653861138229148950,
    -0.04219773455554433675,
    -0.00962197152787697356,
    0.00721894324666309954,
    -0.00116516759185906511,
    -0.00021524167411495097,
    0.00012805028238811619,
    -0.00002013485478078824,
    -0.00000125049348214267,
    0.00000113302723198170,
    -0.00000020563384169776,
    0.00000000611609510448,
    0.00000000500200764447,
    -0.00000000118127457049,
    0.00000000010434267117,
    0.00000000000778226344,
    -0.00000000000369680562,
    0.00000000000051003703,
    -0.00000000000002058326,
    -0.00000000000000534812,
    0.00000000000000122678,
    -0.00000000000000011813,
)

_EPS = 1.0e-16
_MAXIT = 10000
_DBL_MIN = 2.2250738585072014e-308


def _gam12(mu):
    # gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu)   (continuous at mu = 0)
    # gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2
    # Splitting the reciprocal-gamma series into odd/even parts avoids the
    # mu -> 0 cancellation of the naive difference.
    mu2 = mu * mu
    g1 = 0.0
    g2 = 0.0
    p = 1.0
    for k in range(1, 27, 2):
        g2 += _RGAMMA_C[k] * p
        g1 += _RGAMMA_C[k + 1] * p
        p *= mu2
    return -g1, g2


def kv(nu, x):
    """Modified Bessel function K_nu(x), nu >= 0, x > 0.

    Temme's series for x <= 2, a Steed-type continued fraction (CF2) for
    x > 2, then upward recurrence in the order.  Subnormal results are
    flushed to 0.0.
    """
    n = int(nu + 0.5)
    mu = nu - n
    mu2 = mu * mu
    if x <= 2.0:
        x2 = 0.5 * x
        pimu = math.pi * mu
        fact = 1.0 if abs(pimu) < 1e-290 else pimu / math.sin(pimu)
        d = -math.log(x2)
        e = mu * d
        fact2 = 1.0 if abs(e) < 1e-290 else math.sinh(e) / e
        gam1, gam2 = _gam12(mu)
        gampl = gam2 - mu * gam1  # 1/Gamma(1+mu)
        gammi = gam2 + mu * gam1  # 1/Gamma(1-mu)
        ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
        ssum = ff
        ee = math.exp(e)
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
            if abs(dl) < abs(ssum) * _EPS:
                break
        kmu = ssum
        knu1 = ssum1 * (2.0 / x)
    else:
        b = 2.0 * (1.0 + x)
        d = 1.0 / b
        h = delh = d
        q1 = 0.0
        q2 = 1.0
        a1 = 0.25 - mu2
        q = c = a1
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
            if abs(dels / s) < _EPS:
                break
        h = a1 * h
        expx = math.exp(-x)
        if expx == 0.0:
            return 0.0
        kmu = math.sqrt(math.pi / (2.0 * x)) * expx / s
        knu1 = kmu * (mu + x + 0.5 - h) / x
    for i in range(1, n + 1):
        kmu, knu1 = knu1, kmu + (2.0 * (mu + i) / x) * knu1
    if kmu < _DBL_MIN:
        return 0.0
    return kmu


def kv_many(nu, x):
    """K_nu over a 1-D float64 array of positive abscissae."""
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = kv(nu, x[i])
    return out


def xk1_many(x):
    """x*K_1(x) over a 1-D float64 array, with the continuous value 1 at 0."""
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        v = x[i]
        out[i] = 1.0 if v == 0.0 else v * kv(1.0, v)
    return out


def k_accumulate(x, y, t, lx, ly, lt, ugrid, tgrid):
    """Translation-weighted cumulative pair counts for the empirical K.

    Returns S with S[a, b] = sum over unordered pairs {i, j} of
    w_ij * 1[r_ij <= ugrid[a]] * 1[|t_i - t_j| <= tgrid[b]], where
    w_ij = 1 / ((lx - |dx|) (ly - |dy|) (lt - |dt|)).
    """
    nu_ = ugrid.shape[0]
    nt_ = tgrid.shape[0]
    hist = np.zeros((nu_ + 1, nt_ + 1))
    n = x.shape[0]
    for i in range(n - 1):
        dx = np.abs(x[i + 1:] - x[i])
        dy = np.abs(y[i + 1:] - y[i])
        dt = np.abs(t[i + 1:] - t[i])
        w = 1.0 / ((lx - dx) * (ly - dy) * (lt - dt))
        r = np.hypot(dx, dy)
        ia = np.searchsorted(ugrid, r, side="left")
        ib = np.searchsorted(tgrid, dt, side="left")
        np.add.at(hist, (ia, ib), w)
    np.cumsum(hist, axis=0, out=hist)
    np.cumsum(hist, axis=1, out=hist)
    return hist[:nu_, :nt_]


def g_accumulate(x, y, t, lx, ly, lt, ugrid, tgrid, bw_s, bw_t):
    """Translation-weighted Epanechnikov pair sums for the empirical pcf.

    Returns S with S[a, b] = sum over unordered pairs of
    w_ij * k_{bw_s}(r_ij - ugrid[a]) * k_{bw_t}(|dt_ij| - tgrid[b]) where
    k_b(z) = 0.75 (1 - (z/b)^2)_+ / b.
    """
    nu_ = ugrid.shape[0]
    nt_ = tgrid.shape[0]
    S = np.zeros((nu_, nt_))
    n = x.shape[0]
    for i in range(n - 1):
        dx = np.abs(x[i + 1:] - x[i])
        dy = np.abs(y[i + 1:] - y[i])
        dt = np.abs(t[i + 1:] - t[i])
        w = 1.0 / ((lx - dx) * (ly - dy) * (lt - dt))
        r = np.hypot(dx, dy)
        for a in range(nu_):
            zs = (r - ugrid[a]) / bw_s
            ms = np.abs(zs) < 1.0
            if not ms.any():
                continue
            ks = 0.75 * (1.0 - zs[ms] ** 2) / bw_s
            wks = w[ms] * ks
            dts = dt[ms]
            for b in range(nt_):
                zt = (dts - tgrid[b]) / bw_t
                mt = np.abs(zt) < 1.0
                if mt.any():
                    kt = 0.75 * (1.0 - zt[mt] ** 2) / bw_t
                    S[a, b] += float(np.sum(wks[mt] * kt))
    return S
