"""Modified Bessel function of the second kind: oracle and property tests.

Reference values were generated with mpmath at 25+ significant digits and
frozen here; the implementation must match them to 1e-12 relative.
"""

import math

import numpy as np
import pytest
import scipy.special

from stdpp import specialfn
from stdpp.errors import InvalidParameterError

# (order, x, K_order(x)) from mpmath.besselk, dps >= 25
KV_TABLE = [
    (0.0, 0.1, 2.427069024702016612519),
    (0.0, 1.0, 0.4210244382407083333356),
    (0.0, 10.0, 1.77800623161676518113e-5),
    (0.5, 1.0, 0.4610685044478945584395759),
    (0.5, 2.0, 0.119937771968061447368),
    (1.0, 1e-8, 99999999.99999990481694),
    (1.0, 0.001, 999.996238156085574278),
    (1.0, 1.0, 0.60190723019723457473754),
    (1.0, 2.0 * math.pi, 0.0009869960576810451231707005),
    (1.0, 50.0, 3.444102226717555612592e-23),
    (1.5, 0.5, 3.225142810499760716168),
    (1.5, 1.0, 0.9221370088957891168791517),
    (2.0, 3.0, 0.06151045847174203765682),
    (0.01, 0.02, 4.029838177049242144668),
    (0.3, 1e-6, 116.1646306062691316345),
    (2.7, 0.3, 127.839142714584673434),
    (3.2, 7.0, 0.0008362538145029160911244),
    (4.5, 25.0, 5.148642909105087521656e-12),
]

# (x, x*K_1(x)) from mpmath, dps >= 25
XK1_TABLE = [
    (1e-8, 0.9999999999999990481694),
    (1e-4, 0.9999999508686404957253),
    (0.5, 0.8282205600016504468482),
    (1.0, 0.6019072301972345747375),
    (5.0, 0.02022306722726082104183),
    (50.0, 1.722051113358777806296e-21),
]


@pytest.mark.parametrize("order,x,expected", KV_TABLE)
def test_bessel_k_oracle(order, x, expected):
    got = specialfn.bessel_k(order, x)
    assert got == pytest.approx(expected, rel=1e-12)


def test_half_integer_closed_forms():
    # K_{1/2}(x) = sqrt(pi/(2x)) e^{-x};  K_{3/2}(x) = K_{1/2}(x) (1 + 1/x)
    for x in (0.05, 0.3, 1.0, 4.0, 17.0):
        k_half = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x)
        assert specialfn.bessel_k(0.5, x) == pytest.approx(k_half, rel=1e-12)
        assert specialfn.bessel_k(1.5, x) == pytest.approx(
            k_half * (1.0 + 1.0 / x), rel=1e-12)


def test_recurrence_identity():
    # K_{nu+1}(x) = K_{nu-1}(x) + (2 nu / x) K_nu(x)
    for nu in (1.0, 1.3, 2.4):
        for x in (0.2, 1.5, 8.0):
            lhs = specialfn.bessel_k(nu + 1.0, x)
            rhs = specialfn.bessel_k(nu - 1.0, x) \
                + (2.0 * nu / x) * specialfn.bessel_k(nu, x)
            assert lhs == pytest.approx(rhs, rel=1e-11)


def test_against_scipy_grid():
    xs = np.geomspace(1e-6, 60.0, 400)
    for nu in (0.0, 0.5, 1.0, 2.0, 3.7):
        ours = specialfn.bessel_k(nu, xs)
        ref = scipy.special.kv(nu, xs)
        mask = ref > 0
        assert np.max(np.abs(ours[mask] / ref[mask] - 1.0)) < 1e-11


@pytest.mark.parametrize("x,expected", XK1_TABLE)
def test_x_times_k1_oracle(x, expected):
    assert specialfn.x_times_k1(x) == pytest.approx(expected, rel=1e-12)


def test_x_times_k1_at_zero():
    assert specialfn.x_times_k1(0.0) == 1.0
    arr = specialfn.x_times_k1(np.array([0.0, 1.0]))
    assert arr[0] == 1.0
    assert arr[1] == pytest.approx(0.6019072301972346, rel=1e-12)


def test_x_times_k1_monotone_decreasing():
    xs = np.linspace(0.0, 30.0, 1000)
    vals = specialfn.x_times_k1(xs)
    assert vals[0] == 1.0
    assert np.all(np.diff(vals) < 0.0)
    assert np.all(vals > 0.0)
    assert np.all(vals <= 1.0)


def test_underflow_flushes_to_zero():
    # far tail: exp(-x) alone underflows, result reported as exactly 0.0
    assert specialfn.bessel_k(1.0, 800.0) == 0.0


def test_domain_errors():
    with pytest.raises(InvalidParameterError):
        specialfn.bessel_k(-0.5, 1.0)
    with pytest.raises(InvalidParameterError):
        specialfn.bessel_k(1.0, 0.0)
    with pytest.raises(InvalidParameterError):
        specialfn.bessel_k(1.0, -2.0)
    with pytest.raises(InvalidParameterError):
        specialfn.x_times_k1(-1.0)
    with pytest.raises(InvalidParameterError):
        specialfn.bessel_k(1.0, np.array([1.0, -1.0]))
