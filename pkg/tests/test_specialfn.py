import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from sgtriple.errors import DomainError, PoleError, SingularArgumentError
from sgtriple.specialfn import (
    clausen_cos,
    clausen_cos_array,
    clausen_leading_constant,
    gamma_complex,
    gamma_fn,
    hurwitz_tail,
    phi_alpha,
    riemann_zeta,
    zeta_complex,
)

mpmath.mp.dps = 30


@pytest.mark.parametrize("x, expected", [(1, 1.0), (0.5, math.sqrt(math.pi)), (3, 2.0)])
def test_gamma_classical_values(x, expected):
    assert gamma_fn(x).value == pytest.approx(expected, rel=1e-13)


@given(st.floats(-20.5, 60.0).filter(lambda x: abs(x - round(x)) > 1e-3 or x > 0.5))
def test_gamma_matches_mpmath_within_bound(x):
    r = gamma_fn(x)
    ref = float(mpmath.gamma(x))
    assert abs(r.value - ref) <= r.abs_error_bound + 1e-300
    assert abs(r.value - ref) <= 1e-12 * abs(ref)


def test_gamma_complex_against_mpmath():
    for z in (0.3 + 2j, -1.7 + 0.4j, 5 - 3j):
        v, rel = gamma_complex(z)
        ref = complex(mpmath.gamma(z))
        assert abs(v - ref) <= 1e-12 * abs(ref)


def test_gamma_poles():
    for x in (0, -1, -5):
        with pytest.raises(PoleError):
            gamma_fn(x)


@pytest.mark.parametrize("s, expected", [(2, math.pi**2 / 6), (0, -0.5), (-1, -1 / 12)])
def test_zeta_classical_values(s, expected):
    assert riemann_zeta(s).value == pytest.approx(expected, rel=1e-12, abs=1e-14)


@given(st.floats(-12, 30).filter(lambda s: abs(s - 1) > 1e-2))
def test_zeta_matches_mpmath(s):
    r = riemann_zeta(s)
    ref = float(mpmath.zeta(s))
    assert abs(r.value - ref) <= max(r.abs_error_bound, 1e-12 * abs(ref)) + 1e-15


def test_zeta_complex_against_mpmath():
    for s in (2.55 + 3j, 0.5 + 14j, -2.3 + 1j):
        v, err = zeta_complex(s)
        assert abs(v - complex(mpmath.zeta(s))) <= max(err, 1e-11)


def test_zeta_pole():
    with pytest.raises(PoleError):
        riemann_zeta(1.0)


def test_hurwitz_tail_against_mpmath():
    x = np.array([1.2, 2.55, 4.0])
    v, err = hurwitz_tail(x, 1000)
    for xi, vi, ei in zip(x, v, err):
        ref = float(mpmath.zeta(xi, 1000))
        assert abs(vi - ref) <= ei + 1e-15 * ref
    with pytest.raises(DomainError):
        hurwitz_tail(np.array([1.0]), 10)


def test_clausen_examples():
    assert clausen_cos(-2.0, 1.0).value == 0.0
    assert clausen_cos(-1.0, math.pi).value == pytest.approx(-0.25, abs=1e-13)
    t = 1e-3
    lead = -math.gamma(2.5) * math.sin(0.75 * math.pi)
    assert clausen_cos(-1.5, t).value * t**2.5 == pytest.approx(lead, rel=0.02)


def test_clausen_closed_form_order_minus_one():
    theta = np.linspace(-math.pi, math.pi, 1001)
    theta = theta[theta != 0]
    v, _ = clausen_cos_array(-1.0, theta)
    assert np.max(np.abs(v + 1 / (4 * np.sin(theta / 2) ** 2))) < 1e-10


@pytest.mark.parametrize("order", [-0.3, -1.1, -1.5, -1.74])
def test_clausen_against_mpmath_clcos(order):
    theta = np.array([1e-3, 0.1, 1.0, 2.5, math.pi])
    v, err = clausen_cos_array(order, theta)
    for t, vi, ei in zip(theta, v, err):
        ref = float(mpmath.clcos(order, t))
        assert abs(vi - ref) <= ei + 1e-13 * abs(ref)


def test_clausen_abel_summed_series():
    # second oracle: sum k^(-s) rho^k cos(k theta) for rho close to 1
    order, rho, theta = -1.5, 1 - 1e-4, 1.3
    k = np.arange(1, 10**6 + 1, dtype=float)
    series = np.sum(k ** (-order) * rho**k * np.cos(k * theta))
    assert clausen_cos(order, theta).value == pytest.approx(series, rel=2e-3)


@given(st.floats(0.05, 0.95), st.floats(1e-6, math.pi))
def test_clausen_even_and_negative(alpha, theta):
    a = clausen_cos(-2 * alpha, theta).value
    b = clausen_cos(-2 * alpha, -theta).value
    assert a == b
    assert a < 0


@pytest.mark.parametrize("alpha", [0.55, 0.75, 0.87])
def test_clausen_leading_asymptote(alpha):
    t = 1e-4
    v = clausen_cos(-2 * alpha, t).value * t ** (1 + 2 * alpha)
    assert v == pytest.approx(-clausen_leading_constant(alpha), rel=0.01)


def test_clausen_singular_and_domain():
    with pytest.raises(SingularArgumentError):
        clausen_cos(-1.2, 0.0)
    with pytest.raises(DomainError):
        clausen_cos(0.5, 1.0)


def test_phi_alpha_examples():
    assert phi_alpha(0.5, math.pi).value == pytest.approx(math.pi / 2, rel=1e-12)
    assert phi_alpha(0.9, -0.2).value == phi_alpha(0.9, 0.2).value
    t = 1e-3
    v = phi_alpha(0.75, t).value
    assert v > 0
    assert t**2.5 * v / (2 * math.pi) == pytest.approx(math.gamma(2.5) * math.sin(0.75 * math.pi), rel=0.02)
