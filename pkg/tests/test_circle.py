import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sgtriple.circle import (
    FourierFunction,
    SampledCircleFunction,
    channel_norm,
    channel_norms,
    channel_series,
    circle_energy_trace,
    derivation_coefficient,
    dirac_spectrum_circle,
    holder_lower_constant,
    holder_seminorm,
    holder_upper_constant,
    kernel_energy,
    p_alpha,
    spectral_energy,
)
from sgtriple.errors import DomainError, ResolutionError
from sgtriple.specialfn import riemann_zeta


def trig_poly(rng, degree):
    modes = {0: rng.standard_normal()}
    for k in range(1, degree + 1):
        c = complex(*rng.standard_normal(2))
        modes[k], modes[-k] = c, c.conjugate()
    return FourierFunction.from_modes(modes)


def test_spectral_energy_examples():
    for a in (0.3, 0.75, 1.0):
        assert spectral_energy(FourierFunction.basis(1), a) == pytest.approx(1.0)
    assert spectral_energy(FourierFunction.from_modes({0: 3.0}), 0.6) == 0
    assert spectral_energy(FourierFunction.basis(2), 0.5) == pytest.approx(2.0)


def test_kernel_energy_examples():
    e1 = FourierFunction.basis(1).to_samples(3 * 2**10)
    assert kernel_energy(e1, 0.75).value == pytest.approx(1.0, abs=1e-3)
    e2 = FourierFunction.basis(2).to_samples(3 * 2**10)
    assert kernel_energy(e2, 0.6).value == pytest.approx(2**1.2, abs=1e-3)
    assert kernel_energy(SampledCircleFunction(np.full(64, 2.5)), 0.6).value == 0.0


def test_kernel_energy_guards():
    with pytest.raises(ResolutionError):
        kernel_energy(SampledCircleFunction(np.arange(10.0)), 0.5)
    with pytest.raises(DomainError):
        kernel_energy(SampledCircleFunction(np.arange(64.0)), 1.0)


@pytest.mark.parametrize("alpha", [0.6, 0.75, 0.85])
def test_kernel_matches_spectral_within_bound(alpha):
    rng = np.random.default_rng(1)
    for deg in range(1, 9):
        f = trig_poly(rng, deg)
        r = kernel_energy(f.to_samples(1024), alpha)
        spectral_value = spectral_energy(f, alpha)
        assert abs(r.value - spectral_value) <= max(r.tail_bound, 1e-10 * spectral_value)
        assert abs(r.value / spectral_value - 1) < 1e-3


def test_channel_norm_examples():
    assert channel_norm(FourierFunction.basis(1), 0.5, 1) == pytest.approx(1.0)
    const = FourierFunction.from_modes({0: 1.0})
    assert channel_norm(const, 0.7, 3) == 0.0
    with pytest.raises(DomainError):
        channel_norm(const, 0.7, 0)


@given(st.integers(1, 30), st.floats(0.1, 1.0))
def test_channel_norm_bounded_by_energy(k, alpha):
    f = trig_poly(np.random.default_rng(k), 4)
    cn = channel_norm(f, alpha, k)
    assert 0 <= cn <= k ** (2 * alpha) * spectral_energy(f, alpha) * (1 + 1e-12)


def test_channel_norms_against_formula():
    rng = np.random.default_rng(2)
    f = trig_poly(rng, 5)
    a = 0.7
    for k in (-3, 1, 7):
        direct = 0.25 * sum(
            (abs(k) ** (2 * a) + abs(p) ** (2 * a) - abs(p - k) ** (2 * a)) ** 2 * abs(c) ** 2
            for p, c in zip(f.modes, f.coeffs)
        )
        assert channel_norms(f, a, [k])[0] == pytest.approx(direct, rel=1e-12)


def test_circle_energy_trace_example():
    tr = circle_energy_trace(FourierFunction.basis(1), 0.5, 3.0)
    assert tr.second == pytest.approx(2 * riemann_zeta(1.5).value)
    assert tr.second == pytest.approx(5.2247, abs=1e-4)
    assert tr.first <= tr.second
    with pytest.raises(DomainError):
        circle_energy_trace(FourierFunction.basis(1), 0.5, 2.0)


def test_channel_series_tail_against_long_head():
    f = trig_poly(np.random.default_rng(3), 3)
    v, err, _ = channel_series(f, 0.8, 2.0)
    long_v, long_err, _ = channel_series(f, 0.8, 2.0, K=20000)
    assert abs(v - long_v) <= err + long_err


def test_dirac_spectrum_examples():
    v = dirac_spectrum_circle(1.0, 1.0, 0, 2)
    assert sorted(v) == pytest.approx([2 * math.pi] * 4 + [4 * math.pi] * 4)
    v = dirac_spectrum_circle(0.5, 1.0, 1, 1)
    assert list(v) == pytest.approx([4 * math.pi] * 4)


def test_dirac_partial_zeta():
    a, b, n, s = 0.85, 1.0, 2, 3.0
    v = dirac_spectrum_circle(a, b, n, 20000)
    partial = math.fsum(v ** (-s))
    closed = 4 * 2 ** (-s * b * n) * (2 * math.pi) ** (-s) * riemann_zeta(a * s).value
    assert partial == pytest.approx(closed, rel=1e-5)


@pytest.mark.parametrize("p, n", [(1, 2), (-3, 5), (4, -1), (2, 2)])
@pytest.mark.parametrize("alpha", [0.4, 0.75])
def test_derivation_matrix_identity(p, n, alpha):
    closed = 0.5 * (abs(p) ** (2 * alpha) + abs(n + p) ** (2 * alpha) - abs(n) ** (2 * alpha))
    assert derivation_coefficient(alpha, p, n, N=1024) == pytest.approx(closed, abs=1e-6)


def test_holder_constants_formulas():
    eps = 0.2
    c = eps**-0.5 * (math.pi / 4) ** eps * math.sqrt(4 + 23 * (4 ** (2 * eps) - 1))
    assert holder_upper_constant(eps) == pytest.approx(c, rel=1e-15)
    assert holder_lower_constant(0.6) == pytest.approx(math.sqrt(3 * math.sin(0.6 * math.pi)) / (16 * math.sqrt(2)))


@pytest.mark.parametrize("alpha", [0.5, 0.6, 0.8])
def test_holder_sandwich(alpha):
    eps = 0.2
    rng = np.random.default_rng(4)
    for f in (FourierFunction.basis(1), trig_poly(rng, 3)):
        s = f.to_samples(768)
        p = p_alpha(s, alpha)
        assert holder_lower_constant(alpha) * holder_seminorm(s, alpha) <= p
        assert p <= holder_upper_constant(eps) * holder_seminorm(s, alpha + eps)


def test_p_alpha_self_convergence():
    ref = p_alpha(FourierFunction.basis(1).to_samples(3 * 2**12), 0.5)
    for N in (96, 384, 1536):
        assert p_alpha(FourierFunction.basis(1).to_samples(N), 0.5) == pytest.approx(ref, rel=0.01)
    assert p_alpha(SampledCircleFunction(np.ones(96)), 0.5) == 0.0


def test_circle_distance_envelope():
    # a function with p_alpha <= 1 separates points within the Hoelder envelope
    alpha, eps = 0.6, 0.2
    s = FourierFunction.basis(1).to_samples(768)
    f = s.samples / p_alpha(s, alpha)
    N = len(f)
    for j in (1, 10, 100, 384):
        d = 2 * math.pi * j / N
        gap = abs(f[j] - f[0])
        assert gap <= d**alpha / holder_lower_constant(alpha)


def test_scalar_inequality_grid():
    rng = np.random.default_rng(5)
    k = rng.integers(-10**4, 10**4 + 1, 20000).astype(float)
    p = rng.integers(-10**4, 10**4 + 1, 20000).astype(float)
    k[:10] = 0
    p[10:20] = 0
    for a in np.arange(1, 11) / 10:
        lhs = (np.abs(p) ** (2 * a) + np.abs(k) ** (2 * a) - np.abs(k - p) ** (2 * a)) ** 2
        rhs = 4 * np.abs(k) ** (2 * a) * np.abs(p) ** (2 * a)
        assert np.all(lhs <= rhs * (1 + 1e-12) + 1e-9)
        assert np.all(lhs[:20] == 0) and np.all(rhs[:20] == 0)


@given(st.lists(st.integers(-40, 40), min_size=2, max_size=12, unique=True), st.floats(0.05, 1.0))
def test_conditional_negative_definiteness(points, alpha):
    pts = np.array(points, dtype=float)
    c = np.cos(np.arange(len(pts)) * 1.7 + alpha)
    c -= c.mean()
    M = np.abs(pts[:, None] - pts[None, :]) ** (2 * alpha)
    assert c @ M @ c <= 1e-9 * max(1.0, c @ c)
