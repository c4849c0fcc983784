import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from sgtriple import spectral
from sgtriple.energy import VertexFunction, graph_energy, harmonic_extend
from sgtriple.errors import DomainError, PoleError, RegimeError, ZeroEnergyError
from sgtriple.gasket import words_upto
from sgtriple.spectral import TripleParams

P = TripleParams(0.85, 1.0)


def test_dimension_values():
    rep = spectral.dimension_report(P)
    assert rep.d == pytest.approx(math.log(3) / math.log(2), rel=1e-15)
    assert rep.delta == pytest.approx(2 - math.log(5 / 3) / math.log(2), rel=1e-15)
    assert rep.inverse_alpha == pytest.approx(1 / 0.85)
    assert rep.d_D == rep.d
    assert rep.volume_ok and rep.energy_ok and rep.metric_ok
    assert rep.poles[0] == complex(1 / 0.85, 0)
    assert len(rep.poles) == 1 + 7


@given(st.floats(0.2, 3.0))
def test_delta_identity(beta):
    p = TripleParams(0.5, beta)
    assert p.delta == pytest.approx(2 - (p.d * math.log(5 / 3) / math.log(3)), rel=1e-12)


def _zeta_oracle(s, a, b):
    s = mpmath.mpmathify(s)
    return 4 * mpmath.zeta(a * s) * (2 * mpmath.pi) ** (-s) / (1 - 3 * mpmath.mpf(2) ** (-s * b))


@pytest.mark.parametrize("s", [2.0, 2.5, 4.0, 1.7 + 3j])
def test_zeta_closed_form_vs_mpmath(s):
    with mpmath.workdps(30):
        ref = complex(_zeta_oracle(mpmath.mpmathify(s), 0.85, 1.0))
    assert abs(spectral.zeta_D(s, P) - ref) <= 1e-12 * abs(ref)


def test_zeta_normalizations_differ_by_power():
    s = 2.3
    ratio = spectral.zeta_D(s, P, "theorem") / spectral.zeta_D(s, P, "proof")
    assert ratio == pytest.approx((2 * math.pi) ** s)


@pytest.mark.parametrize("s", [2.0, 3.0])
def test_zeta_direct_within_bound(s):
    est = spectral.zeta_D_direct(s, P, m=30, K=10**5)
    exact = spectral.zeta_D(s, P).real
    assert abs(est.value - exact) <= est.tail_bound


def test_zeta_poles():
    with pytest.raises(PoleError):
        spectral.zeta_D(1 / 0.85, P)
    with pytest.raises(PoleError):
        spectral.zeta_D(P.d, P)
    with pytest.raises(DomainError):
        spectral.zeta_D_direct(1.0, P)
    with pytest.raises(DomainError):
        spectral.zeta_D(2.0, P, normalization="other")


def test_cell_volume_scaling():
    base = spectral.cell_volume((), P)
    assert base > 0
    for tau in words_upto(3):
        assert spectral.cell_volume(tau, P) == pytest.approx(base * 3.0 ** -len(tau), rel=1e-15)


@pytest.mark.parametrize("tau", [(), (0,), (1, 2)])
def test_volume_residue_matches_cell_volume(tau):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        est = spectral.volume_residue_check(tau, P, m=14, K=10**4)
    assert est.value == pytest.approx(spectral.cell_volume(tau, P), rel=0.01)


def test_volume_regime():
    bad = TripleParams(0.5, 1.0)
    with pytest.raises(RegimeError):
        spectral.cell_volume((), bad)
    with spectral.outside_regime_allowed():
        # no guarantee outside the regime, only that it evaluates
        assert math.isfinite(spectral.cell_volume((), bad))


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_richardson_exact_on_quadratics(coef):
    offsets = (0.02, 0.01, 0.005)
    vals = [coef[0] + coef[1] * h + coef[2] * h * h for h in offsets]
    value, _ = spectral.richardson(offsets, vals)
    assert value == pytest.approx(coef[0], abs=1e-9)


def test_richardson_errors():
    with pytest.raises(DomainError):
        spectral.richardson([0.1], [1.0])


@pytest.fixture(scope="module")
def constants():
    return spectral.harmonic_constants(P, L=8)


def test_harmonic_constants_invariant_under_boundary(constants):
    other = spectral.harmonic_constants(P, L=8, boundary=(0.3, -1.0, 2.0))
    # K_2 is a sup-type constant for one boundary; positivity and scale invariance hold
    scaled = spectral.harmonic_constants(P, L=8, boundary=(3.0, 0.0, 0.0))
    assert scaled.K2 == pytest.approx(constants.K2, rel=1e-12)
    assert np.allclose(scaled.C_k, constants.C_k, rtol=1e-12)
    assert other.K2 > 0


def test_channel_constants_range(constants):
    assert np.all(constants.C_k >= 0)
    ks = np.arange(1, len(constants.C_k) + 1)
    assert np.all(constants.C_k <= ks ** (2 * P.alpha))


@pytest.mark.parametrize("s", [1.3, 1.6, 2.5])
def test_channel_sum_bound(constants, s):
    z = spectral.riemann_zeta(P.alpha * s).value
    assert constants.C_of(s) <= 2 * constants.K2 * z


def test_harmonic_constants_reject_constants():
    with pytest.raises(ZeroEnergyError):
        spectral.harmonic_constants(P, boundary=(1.0, 1.0, 1.0))


def test_energy_trace_of_constant_is_zero():
    c = VertexFunction(1, np.full(6, 2.0))
    assert spectral.energy_trace(c, P, 1.5, m=2, L=5).value == 0


def test_energy_trace_quadratic_scaling():
    f = VertexFunction.from_boundary(1.0, 0.0, 0.0)
    a = spectral.energy_trace(f, P, 1.6, m=2, L=6).value
    b = spectral.energy_trace(VertexFunction.from_boundary(2.0, 0.0, 0.0), P, 1.6, m=2, L=6).value
    assert b == pytest.approx(4 * a, rel=1e-12)


def test_energy_trace_completion_independent_of_depth():
    # past the data level the level sums are geometric, so completed traces agree
    f = VertexFunction.from_boundary(1.0, 0.0, 0.0)
    t2 = spectral.energy_trace(f, P, 1.6, m=2, L=6).value
    t3 = spectral.energy_trace(f, P, 1.6, m=3, L=6).value
    assert t3 == pytest.approx(t2, rel=1e-3)


def test_energy_residue_near_closed_form(constants):
    f = VertexFunction.from_boundary(1.0, 0.0, 0.0)
    est = spectral.energy_residue(f, P, m=1, L=8)
    closed = spectral.closed_form_residue(P, constants, float(graph_energy(f)))
    assert est.value == pytest.approx(closed, rel=5e-3)


def test_energy_trace_domain():
    f = VertexFunction.from_boundary(1.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        spectral.energy_trace(f, P, 1.1)
    with pytest.raises(DomainError):
        spectral.energy_trace(harmonic_extend(f, 2), P, 1.6, m=1)


def test_energy_regime():
    with pytest.raises(RegimeError):
        spectral.energy_residue(VertexFunction.from_boundary(1.0, 0.0, 0.0), TripleParams(0.5, 1.0))
