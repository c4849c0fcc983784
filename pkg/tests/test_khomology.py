import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sgtriple import khomology as kh
from sgtriple.errors import AliasingError, DomainError, NonInvertibleError
from sgtriple.gasket import word_str, words_upto

# roots bounded away from the unit circle keep the index numerically robust
root_st = st.tuples(
    st.one_of(st.floats(0.2, 0.7), st.floats(1.4, 5.0)), st.floats(0, 2 * np.pi)
).map(lambda rt: rt[0] * np.exp(1j * rt[1]))


def _poly_symbol(roots, N=256):
    def fn(theta):
        z = np.exp(1j * theta)
        return np.prod([z - r for r in roots], axis=0) if roots else np.ones_like(z)

    return kh.SymbolLoop.from_callable(fn, N)


def _expected_winding(roots):
    return sum(1 for r in roots if abs(r) < 1)


@pytest.mark.parametrize("k", [-3, -1, 0, 1, 2, 5])
def test_monomial_pairing_equals_winding(k):
    u = kh.SymbolLoop.monomial(k)
    assert kh.winding_number(u) == k
    assert kh.pairing_index(u) == k


def test_sector_indices_example():
    assert kh.sector_indices(kh.SymbolLoop.monomial(2)) == {-1: -2, 0: 0, 1: 2}
    assert kh.sector_indices(kh.SymbolLoop.constant(3.0)) == {-1: 0, 0: 0, 1: 0}


@settings(max_examples=25)
@given(st.lists(root_st, max_size=3), st.lists(root_st, max_size=2))
def test_pairing_is_a_homomorphism(a, b):
    u, v = _poly_symbol(a), _poly_symbol(b)
    assert kh.pairing_index(u) == _expected_winding(a) == kh.winding_number(u)
    assert kh.pairing_index(u * v) == kh.pairing_index(u) + kh.pairing_index(v)


@settings(max_examples=20)
@given(st.lists(root_st, min_size=1, max_size=5))
def test_sector_indices_sum_to_zero(roots):
    idx = kh.sector_indices(_poly_symbol(roots))
    assert sum(idx.values()) == 0


@pytest.mark.parametrize("N", [64, 128, 256])
@pytest.mark.parametrize("degree", [1, 3, 5])
def test_stabilization_over_truncations(N, degree):
    roots = [0.5 * np.exp(2j * np.pi * i / degree) for i in range(degree)]
    assert kh.pairing_index(_poly_symbol(roots), N_trunc=N) == degree


def test_toeplitz_dims_of_monomial():
    ker, coker = kh.toeplitz_dims({2: 1.0}, 16, 1.0)
    assert (ker, coker) == (0, 2)
    ker, coker = kh.toeplitz_dims({-2: 1.0}, 16, 1.0)
    assert (ker, coker) == (2, 0)


def test_module_relations():
    rel = kh.module_relations_check(0.85)
    assert rel.ok, rel.as_dict()
    assert all(sum(v.values()) == 0 for v in rel.sector_sums.values())


def test_module_matrices_shapes():
    mats = kh.module_matrices(8)
    F = mats["F"]
    assert F.shape == (34, 34)
    assert np.array_equal(F, F.T)


def test_module_relation_errors():
    with pytest.raises(DomainError):
        kh.module_relations_check(0.85, K=4)
    with pytest.raises(DomainError):
        kh.module_relations_check(1.0)


def test_gasket_generator_pairings():
    assert kh.gasket_pairing("") == 1
    assert kh.gasket_pairing("01") == 1
    assert kh.gasket_pairing("", tau="0") == 0
    assert kh.gasket_pairing("0", tau="") == 0


def test_gasket_pairing_vectors_are_indicators():
    for s in ["", "1", "20"]:
        vec = kh.pairing_vector(kh.GasketSymbol.generator(s), 2)
        assert vec == {word_str(t): int(t == tuple(map(int, s))) for t in words_upto(2)}


def test_gasket_pairing_additive():
    g = kh.GasketSymbol.generator
    sym = g("") * g("") * g("2")
    vec = kh.pairing_vector(sym, 1)
    assert vec[word_str(())] == 2 and vec["2"] == 1 and vec["0"] == 0
    assert set(kh.pairing_vector(kh.GasketSymbol.constant(2j), 1).values()) == {0}


def test_generator_is_unimodular():
    xs = np.linspace(0, 1, 7)
    vals = kh.GasketSymbol.generator("1")(xs, np.zeros_like(xs))
    assert np.allclose(np.abs(vals), 1)


def test_compactness_proxy_decays():
    s6 = kh.compactness_profile((1.0, 0.0, 0.0), 6)
    s8 = kh.compactness_profile((1.0, 0.0, 0.0), 8)
    assert s6[99] <= 10 * s8[99]
    assert s6[0] == s8[0]
    assert np.all(np.diff(s8) <= 0)


def test_symbol_errors():
    with pytest.raises(NonInvertibleError):
        kh.SymbolLoop(np.array([1.0, 0.0, 1.0, 1.0]))
    with pytest.raises(NonInvertibleError):
        kh.GasketSymbol.constant(0)
    with pytest.raises(DomainError):
        kh.SymbolLoop(np.array([1.0, 1.0]))
    with pytest.raises(DomainError):
        kh.SymbolLoop.monomial(1, 16) * kh.SymbolLoop.monomial(1, 32)
    with pytest.raises(AliasingError):
        kh.winding_number(kh.SymbolLoop.monomial(4, 8))
    with pytest.raises(DomainError):
        kh.pairing_index(kh.SymbolLoop.monomial(1), N_trunc=0)
