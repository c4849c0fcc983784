"""Index pairings and Fredholm-module relations at finite truncation.

Pairings follow the convention <F+, e_k> = k, which is minus the classical
Toeplitz index of T_{z^k}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .errors import AliasingError, DomainError, NonInvertibleError, NonStabilizedError
from .gasket import LACUNA_CORNERS, Word, WordLike, apply_word, word, words_upto

SECTORS = (-1, 0, 1)
INVERTIBILITY_TOL = 1e-12
# singular values below KERNEL_TOL * min|u| count as kernel; approximate
# kernel vectors of a tall section decay geometrically in the section size
KERNEL_TOL = 1e-3


@dataclass(frozen=True)
class SymbolLoop:
    """Samples u(2 pi j / N), j = 0..N-1, of an invertible loop."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex).ravel()
        if s.size < 3:
            raise DomainError("a symbol loop needs at least 3 samples")
        if not np.all(np.isfinite(s)):
            raise DomainError("symbol samples must be finite")
        if np.min(np.abs(s)) <= INVERTIBILITY_TOL * max(1.0, np.max(np.abs(s))):
            raise NonInvertibleError("symbol vanishes on the circle")
        object.__setattr__(self, "samples", s)

    @property
    def N(self) -> int:
        return self.samples.size

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], np.ndarray], N: int) -> "SymbolLoop":
        theta = 2 * np.pi * np.arange(N) / N
        return cls(np.asarray(fn(theta), dtype=complex))

    @classmethod
    def monomial(cls, k: int, N: int = 256) -> "SymbolLoop":
        return cls.from_callable(lambda t: np.exp(1j * k * t), N)

    @classmethod
    def constant(cls, c: complex = 1.0, N: int = 256) -> "SymbolLoop":
        return cls(np.full(N, complex(c)))

    @classmethod
    def trig(cls, coeffs: dict[int, complex], N: int = 256) -> "SymbolLoop":
        """Trigonometric polynomial sum_k c_k e^{ik theta}."""
        return cls.from_callable(
            lambda t: sum(c * np.exp(1j * k * t) for k, c in coeffs.items()) + 0 * t, N
        )

    def __mul__(self, other: "SymbolLoop") -> "SymbolLoop":
        if self.N != other.N:
            raise DomainError("symbols must share the sampling grid")
        return SymbolLoop(self.samples * other.samples)

    def fourier_coefficients(self) -> np.ndarray:
        """Coefficients c_k for k = -(N//2) .. N - N//2 - 1 (numpy fftshift order)."""
        return np.fft.fftshift(np.fft.fft(self.samples)) / self.N


def winding_number(u: SymbolLoop) -> int:
    """Total argument increment of the sampled loop divided by 2 pi."""
    s = u.samples
    steps = np.angle(np.roll(s, -1) / s)
    if np.max(np.abs(steps)) >= 0.95 * np.pi:
        raise AliasingError("phase step too close to pi; sample the loop more finely")
    total = float(np.sum(steps)) / (2 * np.pi)
    return int(round(total))


# ---------------------------------------------------------------------------
# Toeplitz sections


def _trig_truncation(u: SymbolLoop) -> dict[int, complex]:
    """Smallest-degree trig polynomial with the same winding as u.

    The degree grows until the sup-norm of the discarded tail (bounded by the
    l1 norm of the dropped coefficients) is below half the minimum modulus,
    so u and its truncation are homotopic through invertible loops.
    """
    N = u.N
    c = u.fourier_coefficients()
    ks = np.arange(-(N // 2), N - N // 2)
    # alias check: the top quarter of the band must carry negligible mass
    top = np.abs(ks) > N // 4
    if np.sum(np.abs(c[top])) > 0.25 * np.min(np.abs(u.samples)):
        raise AliasingError("symbol is not resolved by its samples")
    margin = 0.5 * np.min(np.abs(u.samples))
    mags = np.abs(c)
    for D in range(0, N // 2):
        tail = np.sum(mags[np.abs(ks) > D])
        if tail < margin:
            keep = np.abs(ks) <= D
            return {int(k): complex(v) for k, v in zip(ks[keep], c[keep]) if v != 0}
    raise AliasingError("no resolvable truncation of the symbol")


def _min_modulus(u: SymbolLoop) -> float:
    return float(np.min(np.abs(u.samples)))


def _section(coeffs: dict[int, complex], n: int) -> np.ndarray:
    """Rows 1..n+D, columns 1..n of the Toeplitz operator on span{e_k, k>0}."""
    D = max((abs(k) for k in coeffs), default=0)
    A = np.zeros((n + D, n), dtype=complex)
    cols = np.arange(n)
    for k, v in coeffs.items():
        rows = cols + k
        ok = (rows >= 0) & (rows < n + D)
        A[rows[ok], cols[ok]] += v
    return A


def _kernel_dim(A: np.ndarray, scale: float) -> int:
    if A.shape[1] == 0:
        return 0
    sv = np.linalg.svd(A, compute_uv=False)
    sv = np.concatenate([sv, np.zeros(max(0, A.shape[1] - sv.size))])
    return int(np.sum(sv <= KERNEL_TOL * scale))


def toeplitz_dims(coeffs: dict[int, complex], n: int, scale: float) -> tuple[int, int]:
    """(dim ker, dim coker) of the compression to span{e_1..e_n}.

    The tall section captures the whole image of the first n columns, so
    kernel vectors are exact; the cokernel is the kernel of the adjoint,
    whose symbol has conjugated, reflected coefficients.
    """
    adjoint = {-k: np.conj(v) for k, v in coeffs.items()}
    return _kernel_dim(_section(coeffs, n), scale), _kernel_dim(_section(adjoint, n), scale)


def _stabilized(coeffs: dict[int, complex], N_trunc: int, scale: float) -> tuple[int, int]:
    if N_trunc < 1:
        raise DomainError("N_trunc must be positive")
    dims = [toeplitz_dims(coeffs, n, scale) for n in (N_trunc, 2 * N_trunc, 4 * N_trunc)]
    if len(set(dims)) != 1:
        raise NonStabilizedError(f"kernel/cokernel dimensions did not stabilize: {dims}")
    return dims[0]


def pairing_index(u: SymbolLoop, N_trunc: int = 64) -> int:
    """Index pairing with the circle module, <F+, e_k> = k.

    Equals dim coker - dim ker of P+ u P+, i.e. minus the classical
    Fredholm index of the Toeplitz operator.
    """
    ker, coker = _stabilized(_trig_truncation(u), N_trunc, _min_modulus(u))
    return coker - ker


def sector_indices(u: SymbolLoop, N_trunc: int = 64) -> dict[int, int]:
    """Pairing-convention indices of P_e u P_e for e in {-1, 0, +1}."""
    coeffs = _trig_truncation(u)
    scale = _min_modulus(u)
    ker, coker = _stabilized(coeffs, N_trunc, scale)
    # P- is span{e_k, k<0}; reflecting k -> -k turns it into a P+ problem
    ker_m, coker_m = _stabilized({-k: v for k, v in coeffs.items()}, N_trunc, scale)
    # P0 u P0 acts on span{e_0} as multiplication by the mean of u
    zero = int(abs(coeffs.get(0, 0.0)) <= KERNEL_TOL * scale)
    return {-1: coker_m - ker_m, 0: zero - zero, 1: coker - ker}


# ---------------------------------------------------------------------------
# Graded module relations


@dataclass
class ModuleRelations:
    alpha: float
    K: int
    checks: dict[str, bool] = field(default_factory=dict)
    sector_sums: dict[int, dict[int, int]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "K": self.K,
            "checks": dict(self.checks),
            "sector_indices": {str(k): {str(e): v for e, v in d.items()} for k, d in self.sector_sums.items()},
            "ok": self.ok,
        }


def module_matrices(K: int) -> dict[str, np.ndarray]:
    """Integer matrices of the truncated graded module.

    The space is H- (+) H+, each indexed by j = -K..K. On H+ the basis is
    e_j; on H- the slot j != 0 holds e'_j (the normalized image of e_j under
    the derivation) and slot 0 holds a unit vector of the kernel of the
    adjoint derivation. The order puts H- first, so F = [[0, W], [W*, 0]]
    maps H+ to H- through W, and the grading is diag(-1, 1).
    "i_eps" is i times the odd symmetry, which is a real matrix.
    """
    if K < 1:
        raise DomainError("K must be positive")
    n = 2 * K + 1
    j = np.arange(-K, K + 1)
    W = np.diag((j != 0).astype(np.int64))
    S = np.diag(np.sign(j).astype(np.int64))
    V = W @ S
    Z = np.zeros((n, n), dtype=np.int64)
    I = np.eye(n, dtype=np.int64)
    Q0 = np.diag((j == 0).astype(np.int64))
    F = np.block([[Z, W], [W.T, Z]])
    i_eps = np.block([[Z, V], [V.T, Z]])
    gamma = np.block([[-I, Z], [Z, I]])
    P0 = np.block([[Q0, Z], [Z, I - S @ S]])
    return {"W": W, "S": S, "V": V, "F": F, "i_eps": i_eps, "gamma": gamma, "P0": P0, "Q0": Q0, "I": I}


def _derived_basis_orthonormal(alpha: float, K: int) -> bool:
    """|k|^{-alpha} times the derivation of e_k has unit norm for 0 < |k| <= K."""
    from .circle import FourierFunction, kernel_energy

    for k in range(1, K + 1):
        f = FourierFunction.basis(k).to_samples(1024)
        norm2 = kernel_energy(f, alpha).value / k ** (2 * alpha)
        if abs(norm2 - 1) > 1e-6:
            return False
    return True


def module_relations_check(alpha: float, K: int = 8, symbols: Iterable[int] = (-2, -1, 1, 2, 3)) -> ModuleRelations:
    if K < 8:
        raise DomainError("truncation K must be at least 8")
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    M = module_matrices(K)
    W, S, F, ie, g, P0, I = M["W"], M["S"], M["F"], M["i_eps"], M["gamma"], M["P0"], M["I"]
    II = np.eye(F.shape[0], dtype=np.int64)
    Z = np.zeros_like(W)
    IS = np.block([[I, Z], [Z, S]])
    WSW = W @ S @ W.T
    rep = ModuleRelations(alpha, K)
    c = rep.checks
    c["F_squared_is_I_minus_P0"] = np.array_equal(F @ F, II - P0)
    c["P0_is_projection"] = np.array_equal(P0 @ P0, P0)
    c["i_eps_is_conjugated_F"] = np.array_equal(ie, IS @ F @ IS)
    # eps = -i * i_eps, so -eps* eps = (i_eps)^T i_eps for a real i_eps
    c["minus_eps_star_eps_is_F_squared"] = np.array_equal(ie.T @ ie, F @ F)
    c["i_eps_F_is_diag"] = np.array_equal(ie @ F, np.block([[WSW, Z], [Z, S]]))
    c["i_F_eps_is_diag"] = np.array_equal(F @ ie, np.block([[WSW, Z], [Z, S]]))
    c["eps_commutes_with_F"] = np.array_equal(ie @ F, F @ ie)
    # i_eps symmetric and real  <=>  eps skew-adjoint
    c["eps_skew_adjoint"] = np.array_equal(ie.T, ie)
    c["gamma_anticommutes_F"] = np.array_equal(g @ F, -F @ g)
    c["gamma_anticommutes_eps"] = np.array_equal(g @ ie, -ie @ g)
    c["F_plus_is_S"] = np.array_equal((W @ S).T @ W, S)
    c["F_plus_kernel_dim_one"] = int(np.sum(np.diag(S) == 0)) == 1
    c["derived_basis_orthonormal"] = _derived_basis_orthonormal(alpha, K)
    for k in symbols:
        idx = sector_indices(SymbolLoop.monomial(k, 8 * (abs(k) + 4)), 64)
        rep.sector_sums[k] = idx
        c[f"sector_sum_zero_e{k}"] = sum(idx.values()) == 0
        c[f"pairing_e{k}"] = idx[1] == k
        c[f"tame_degeneracy_e{k}"] = idx[0] == 0
    return rep


# ---------------------------------------------------------------------------
# Gasket generators


@dataclass(frozen=True)
class GasketSymbol:
    """Product of unit angle functions about removed-triangle centers.

    Each factor (z - c_sigma)/|z - c_sigma| is continuous and unimodular on
    the gasket since c_sigma lies outside it; restricted to a lacuna it has
    winding 1 exactly when the lacuna encloses c_sigma.
    """

    factors: tuple[tuple[Word, int], ...] = ()
    scale: complex = 1.0

    @classmethod
    def generator(cls, sigma: WordLike) -> "GasketSymbol":
        return cls(((word(sigma), 1),))

    @classmethod
    def constant(cls, c: complex = 1.0) -> "GasketSymbol":
        if c == 0:
            raise NonInvertibleError("the zero constant is not invertible")
        return cls((), complex(c))

    def __mul__(self, other: "GasketSymbol") -> "GasketSymbol":
        return GasketSymbol(self.factors + other.factors, self.scale * other.scale)

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        z = np.asarray(x, float) + 1j * np.asarray(y, float)
        out = np.full(z.shape, self.scale, dtype=complex)
        for sigma, power in self.factors:
            c = complex(*_center(sigma))
            d = z - c
            out *= (d / np.abs(d)) ** power
        return out


def _center(sigma: Word) -> tuple[float, float]:
    pts = [apply_word(sigma, p).to_float() for p in LACUNA_CORNERS]
    return (sum(p[0] for p in pts) / 3, sum(p[1] for p in pts) / 3)


def lacuna_loop(symbol: GasketSymbol, tau: WordLike, L: int = 6) -> SymbolLoop:
    """Restriction of a gasket symbol to the lacuna of C_tau, on the dyadic grid."""
    tau = word(tau)
    corners = [apply_word(tau, p).to_float() for p in LACUNA_CORNERS]
    m = 2**L
    u = np.arange(m) / m
    xs, ys = [], []
    for side in range(3):
        a, b = corners[side], corners[(side + 1) % 3]
        xs.append(a[0] + u * (b[0] - a[0]))
        ys.append(a[1] + u * (b[1] - a[1]))
    return SymbolLoop(symbol(np.concatenate(xs), np.concatenate(ys)))


def gasket_pairing(
    sigma: WordLike,
    params=None,
    N: int = 64,
    tau: WordLike | None = None,
    symbol: GasketSymbol | None = None,
    L: int = 6,
) -> int:
    """Pairing of the generator attached to sigma with the lacuna module of tau.

    tau defaults to sigma. params is accepted for interface symmetry; the
    pairing is a homotopy invariant and does not depend on alpha or beta.
    """
    if symbol is None:
        symbol = GasketSymbol.generator(sigma)
    target = word(sigma) if tau is None else word(tau)
    return pairing_index(lacuna_loop(symbol, target, L), N)


def pairing_vector(symbol: GasketSymbol, level: int, N: int = 64, L: int = 6) -> dict[str, int]:
    """Pairings of a gasket symbol with every lacuna module up to a word length."""
    from .gasket import word_str

    return {word_str(t): pairing_index(lacuna_loop(symbol, t, L), N) for t in words_upto(level)}


# ---------------------------------------------------------------------------
# Compactness proxy


def _commutator_singular_values(g: np.ndarray, K: int) -> np.ndarray:
    """Singular values of [S, M_g] on modes |j| <= K, g given by samples."""
    N = g.size
    c = np.fft.fft(g) / N
    j = np.arange(-K, K + 1)
    diff = j[:, None] - j[None, :]
    M = c[diff % N]
    sg = np.sign(j)
    C = (sg[:, None] - sg[None, :]) * M
    return np.linalg.svd(C, compute_uv=False)


def compactness_profile(f_boundary: tuple[float, float, float], m: int, K: int = 64, L: int = 8) -> np.ndarray:
    """Sorted singular values of the direct sum over |sigma| <= m of [S, f o w_sigma].

    For f affine, f o w_sigma on the outer lacuna equals a constant plus
    2^{-|sigma|} f, so each block is a scaled copy of the level-zero block
    (S commutes with constants).
    """
    from .energy import VertexFunction, restrict_to_lacuna

    f = VertexFunction.from_boundary(*f_boundary)
    base = restrict_to_lacuna(f, (), L, extension="affine").samples
    s0 = _commutator_singular_values(np.asarray(base, dtype=complex), K)
    parts = []
    for n in range(m + 1):
        parts.append(np.repeat(2.0**-n * s0, 3**n))
    return np.sort(np.concatenate(parts))[::-1]
