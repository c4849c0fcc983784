"""The alpha-deformed circle: fractional Dirichlet form, Clausen kernel
quadratures, the seminorm p_alpha and the trace formulas of the circle triple.

Inner products are normalized by 1/(2 pi), so e_k(t) = exp(ikt) is
orthonormal and f_k are ordinary Fourier coefficients.

Kernel quadratures use the trapezoid rule on the uniform grid with the
diagonal node left out. The missing contribution of the |t|^(-1-2a)
singularity is restored with the generalized Euler-Maclaurin corrections
2 C zeta(1 + 2a - 2j) d_j h^(2j - 2a), where C = Gamma(1+2a) sin(pi a) * 2 pi
is the leading coefficient of the kernel and d_j are the Taylor coefficients
of the even part of the integrand's smooth factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np
from scipy.special import binom

from .errors import DomainError, ResolutionError
from .results import ResidueEstimate
from .specialfn import clausen_leading_constant, hurwitz_tail, phi_alpha_array, riemann_zeta

MIN_SAMPLES = 48
DEFAULT_SAMPLES = 3 * 2**10
DEFAULT_MODES = 256


@dataclass(frozen=True, eq=False)
class FourierFunction:
    """Finitely supported Fourier series; ``coeffs[k + K_max]`` is f_k."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or len(c) % 2 == 0:
            raise ValueError("coefficient array must have odd length 2K+1")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def K_max(self) -> int:
        return (len(self.coeffs) - 1) // 2

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.K_max, self.K_max + 1)

    def mode(self, k: int) -> complex:
        if abs(k) > self.K_max:
            return 0j
        return complex(self.coeffs[k + self.K_max])

    @property
    def is_real(self) -> bool:
        return bool(np.allclose(self.coeffs, np.conj(self.coeffs[::-1]), rtol=0, atol=1e-14))

    @classmethod
    def from_modes(cls, modes: Mapping[int, complex], K_max: int | None = None) -> "FourierFunction":
        K = max([abs(k) for k in modes] + [0]) if K_max is None else K_max
        c = np.zeros(2 * K + 1, dtype=complex)
        for k, v in modes.items():
            c[k + K] += v
        return cls(c)

    @classmethod
    def basis(cls, k: int) -> "FourierFunction":
        return cls.from_modes({k: 1.0})

    @classmethod
    def from_samples(cls, f: "SampledCircleFunction") -> "FourierFunction":
        """Trigonometric interpolant of equispaced samples.

        For even N the Nyquist coefficient is split evenly between +-N/2 so
        real samples give a real series.
        """
        N = f.N
        F = np.fft.fft(f.samples) / N
        K = N // 2
        c = np.zeros(2 * K + 1, dtype=complex)
        idx = np.arange(-K, K + 1)
        c[:] = F[idx % N]
        if N % 2 == 0:
            c[0] *= 0.5
            c[-1] *= 0.5
        return cls(c)

    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.exp(1j * np.multiply.outer(t, self.modes)) @ self.coeffs

    def to_samples(self, N: int) -> "SampledCircleFunction":
        vals = self.evaluate(2 * np.pi * np.arange(N) / N)
        if self.is_real:
            vals = vals.real
        return SampledCircleFunction(vals)


@dataclass(frozen=True, eq=False)
class SampledCircleFunction:
    """Values at t_j = 2 pi j / N, j = 0..N-1."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples)
        if not np.iscomplexobj(s):
            s = s.astype(float)
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def N(self) -> int:
        return len(self.samples)

    @property
    def grid(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.N) / self.N


def _check_alpha(alpha: float, allow_one: bool = True) -> None:
    if not (0 < alpha < 1 or (allow_one and alpha == 1)):
        raise DomainError(f"alpha={alpha} outside the admissible range")


def _fsum_real(x) -> float:
    return math.fsum(np.asarray(x, dtype=float).ravel())


def spectral_energy(f: FourierFunction, alpha: float) -> float:
    _check_alpha(alpha)
    k = np.abs(f.modes).astype(float)
    order = np.argsort(k, kind="stable")
    terms = (k ** (2 * alpha) * np.abs(f.coeffs) ** 2)[order]
    return _fsum_real(terms)


# ---------------------------------------------------------------------------
# Kernel quadrature


@lru_cache(maxsize=64)
def _kernel_weights(alpha: float, N: int) -> np.ndarray:
    """phi_alpha(2 pi j / N) for j = 1..N-1 (read-only)."""
    t = 2 * np.pi * np.arange(1, N) / N
    w, _ = phi_alpha_array(alpha, t)
    w.setflags(write=False)
    return w


def _correction_factors(alpha: float, h: float, terms: int) -> np.ndarray:
    """-2 C zeta(1 + 2a - 2j) h^(2j - 2a), j = 1..terms."""
    C = 2 * math.pi * clausen_leading_constant(alpha)
    return np.array(
        [-2 * C * riemann_zeta(1 + 2 * alpha - 2 * j).value * h ** (2 * j - 2 * alpha) for j in range(1, terms + 1)]
    )


def _even_taylor_fit(G: np.ndarray, h: float, terms: int) -> np.ndarray:
    """Taylor coefficients d_1..d_terms of an even function with G(0)=0 from G(jh), j=1..terms."""
    t2 = (h * np.arange(1, terms + 1)) ** 2
    V = np.vander(t2, terms + 1, increasing=True)[:, 1:]
    return np.linalg.solve(V, G[:terms])


def kernel_integral(alpha: float, G: np.ndarray, terms: int = 3) -> tuple[float, float]:
    """(1/2pi) * integral of phi_alpha(t) G(t) over the circle.

    ``G`` holds an even function sampled at t_j = 2 pi j/N, j = 0..N-1, with
    G(0) = 0. Returns (value, error estimate), the estimate being the size of
    the last correction term.
    """
    N = len(G)
    h = 2 * math.pi / N
    w = _kernel_weights(alpha, N)
    trap = h * _fsum_real(w * G[1:])
    d = _even_taylor_fit(0.5 * (G[1:] + G[:0:-1]), h, terms)
    corr = _correction_factors(alpha, h, terms) * d
    value = (trap + _fsum_real(corr)) / (2 * math.pi)
    err = 2 * abs(corr[-1]) / (2 * math.pi)
    return value, err


def increment_energy(samples: np.ndarray) -> np.ndarray:
    """D_j = (1/N) sum_i |f(x_i + t_j) - f(x_i)|^2 for every shift j."""
    s = np.asarray(samples)
    N = len(s)
    D = np.empty(N)
    for j in range(N):
        diff = np.roll(s, -j) - s
        D[j] = _fsum_real(np.abs(diff) ** 2) / N
    return D


def kernel_energy(f: SampledCircleFunction, alpha: float, tol: float | None = None) -> ResidueEstimate:
    """E_alpha[f] from the double integral with the Clausen kernel.

    E = -(1/4pi^2) int int Ci_{-2a}(x-y)|f(x)-f(y)|^2 dx dy, i.e. one factor
    2 pi below the same integral written with phi_alpha; this is the
    normalization under which E[e_k] = |k|^(2a).
    """
    if alpha == 1:
        raise DomainError("the Clausen kernel vanishes at alpha = 1; use spectral_energy")
    _check_alpha(alpha, allow_one=False)
    if f.N < MIN_SAMPLES:
        raise ResolutionError(f"need at least {MIN_SAMPLES} samples, got {f.N}")
    D = increment_energy(f.samples)
    if not np.any(D):
        return ResidueEstimate(0.0, 0.0, {"N": f.N})
    value, err = kernel_integral(alpha, D)
    value, err = value / (2 * math.pi), err / (2 * math.pi)
    if tol is not None and err > tol * max(abs(value), 1e-300):
        raise ResolutionError(f"estimated quadrature error {err:.3g} exceeds tolerance at N={f.N}")
    return ResidueEstimate(value, err, {"N": f.N, "correction_terms": 3})


@lru_cache(maxsize=64)
def p_alpha_weights(alpha: float, N: int) -> tuple[np.ndarray, float]:
    """Quadrature weights behind :func:`p_alpha`.

    The value of (1/2pi) int phi(x_i - y)|f(x_i) - f(y)|^2 dy is approximated by
    sum_j W_j |f_{i+j} - f_i|^2 + kappa * (|f_{i+1} - f_i|^2 + |f_{i-1} - f_i|^2) / 2,
    all weights positive. Returns (W for j = 1..N-1, kappa).
    """
    h = 2 * math.pi / N
    W = h * _kernel_weights(alpha, N) / (2 * math.pi)
    kappa = _correction_factors(alpha, h, 1)[0] / h**2 / (2 * math.pi)
    W.setflags(write=False)
    return W, float(kappa)


def p_alpha_profile(f: SampledCircleFunction, alpha: float) -> np.ndarray:
    """Quadrature of (1/2pi) int phi(x - y)|f(x) - f(y)|^2 dy at every sample x."""
    _check_alpha(alpha, allow_one=False)
    N = f.N
    if N < MIN_SAMPLES:
        raise ResolutionError(f"p_alpha needs at least {MIN_SAMPLES} samples, got {N}")
    s = f.samples
    W, kappa = p_alpha_weights(alpha, N)
    out = np.zeros(N)
    for j in range(1, N):
        out += W[j - 1] * np.abs(np.roll(s, -j) - s) ** 2
    fwd = np.abs(np.roll(s, -1) - s) ** 2
    bwd = np.abs(np.roll(s, 1) - s) ** 2
    out += kappa * 0.5 * (fwd + bwd)
    return out


def p_alpha(f: SampledCircleFunction, alpha: float) -> float:
    return math.sqrt(max(float(np.max(p_alpha_profile(f, alpha))), 0.0))


def holder_seminorm(f: SampledCircleFunction, eta: float) -> float:
    """max |f(x)-f(y)| / d(x,y)^eta over sample pairs, d the arc distance."""
    s = f.samples
    N = f.N
    best = 0.0
    for j in range(1, N // 2 + 1):
        d = 2 * math.pi * j / N
        diff = np.max(np.abs(np.roll(s, -j) - s))
        best = max(best, diff / d**eta)
    return best


def holder_upper_constant(eps: float) -> float:
    """c_eps with p_alpha(f) <= c_eps ||f||_{0, alpha+eps}."""
    return eps**-0.5 * (math.pi / 4) ** eps * math.sqrt(4 + 23 * (4 ** (2 * eps) - 1))


def holder_lower_constant(alpha: float) -> float:
    """hat c_alpha with hat c_alpha ||f||_{0, alpha} <= p_alpha(f), alpha >= 1/2."""
    return math.sqrt(3 * math.sin(math.pi * alpha)) / (16 * math.sqrt(2))


# ---------------------------------------------------------------------------
# Channel norms and traces


def channel_norm(f: FourierFunction, alpha: float, k: int) -> float:
    """||S_f^* d_alpha e_k||^2 = 1/4 sum_p (|k|^2a + |p|^2a - |p-k|^2a)^2 |f_p|^2."""
    if k == 0:
        raise DomainError("channel_norm needs k != 0")
    return float(channel_norms(f, alpha, np.array([k]))[0])


def channel_norms(f: FourierFunction, alpha: float, ks) -> np.ndarray:
    ks = np.asarray(ks)
    p = f.modes.astype(float)
    w = np.abs(f.coeffs) ** 2
    a = 2 * alpha
    out = np.empty(len(ks))
    block = max(1, 2_000_000 // max(len(p), 1))
    for start in range(0, len(ks), block):
        kk = ks[start : start + block].astype(float)
        A = np.abs(kk)[:, None] ** a + np.abs(p)[None, :] ** a - np.abs(p[None, :] - kk[:, None]) ** a
        out[start : start + block] = 0.25 * (A * A) @ w
    return out


def _asymptotic_channel_tail(weights: np.ndarray, p: np.ndarray, alpha: float, s: float, K: int, J: int):
    """Sum over k > K of k^(-(s+2)a) * 1/4 sum_p (k^2a + |p|^2a - |k-p|^2a)^2 w_p.

    Uses the binomial expansion of |k - p|^(2a) for k > K >= 4 max|p|, summed
    termwise with Euler-Maclaurin Hurwitz tails.
    """
    a = 2 * alpha
    nz = p != 0
    p = p[nz]
    w = 0.25 * weights[nz]
    P = float(np.max(np.abs(p))) if len(p) else 0.0
    if P == 0:
        return 0.0, 0.0
    # A = a0 + sum_j aj k^(a - j)
    a0 = np.abs(p) ** a
    aj = np.array([-binom(a, j) * (-p) ** j for j in range(1, J + 1)])  # (J, n_p)
    terms: list[tuple[float, float]] = []  # (exponent gamma of k, coefficient)
    terms.append((0.0, float(np.sum(w * a0 * a0))))
    for j in range(1, J + 1):
        terms.append((a - j, float(2 * np.sum(w * a0 * aj[j - 1]))))
    for n in range(2, 2 * J + 1):
        c = 0.0
        for j in range(max(1, n - J), min(J, n - 1) + 1):
            c += float(np.sum(w * aj[j - 1] * aj[n - j - 1]))
        terms.append((2 * a - n, c))
    gam = np.array([t[0] for t in terms])
    coef = np.array([t[1] for t in terms])
    x = (s + 2) * alpha - gam
    H, Herr = hurwitz_tail(x, K + 1)
    value = math.fsum(coef * H)
    err = math.fsum(np.abs(coef) * Herr)
    # binomial remainder beyond order J, |binom(a, j)| <= 1 for j >= 1
    ratio = P / (K + 1)
    rem_coef = P ** (J + 1) / (1 - ratio)
    W0 = float(np.sum(w))
    x_rem = (s + 2) * alpha - 2 * a + J + 1
    Hr, _ = hurwitz_tail(np.array([x_rem]), K + 1)
    err += W0 * (6 * rem_coef + rem_coef**2 * (K + 1) ** (a - J - 1)) * float(Hr[0])
    return value, err


@dataclass(frozen=True)
class CircleTrace:
    first: float
    second: float
    tail_bound: float
    modes: int


def default_channel_cutoff(f: FourierFunction) -> int:
    support = np.nonzero(np.abs(f.coeffs) > 0)[0]
    P = int(np.max(np.abs(f.modes[support]))) if len(support) else 0
    return max(DEFAULT_MODES, 16 * P)


def channel_series(f: FourierFunction, alpha: float, s: float, K: int | None = None, J: int = 10):
    """Sum over k != 0 of |k|^(-(s+2)a) channel_norm(f, a, k). Returns (value, err, K)."""
    if K is None:
        K = default_channel_cutoff(f)
    support = np.nonzero(np.abs(f.coeffs) > 0)[0]
    P = int(np.max(np.abs(f.modes[support]))) if len(support) else 0
    if P == 0:
        return 0.0, 0.0, K
    ks = np.concatenate([np.arange(1, K + 1), -np.arange(1, K + 1)])
    cn = channel_norms(f, alpha, ks)
    head = math.fsum(np.abs(ks).astype(float) ** (-(s + 2) * alpha) * cn)
    p = f.modes.astype(float)
    w = np.abs(f.coeffs) ** 2
    if K >= 4 * P:
        tp, ep = _asymptotic_channel_tail(w, p, alpha, s, K, J)
        tm, em = _asymptotic_channel_tail(w[::-1], p, alpha, s, K, J)
        return head + tp + tm, ep + em, K
    # crude bound from channel_norm <= |k|^2a E_alpha[f]
    E = spectral_energy(f, alpha)
    Ht, He = hurwitz_tail(np.array([s * alpha]), K + 1)
    return head, float(2 * E * (Ht[0] + He[0])), K


def circle_energy_trace(f: FourierFunction, alpha: float, s: float, K: int | None = None) -> CircleTrace:
    """The two traces of the circle commutator at exponent s.

    second = 2 zeta(a s) E_a[f] in closed form; first is the channel series
    and never exceeds second.
    """
    if s * alpha <= 1:
        raise DomainError(f"trace diverges for s*alpha = {s * alpha:.6g} <= 1")
    E = spectral_energy(f, alpha)
    second = 2 * riemann_zeta(alpha * s).value * E
    first, err, K = channel_series(f, alpha, s, K)
    if first > second * (1 + 1e-12) + err:
        raise AssertionError("channel trace exceeds the closed-form trace")
    return CircleTrace(first, second, err, K)


def dirac_spectrum_circle(alpha: float, beta: float, word_length: int, K: int) -> np.ndarray:
    """Eigenvalues of |D_sigma| up to mode K, each repeated four times."""
    if K < 1:
        raise ValueError("K >= 1 required")
    k = np.arange(1, K + 1, dtype=float)
    vals = 2.0 ** (beta * word_length) * 2 * np.pi * k**alpha
    return np.repeat(vals, 4)


def derivation_coefficient(alpha: float, p: int, n: int, N: int = DEFAULT_SAMPLES) -> float:
    """Coefficient of e_{n+p} in d_a^*((d_a e_p) e_n), by kernel quadrature.

    With k = n + p this is (1/4pi^2) int phi(t) Re[(e^{-ikt} - 1)(e^{ipt} - 1)] dt,
    using the normalization in which d_a^* d_a has eigenvalues |k|^(2a).
    """
    k = n + p
    t = 2 * np.pi * np.arange(N) / N
    G = np.cos((p - k) * t) - np.cos(k * t) - np.cos(p * t) + 1
    value, _ = kernel_integral(alpha, G)
    return value / (2 * math.pi)
