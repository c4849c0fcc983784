"""Gamma, Riemann zeta, Clausen cosine functions and the circle kernel.

All routines return an :class:`EvalResult` carrying a bound on the
absolute error, so tail bounds further downstream can be composed.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, PoleError, SingularArgumentError
from .results import EvalResult

EPS = np.finfo(float).eps

# Lanczos coefficients for g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
# Relative accuracy of the g=7 Lanczos sum on Re z >= 1/2, with margin.
_LANCZOS_REL = 2e-14

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _is_nonpositive_integer(x: complex) -> bool:
    return x.imag == 0 and x.real <= 0 and float(x.real).is_integer()


def _lanczos(z: complex) -> complex:
    z = z - 1
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _SQRT_2PI * cmath.exp((z + 0.5) * cmath.log(t) - t) * acc


def gamma_complex(z: complex) -> tuple[complex, float]:
    """Gamma on the complex plane. Returns (value, relative error bound)."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"Gamma has a pole at {z.real:g}")
    if z.real < 0.5:
        sin_piz = cmath.sin(cmath.pi * z)
        inner, rel = gamma_complex(1 - z)
        # sin(pi z) loses accuracy near the poles in proportion to |z|/|sin|.
        rel_sin = 4 * EPS * (1 + math.pi * abs(z) / max(abs(sin_piz), 1e-300))
        return cmath.pi / (sin_piz * inner), rel + rel_sin
    # exp() of a large exponent amplifies its rounding error proportionally.
    t = z + _LANCZOS_G - 0.5
    spread = abs((z - 0.5) * cmath.log(t) - t)
    return _lanczos(z), _LANCZOS_REL + 8 * EPS * (1 + abs(z.imag) + spread)


def gamma_fn(x: float) -> EvalResult:
    x = float(x)
    value, rel = gamma_complex(x)
    value = value.real
    return EvalResult(value, rel * abs(value))


@lru_cache(maxsize=None)
def _borwein_d(n: int) -> tuple[float, ...]:
    total = Fraction(0)
    out = []
    for i in range(n + 1):
        total += Fraction(
            n * math.factorial(n + i - 1) * 4**i,
            math.factorial(n - i) * math.factorial(2 * i),
        )
        out.append(float(total))
    return tuple(out)


def _borwein_terms(t: float) -> int:
    need = math.log(3 * (1 + 2 * abs(t))) + abs(t) * math.pi / 2 + 40.0
    return min(400, max(20, math.ceil(need / math.log(3 + math.sqrt(8)))))


def _one_minus_pow2(z: complex) -> complex:
    """1 - 2^z without cancellation near z = 0."""
    x, y = z.real * math.log(2.0), z.imag * math.log(2.0)
    expm1 = complex(math.expm1(x) * math.cos(y) - 2 * math.sin(y / 2) ** 2, math.exp(x) * math.sin(y))
    return -expm1


def _zeta_borwein(s: complex, reflected: bool = False) -> tuple[complex, float]:
    """Accelerated alternating (eta) series, valid for Re s >= 1/2, s != 1.

    With ``reflected`` the series is evaluated at 1 - s without forming
    1 - s, which would lose digits next to the pole.
    """
    imag = -s.imag if reflected else s.imag
    n = _borwein_terms(imag)
    d = _borwein_d(n)
    dn = d[n]
    acc = 0j
    mag = 0.0
    for k in range(n):
        power = (k + 1) ** (s - 1) if reflected else (k + 1) ** (-s)
        term = (d[k] - dn) * power
        if k % 2:
            term = -term
        acc += term
        mag += abs(term)
    one_minus = _one_minus_pow2(s if reflected else 1 - s)
    denom = dn * one_minus
    value = -acc / denom
    trunc = 3 * (1 + 2 * abs(imag)) * math.exp(abs(imag) * math.pi / 2)
    trunc /= (3 + math.sqrt(8)) ** n * abs(one_minus)
    rounding = (n + 4) * EPS * mag / abs(denom)
    return value, trunc + rounding


def zeta_complex(s: complex) -> tuple[complex, float]:
    """Riemann zeta with analytic continuation. Returns (value, abs error bound)."""
    s = complex(s)
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    if s == 0:
        return -0.5 + 0j, 0.0
    if abs(s) < 1e-8:
        # the reflection formula would meet the pole of zeta(1-s) here;
        # zeta(s) = -1/2 - s log(2 pi)/2 + c s^2 with |c| < 1.01
        return -0.5 - 0.5 * s * math.log(2 * math.pi), 2 * abs(s) ** 2 + EPS
    if s.imag == 0 and s.real < 0 and float(s.real / 2).is_integer():
        return 0j, 0.0
    if s.real >= 0.5:
        return _zeta_borwein(s)
    # Functional equation: zeta(s) = 2^s pi^(s-1) sin(pi s/2) Gamma(1-s) zeta(1-s).
    z1, e1 = _zeta_borwein(s, reflected=True)
    g, rel_g = gamma_complex(1 - s)
    factor = 2**s * cmath.pi ** (s - 1) * cmath.sin(cmath.pi * s / 2) * g
    value = factor * z1
    rel = rel_g + e1 / max(abs(z1), 1e-300) + 16 * EPS * (1 + abs(s))
    return value, rel * abs(value)


def riemann_zeta(s: float) -> EvalResult:
    value, err = zeta_complex(float(s))
    return EvalResult(value.real, err)


_BERNOULLI_2J = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510)


def hurwitz_tail(x, n0: int):
    """Sum_{k >= n0} k^(-x) for real x > 1 by Euler-Maclaurin.

    Works elementwise on arrays. Returns (value, abs error bound); the bound
    is the first omitted correction term, which dominates the remainder for
    these completely monotone summands.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 1):
        raise DomainError("hurwitz_tail needs x > 1")
    if n0 < 1:
        raise DomainError("hurwitz_tail needs n0 >= 1")
    N = float(n0)
    value = N ** (1 - x) / (x - 1) + 0.5 * N ** (-x)
    rising = x.copy()  # x (x+1) ... (x + 2j - 2)
    fact = 2.0
    last = None
    for j, b in enumerate(_BERNOULLI_2J, start=1):
        term = b / fact * rising * N ** (-x - 2 * j + 1)
        if j == len(_BERNOULLI_2J):
            last = np.abs(term)
            break
        value = value + term
        rising = rising * (x + 2 * j - 1) * (x + 2 * j)
        fact *= (2 * j + 1) * (2 * j + 2)
    return value, last + 8 * EPS * np.abs(value)


# ---------------------------------------------------------------------------
# Clausen cosine function Ci_s(theta) = Re Li_s(e^{i theta})

_MAX_TERMS = 80


@lru_cache(maxsize=512)
def _clausen_coefficients(order: float) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of the even power series part and majorants for the remainder.

    Ci_s(t) = Gamma(1-s) sin(pi s/2) |t|^(s-1) + sum_j c_j t^(2j),
    c_j = (-1)^j zeta(s-2j)/(2j)!.
    """
    coeffs = np.empty(_MAX_TERMS)
    errs = np.empty(_MAX_TERMS)
    for j in range(_MAX_TERMS):
        z, e = zeta_complex(order - 2 * j)
        f = math.factorial(2 * j)
        coeffs[j] = (-1) ** j * z.real / f
        errs[j] = e / f
    return coeffs, errs


def _majorant(order: float, j: int, theta: np.ndarray) -> np.ndarray:
    # 2 Gamma(1-s+2j) zeta(1-s+2j) / (2pi)^(1-s+2j) * theta^(2j) / (2j)!
    a = 1 - order + 2 * j
    log_mag = (
        math.log(2.0)
        + math.lgamma(a)
        + math.log(zeta_complex(a)[0].real)
        - a * math.log(2 * math.pi)
        - math.lgamma(2 * j + 1)
    )
    with np.errstate(divide="ignore"):
        return np.exp(log_mag + 2 * j * np.log(theta))


def _check_order(order: float) -> None:
    if not (-3.0 < order <= 0.0):
        raise DomainError(f"Clausen order {order} outside (-3, 0]")


def _reduce(theta: np.ndarray) -> np.ndarray:
    t = np.abs(np.asarray(theta, dtype=float))
    t = np.where(t > math.pi, np.abs(np.remainder(t + math.pi, 2 * math.pi) - math.pi), t)
    return t


def clausen_cos_array(order: float, theta) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized Ci_order(theta). Returns (values, abs error bounds)."""
    order = float(order)
    _check_order(order)
    t = _reduce(theta)
    if np.any(t == 0):
        raise SingularArgumentError("Ci of negative order is singular at theta = 0")
    if order == -2.0:
        return np.zeros_like(t), np.zeros_like(t)

    g, rel_g = gamma_complex(1 - order)
    lead_coef = g.real * math.sin(math.pi * order / 2)
    singular = lead_coef * t ** (order - 1)

    coeffs, cerrs = _clausen_coefficients(order)
    t2 = t * t
    # Horner evaluation, highest power first; fixed order keeps results bitwise stable.
    total = np.zeros_like(t)
    absum = np.zeros_like(t)
    coef_err = np.zeros_like(t)
    power = np.ones_like(t)
    terms = []
    for j in range(_MAX_TERMS):
        terms.append(coeffs[j] * power)
        absum += np.abs(terms[-1])
        coef_err += cerrs[j] * power
        power = power * t2
    for term in reversed(terms):
        total += term

    # Remainder beyond the last term: geometric majorant.
    J = _MAX_TERMS
    ratio = (
        (2 * J + 1 - order) * (2 * J + 2 - order) / ((2 * J + 1) * (2 * J + 2))
    ) * (t / (2 * math.pi)) ** 2
    tail = _majorant(order, J, t) / (1 - ratio)

    value = singular + total
    bound = (
        tail
        + coef_err
        + rel_g * np.abs(singular)
        + 4 * EPS * (np.abs(singular) + absum) * (1 + _MAX_TERMS * EPS)
    )
    return value, bound


def clausen_cos(order: float, theta: float) -> EvalResult:
    value, bound = clausen_cos_array(order, np.array([float(theta)]))
    return EvalResult(float(value[0]), float(bound[0]))


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha={alpha} outside (0, 1)")


def phi_alpha_array(alpha: float, t) -> tuple[np.ndarray, np.ndarray]:
    _check_alpha(alpha)
    v, b = clausen_cos_array(-2.0 * alpha, t)
    return -2 * math.pi * v, 2 * math.pi * b


def phi_alpha(alpha: float, t: float) -> EvalResult:
    """The circle kernel -2 pi Ci_{-2 alpha}(t); positive away from t = 0."""
    v, b = phi_alpha_array(alpha, np.array([float(t)]))
    return EvalResult(float(v[0]), float(b[0]))


def clausen_leading_constant(alpha: float) -> float:
    """Gamma(1+2a) sin(pi a): the limit of -|t|^(1+2a) Ci_{-2a}(t) at t -> 0."""
    return gamma_fn(1 + 2 * alpha).value * math.sin(math.pi * alpha)
