"""Acceptance checks, one function per criterion.

Each check returns a CriterionResult whose ``line`` is deterministic: no
timings are printed, only whether a time budget was met.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import circle, energy, khomology, metric, spectral, specialfn
from .gasket import build_graph, iter_vertex_pairs, word_str, words_upto

DEFAULT_PARAMS = spectral.TripleParams(0.85, 1.0)


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: dict[str, bool] = field(default_factory=dict)
    values: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def line(self) -> str:
        failed = [k for k, ok in self.checks.items() if not ok]
        vals = " ".join(f"{k}={_fmt(v)}" for k, v in self.values.items())
        tail = f" failed=[{','.join(failed)}]" if failed else ""
        return f"{'PASS' if self.passed else 'FAIL'} {self.number:2d} {self.title}: {vals}{tail}"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.6g}"


def zeta_closed_form() -> CriterionResult:
    r = CriterionResult(1, "zeta closed form vs brute force")
    t0 = time.perf_counter()
    direct = spectral.zeta_D_direct(3.0, DEFAULT_PARAMS, m=12, K=10**5)
    closed = spectral.zeta_D(3.0, DEFAULT_PARAMS).real
    elapsed = time.perf_counter() - t0
    diff = abs(closed - direct.value)
    r.values.update(closed=closed, direct=direct.value, tail_bound=direct.tail_bound, rel_err=diff / closed)
    r.checks["within_tail_bound"] = diff <= direct.tail_bound
    r.checks["rel_err_below_1e-6"] = diff / closed < 1e-6
    r.checks["runtime_below_10s"] = elapsed < 10
    return r


def dimensions() -> CriterionResult:
    r = CriterionResult(2, "dimensions")
    rep = spectral.dimension_report(DEFAULT_PARAMS)
    r.values.update(d=rep.d, delta=rep.delta, d_D=rep.d_D)
    r.checks["d"] = abs(rep.d - 1.5849625) <= 1e-6
    r.checks["delta"] = abs(rep.delta - 1.2630344) <= 1e-6
    return r


def clausen() -> CriterionResult:
    r = CriterionResult(3, "Clausen function")
    theta = np.linspace(-math.pi, math.pi, 1002)[1:-1]
    theta = theta[theta != 0]
    vals, _ = specialfn.clausen_cos_array(-1.0, theta)
    err = float(np.max(np.abs(vals + 1 / (4 * np.sin(theta / 2) ** 2))))
    r.values["ci_minus1_err"] = err
    r.checks["ci_minus1"] = err <= 1e-10
    worst = 0.0
    for a in (0.55, 0.75, 0.87):
        t = 1e-4
        v = specialfn.clausen_cos(-2 * a, t).value * t ** (1 + 2 * a)
        lead = -specialfn.gamma_fn(1 + 2 * a).value * math.sin(math.pi * a)
        worst = max(worst, abs(v / lead - 1))
    r.values["leading_rel_err"] = worst
    r.checks["leading_term"] = worst < 0.01
    near = np.linspace(1e-4, math.pi / 4, 2000)
    far = np.linspace(math.pi / 4, math.pi, 2000)
    band1 = band2 = far_ok = True
    far_max = 0.0
    for a in np.linspace(0.5, 0.99, 50):
        g = specialfn.gamma_fn(1 + 2 * a).value * math.sin(math.pi * a)
        ci, _ = specialfn.clausen_cos_array(-2 * a, near)
        band1 &= bool(np.all(np.abs(ci + g * near ** (-(2 * a + 1))) <= 31 / (2 * math.pi**2) * g))
        scaled = -ci * near ** (2 * a + 1)
        band2 &= bool(np.all((scaled >= g / 32) & (scaled <= 63 * g / 32)))
    for a in np.linspace(0.01, 0.99, 99):
        ci, _ = specialfn.clausen_cos_array(-2 * a, far)
        m = float(np.max(np.abs(ci) * far ** (2 * a + 1)))
        far_max = max(far_max, m)
    far_ok = far_max <= 23
    r.values["far_field_max"] = far_max
    r.checks["near_band_difference"] = band1
    r.checks["near_band_ratio"] = band2
    r.checks["far_field"] = far_ok
    return r


def pairing_identity() -> CriterionResult:
    r = CriterionResult(4, "cosine pairing identity")
    N = 4096
    t = 2 * np.pi * np.arange(N) / N
    G = np.cos(t) - np.cos(2 * t)
    worst = 0.0
    for a in (0.6, 0.75, 0.9):
        # kernel_integral gives (1/2pi) int phi G = -int Ci G
        val = -circle.kernel_integral(a, G)[0]
        worst = max(worst, abs(val - math.pi * (1 - 2 ** (2 * a))))
    r.values["max_abs_err"] = worst
    r.checks["identity"] = worst <= 1e-4
    return r


def sobolev_equivalence(seed: int = 5) -> CriterionResult:
    r = CriterionResult(5, "kernel vs spectral energy")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for a in (0.6, 0.75, 0.85):
        for deg in range(1, 9):
            modes = {}
            for k in range(1, deg + 1):
                c = complex(*rng.standard_normal(2))
                modes[k], modes[-k] = c, c.conjugate()
            f = circle.FourierFunction.from_modes(modes)
            ker = circle.kernel_energy(f.to_samples(1024), a).value
            spectral_value = circle.spectral_energy(f, a)
            worst = max(worst, abs(ker / spectral_value - 1))
    r.values["max_rel_err"] = worst
    r.checks["agree_1e-3"] = worst < 1e-3
    return r


def kigami_energy(seed: int = 6) -> CriterionResult:
    r = CriterionResult(6, "Kigami energy")
    one = Fraction(1)
    f = energy.VertexFunction.from_boundary(one, 0 * one, 0 * one)
    h1 = energy.harmonic_extend(f, 1)
    r.checks["midpoints"] = list(h1.values[3:]) == [Fraction(2, 5), Fraction(2, 5), Fraction(1, 5)]
    seq = energy.graph_energy_sequence(energy.harmonic_extend(f.to_float(), 6))
    dev = max(abs(float(e) - 2) for e in seq)
    r.values["energy_dev"] = dev
    r.checks["energy_invariant"] = dev <= 1e-12 and len(seq) == 7
    rng = np.random.default_rng(seed)
    exact_ok = True
    for _ in range(5):
        level = int(rng.integers(1, 4))
        vals = [Fraction(int(v), int(d)) for v, d in zip(rng.integers(-9, 10, energy.n_vertices(level)),
                                                         rng.integers(1, 7, energy.n_vertices(level)))]
        g = energy.VertexFunction(level, vals)
        parts = sum((energy.graph_energy(energy.compose_with_word(g, (i,))) for i in range(3)), Fraction(0))
        exact_ok &= energy.graph_energy(g) == energy.ENERGY_RENORMALIZATION * parts
    r.checks["self_similarity_exact"] = exact_ok
    worst = 0.0
    for k in range(3):
        for _ in range(3):
            g = energy.VertexFunction(k, rng.standard_normal(energy.n_vertices(k)))
            for n, v in energy.decay_profile(g, k + 5):
                if n >= k:
                    worst = max(worst, v / 0.6 ** (n - k))
    r.values["decay_ratio_max"] = worst
    r.checks["decay_bounded"] = worst <= 1 + 1e-12
    return r


def volume_residue() -> CriterionResult:
    r = CriterionResult(7, "volume residue")
    t0 = time.perf_counter()
    p = DEFAULT_PARAMS
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = {tau: spectral.volume_residue_check(tau, p, m=14, K=10**4).value for tau in words_upto(2)}
    elapsed = time.perf_counter() - t0
    base = res[()]
    ratio_err = max(abs(res[t] / base * 3 ** len(t) - 1) for t in res)
    vol_err = max(abs(res[t] / spectral.cell_volume(t, p) - 1) for t in res)
    r.values.update(residue_root=base, ratio_rel_err=ratio_err, volume_rel_err=vol_err)
    r.checks["ratios_1pct"] = ratio_err < 0.01
    r.checks["cell_volume_1pct"] = vol_err < 0.01
    r.checks["runtime_below_60s"] = elapsed < 60
    return r


ONE_HARMONIC = (1.0, 0.0, 0.0, 0.3, -0.2, 0.7)


def energy_residue() -> CriterionResult:
    r = CriterionResult(8, "energy residue")
    p = DEFAULT_PARAMS
    consts = spectral.harmonic_constants(p)
    ratios = []
    worst = 0.0
    for f in (energy.VertexFunction.from_boundary(1.0, 0.0, 0.0), energy.VertexFunction(1, list(ONE_HARMONIC))):
        E = float(energy.graph_energy(f))
        res = spectral.energy_residue(f, p).value
        closed = spectral.closed_form_residue(p, consts, E)
        worst = max(worst, abs(res / closed - 1))
        ratios.append(res / E)
    spread = abs(ratios[0] / ratios[1] - 1)
    r.values.update(K2=consts.K2, C_delta=consts.C_of(p.delta), residue_over_E_0=ratios[0],
                    residue_over_E_1=ratios[1], closed_form_rel_err=worst, spread=spread)
    r.checks["closed_form_2pct"] = worst < 0.02
    r.checks["harmonic_agreement_1pct"] = spread < 0.01
    return r


def scalar_inequalities(seed: int = 9) -> CriterionResult:
    r = CriterionResult(9, "scalar inequality suite")
    rng = np.random.default_rng(seed)
    n = 10**6
    k = rng.integers(-10**4, 10**4 + 1, n).astype(float)
    q = rng.integers(-10**4, 10**4 + 1, n).astype(float)
    a2 = 2 * rng.uniform(0, 1, n)
    lhs = (np.abs(q) ** a2 + np.abs(k) ** a2 - np.abs(k - q) ** a2) ** 2
    rhs = 4 * np.abs(k) ** a2 * np.abs(q) ** a2
    # rounding slack: both sides are computed in floating point
    excess = float(np.max((lhs - rhs) / np.maximum(rhs, 1.0)))
    r.values["max_rel_excess"] = excess
    r.checks["technical_inequality"] = excess <= 1e-12
    consts = spectral.harmonic_constants(DEFAULT_PARAMS, k_max=64)
    ks = np.arange(1, 65)
    bound = consts.C_k / ks ** (2 * DEFAULT_PARAMS.alpha)
    r.values.update(C_k_min=float(consts.C_k.min()), C_k_ratio_max=float(bound.max()))
    r.checks["C_k_range"] = bool(np.all(consts.C_k > 0) and np.all(bound <= 1))
    worst = -math.inf
    for _ in range(200):
        size = int(rng.integers(2, 21))
        pts = rng.choice(np.arange(-50, 51), size, replace=False).astype(float)
        c = rng.standard_normal(size)
        c -= c.mean()
        a = rng.uniform(0.05, 1.0)
        M = np.abs(pts[:, None] - pts[None, :]) ** (2 * a)
        worst = max(worst, float(c @ M @ c) / float(c @ c))
    r.values["cnd_max_quadratic"] = worst
    r.checks["conditionally_negative_definite"] = worst <= 1e-9
    return r


def _metric_pairs(args):
    lo, hi = args
    p = DEFAULT_PARAMS
    g = build_graph(3)
    prob = metric.distance_problem(p, 3)
    pairs = list(iter_vertex_pairs(3))[lo:hi]
    out = []
    for i, j in pairs:
        b = prob.solve(g.point(i), g.point(j))
        out.append((b.within_envelopes, b.lower / b.diagnostics["rho_geo"] ** p.beta))
    return out


def metric_bounds(workers: int = 1) -> CriterionResult:
    r = CriterionResult(10, "metric envelopes")
    p = DEFAULT_PARAMS
    npairs = len(list(iter_vertex_pairs(3)))
    chunks = [(i, min(i + 100, npairs)) for i in range(0, npairs, 100)]
    results = [x for part in _map(_metric_pairs, chunks, workers) for x in part]
    inside = sum(ok for ok, _ in results)
    scaled = [v for _, v in results]
    r.values.update(pairs=npairs, inside=inside, min_lower_over_rho=min(scaled), max_lower_over_rho=max(scaled),
                    env_low_const=metric.envelope_low(1.0, p), env_high_const=metric.envelope_high(1.0, p))
    r.checks["envelopes"] = inside == npairs
    g = build_graph(2)
    mono = True
    for i, j in [(0, 1), (0, 5), (2, 9), (4, 11), (7, 13)]:
        seq = metric.distance_lower_over_levels(g.point(i), g.point(j), p, (2, 3, 4))
        lows = [b.lower for b in seq]
        mono &= all(x <= y for x, y in zip(lows, lows[1:]))
    r.checks["monotone_in_m"] = mono
    rng = np.random.default_rng(10)
    zero_ok = True
    for t in range(50):
        level = t % 3
        nv = energy.n_vertices(level)
        vals = np.full(nv, rng.standard_normal()) if t % 10 == 0 else rng.standard_normal(nv)
        f = energy.VertexFunction(level, vals)
        norm = metric.commutator_norm(f, p).value
        is_const = bool(np.all(vals == vals[0]))
        zero_ok &= (norm == 0) == is_const
    r.checks["commutator_zero_iff_constant"] = zero_ok
    return r


def khomology_checks() -> CriterionResult:
    r = CriterionResult(11, "K-homology pairings")
    ok = True
    for k in range(-5, 6):
        u = khomology.SymbolLoop.monomial(k)
        ok &= khomology.pairing_index(u, 64) == k == khomology.winding_number(u)
    r.checks["circle_pairing"] = ok
    rel = [khomology.module_relations_check(a, 8) for a in (0.5, 0.85)]
    r.checks["module_relations"] = all(x.ok for x in rel)
    lacunas = [word_str(t) for t in words_upto(2)]
    indicator = True
    for sigma in words_upto(2):
        vec = khomology.pairing_vector(khomology.GasketSymbol.generator(sigma), 2)
        indicator &= vec == {t: int(t == word_str(sigma)) for t in lacunas}
    r.checks["gasket_indicator"] = indicator
    sums = True
    for k in range(-5, 6):
        sums &= sum(khomology.sector_indices(khomology.SymbolLoop.monomial(k)).values()) == 0
    r.checks["sector_sum_zero"] = sums
    r.values["generators"] = len(lacunas)
    return r


CRITERIA: tuple[Callable[..., CriterionResult], ...] = (
    zeta_closed_form,
    dimensions,
    clausen,
    pairing_identity,
    sobolev_equivalence,
    kigami_energy,
    volume_residue,
    energy_residue,
    scalar_inequalities,
    metric_bounds,
    khomology_checks,
)


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _run_one(index: int) -> str:
    return CRITERIA[index]().line


def run_all(workers: int = 1) -> list[str]:
    """Lines for criteria 1..11 in fixed order; criterion 12 compares two runs."""
    return _map(_run_one, range(len(CRITERIA)), workers)
