"""Commutator norms and lower bounds for the Connes distance on the gasket.

Distances are bounded below by explicit test functions that are affine on
every level-m cell. For such functions and beta <= 1 the supremum over all
words in ||[D, f]|| is attained on words of length <= m, so the finite
constraint family is exact up to the circle quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import cvxpy as cp
import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .circle import (
    MIN_SAMPLES,
    SampledCircleFunction,
    holder_lower_constant,
    holder_upper_constant,
    p_alpha_profile,
    p_alpha_weights,
)
from .energy import VertexFunction, extend, lacuna_restriction_matrix, lacuna_samples, n_vertices
from .errors import DomainError, SolverError
from .gasket import GasketPoint, _locate_on_skeleton, build_graph, geodesic_distance, word_str, words_upto
from .results import ResidueEstimate
from .spectral import TripleParams, _require

DEFAULT_L = 4  # 48 samples per lacuna, the quadrature minimum
SOLVER_OPTIONS = {"CLARABEL": {"tol_gap_abs": 1e-9, "tol_gap_rel": 1e-9, "tol_feas": 1e-9}}


def _check_L(L: int) -> None:
    if 3 * 2**L < MIN_SAMPLES:
        raise DomainError(f"lacuna grid level L={L} gives fewer than {MIN_SAMPLES} samples")


# ---------------------------------------------------------------------------
# Hoelder data on K


@lru_cache(maxsize=8)
def geodesic_matrix(m: int) -> np.ndarray:
    """All-pairs geodesic distances between vertices of V_m."""
    g = build_graph(m)
    n = g.n_vertices
    w = np.full(len(g.edges), 2.0**-m)
    A = sp.coo_matrix((w, (g.edges[:, 0], g.edges[:, 1])), shape=(n, n)).tocsr()
    D = dijkstra(A, directed=False)
    D.setflags(write=False)
    return D


def holder_seminorm_gasket(f: VertexFunction, eta: float) -> float:
    """max |f(x)-f(y)| / rho_geo(x,y)^eta over vertex pairs of V_m.

    A lower approximation of the Hoelder seminorm on K.
    """
    v = f.values.astype(float)
    D = geodesic_matrix(f.level)
    iu = np.triu_indices(len(v), 1)
    return float(np.max(np.abs(v[iu[0]] - v[iu[1]]) / D[iu] ** eta)) if len(v) > 1 else 0.0


def oscillation_exponent(f: VertexFunction, extra_levels: int = 2) -> float:
    """Decay exponent of the largest cell oscillation, from the last two levels."""
    g = extend(f, f.level + extra_levels)
    v = g.values.astype(float)
    osc = []
    for n in (g.level - 1, g.level):
        c = g.graph.corners[n]
        vals = v[c]
        osc.append(float(np.max(vals.max(axis=1) - vals.min(axis=1))))
    if osc[0] == 0:
        return math.inf
    if osc[1] == 0:
        return math.inf
    return -math.log2(osc[1] / osc[0])


# ---------------------------------------------------------------------------
# Commutator norm


def commutator_norm(
    f: VertexFunction,
    params: TripleParams,
    m: int | None = None,
    L: int = DEFAULT_L,
    extension: str = "affine",
) -> ResidueEstimate:
    """max over |sigma| <= m of 2^(beta |sigma|) p_alpha(f o w_sigma on the central lacuna).

    With the affine extension and beta <= 1 the words longer than m add
    nothing once m >= f.level, and the tail bound is 0. Otherwise the tail is
    bounded through the Hoelder profile of f (an estimate, see truncation).
    """
    _check_L(L)
    if m is None:
        m = f.level
    a, b = params.alpha, params.beta
    best, best_word = 0.0, ()
    per_level = [0.0] * (m + 1)
    for sigma in words_upto(m):
        samples = lacuna_samples(f.values, f.level, sigma, L, extension).astype(float)
        prof = p_alpha_profile(SampledCircleFunction(samples), a)
        val = 2 ** (b * len(sigma)) * math.sqrt(max(float(np.max(prof)), 0.0))
        per_level[len(sigma)] = max(per_level[len(sigma)], val)
        if val > best:
            best, best_word = val, sigma
    info = {"m": m, "L": L, "argmax": word_str(best_word), "level_maxima": per_level, "extension": extension}
    if extension == "affine" and m >= f.level:
        tail = 0.0 if b <= 1 else math.inf
    else:
        eta = min(oscillation_exponent(f), 1.0)
        info["eta_estimate"] = eta
        if best == 0.0 and eta == math.inf:
            tail = 0.0
        elif eta <= max(a, b):
            tail = math.inf
        else:
            # sup_{|sigma| > m} L_{sigma eta}(f) <= ||f||_{0,eta}(K) 2^{(m+1)(beta - eta)}
            H = holder_seminorm_gasket(extend(f, max(m, f.level), extension), eta)
            tail = holder_upper_constant(eta - a) * H * 2 ** ((m + 1) * (b - eta))
            info["tail_is_estimate"] = True
    return ResidueEstimate(best, tail, info)


# ---------------------------------------------------------------------------
# Distance lower bounds


def envelope_low(rho_geo: float, params: TripleParams) -> float:
    """(1/c_{beta-alpha}) rho_geo^beta; defined for beta > alpha."""
    a, b = params.alpha, params.beta
    if not b > a:
        return math.nan
    return rho_geo**b / holder_upper_constant(b - a)


def envelope_high(rho_geo: float, params: TripleParams) -> float:
    """8 2^(-alpha) hat c_alpha^(-1) (1 - 2^(-beta))^(-1) rho_geo^beta; defined for alpha >= 1/2."""
    a, b = params.alpha, params.beta
    if a < 0.5:
        return math.nan
    return 8 * 2 ** (-a) / holder_lower_constant(a) / (1 - 2 ** (-b)) * rho_geo**b


@dataclass(frozen=True)
class DistanceBound:
    lower: float
    envelope_low: float
    envelope_high: float
    level: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def within_envelopes(self) -> bool:
        lo_ok = math.isnan(self.envelope_low) or self.envelope_low <= self.lower
        hi_ok = math.isnan(self.envelope_high) or self.lower <= self.envelope_high
        return lo_ok and hi_ok


def _evaluation_vector(g, p: GasketPoint) -> np.ndarray:
    loc = _locate_on_skeleton(g, p)
    e = np.zeros(g.n_vertices)
    if loc[0] == "vertex":
        e[loc[1]] = 1.0
    else:
        _, u, v, frac = loc
        e[u] = 1.0 - float(frac)
        e[v] = float(frac)
    return e


def _difference_operator(alpha: float, N: int) -> tuple[sp.csr_matrix, int]:
    """Rows whose squared norms give the p_alpha quadrature at every sample.

    Row block i (N + 1 rows) maps samples to sqrt(weights) * (g_{i+j} - g_i).
    Returns (matrix, rows per block).
    """
    W, kappa = p_alpha_weights(alpha, N)
    rows, cols, vals = [], [], []
    r = 0
    for i in range(N):
        for j in range(1, N):
            w = math.sqrt(W[j - 1])
            rows += [r, r]
            cols += [(i + j) % N, i]
            vals += [w, -w]
            r += 1
        # the forward and backward correction terms share one row each
        c = math.sqrt(kappa / 2)
        for step in (1, -1):
            rows += [r, r]
            cols += [(i + step) % N, i]
            vals += [c, -c]
            r += 1
    return sp.csr_matrix((vals, (rows, cols)), shape=(r, N)), N + 1


class DistanceProblem:
    """The lower-bound program at level m, reused across point pairs.

    Constraints are one second-order cone per (word, lacuna sample). Most are
    inactive at the optimum, so the program is solved on an active set that
    grows by the most violated cones until all hold to ``feas_tol``.
    """

    def __init__(
        self,
        params: TripleParams,
        m: int,
        L: int = DEFAULT_L,
        solver: str = "CLARABEL",
        feas_tol: float = 1e-9,
        max_rounds: int = 40,
    ):
        _require(params.metric_ok, "metric", params)
        _check_L(L)
        self.params, self.m, self.L, self.solver = params, m, L, solver
        self.feas_tol, self.max_rounds = feas_tol, max_rounds
        a, b = params.alpha, params.beta
        N = 3 * 2**L
        self.N = N
        Dop, rows_per = _difference_operator(a, N)
        self.rows_per = rows_per
        blocks, radii = [], []
        for sigma in words_upto(m):
            R = sp.csr_matrix(lacuna_restriction_matrix(m, sigma, L, "affine"))
            blocks.append(Dop @ R)
            radii.append(np.full(N, 2.0 ** (-b * len(sigma))))
        self.B = sp.vstack(blocks).tocsr()
        self.radii = np.concatenate(radii)
        self.n_cones = len(self.radii)
        self.nv = n_vertices(m)
        self.graph = build_graph(m)
        # start from six evenly spaced samples on every lacuna
        self.initial = np.array(
            [w * N + i for w in range(self.n_cones // N) for i in range(0, N, max(1, N // 6))]
        )

    def cone_norms(self, f: np.ndarray) -> np.ndarray:
        y = self.B @ f
        return np.sqrt(np.sum(y.reshape(self.n_cones, self.rows_per) ** 2, axis=1))

    def _solve_subset(self, c: np.ndarray, active: np.ndarray):
        rows = (active[:, None] * self.rows_per + np.arange(self.rows_per)[None, :]).ravel()
        Bsub = self.B[rows]
        f = cp.Variable(self.nv)
        Y = cp.reshape(Bsub @ f, (self.rows_per, len(active)), order="F")
        prob = cp.Problem(cp.Maximize(c @ f), [cp.SOC(self.radii[active], Y, axis=0), f[0] == 0])
        attempts = [(self.solver, SOLVER_OPTIONS.get(self.solver, {})), (self.solver, {}), ("SCS", {"eps": 1e-9})]
        last_exc = None
        for name, opts in attempts:
            try:
                with warnings.catch_warnings():
                    # inaccurate solutions are still checked a posteriori
                    warnings.simplefilter("ignore", UserWarning)
                    prob.solve(solver=name, **opts)
            except cp.error.SolverError as exc:
                last_exc = exc
                continue
            if f.value is not None:
                break
        else:
            raise cp.error.SolverError(str(last_exc))
        return prob, f.value

    def solve(self, x: GasketPoint, y: GasketPoint, witness: VertexFunction | None = None) -> DistanceBound:
        """Lower bound for rho_D(x, y).

        ``witness`` is an optional feasible function from a coarser level;
        its affine extension is feasible here too and the better of the two
        certificates is kept.
        """
        params, m = self.params, self.m
        rho = geodesic_distance(x, y, m).value
        env_lo, env_hi = envelope_low(rho, params), envelope_high(rho, params)
        if x == y:
            return DistanceBound(0.0, env_lo, env_hi, m, {"status": "trivial"})
        ex, ey = _evaluation_vector(self.graph, x), _evaluation_vector(self.graph, y)
        c = ex - ey
        active = self.initial.copy()
        status, fval, rounds = "not run", None, 0
        for rounds in range(1, self.max_rounds + 1):
            try:
                prob, new = self._solve_subset(c, active)
                status = prob.status
            except cp.error.SolverError as exc:
                status = f"solver error: {exc}"
                break
            if new is None:
                break
            fval = new
            ratio = self.cone_norms(fval) / self.radii
            if ratio.max() <= 1 + self.feas_tol:
                break
            # add the worst cones of every lacuna that is violated
            viol = np.nonzero(ratio > 1 + self.feas_tol)[0]
            per_word = {}
            for k in viol[np.argsort(-ratio[viol], kind="stable")]:
                lst = per_word.setdefault(k // self.N, [])
                if len(lst) < 3:
                    lst.append(k)
            add = np.array(sorted(k for lst in per_word.values() for k in lst))
            active = np.union1d(active, add)
        if fval is None:
            raise SolverError(f"no solution for the distance program ({status})", best=0.0)
        cand = VertexFunction(m, np.asarray(fval, dtype=float))
        # A posteriori certificate through the independent p_alpha path.
        norm = commutator_norm(cand, params, m, self.L, "affine").value
        gap = float(c @ cand.values)
        if norm == 0 or gap <= 0:
            raise SolverError(f"solver returned no usable witness ({status})", best=0.0)
        lower = gap / norm
        best_f = cand
        if witness is not None and witness.level <= m:
            lifted = extend(witness.to_float(), m, "affine")
            w_norm = commutator_norm(lifted, params, m, self.L, "affine").value
            w_gap = float(c @ lifted.values)
            if w_norm > 0 and w_gap / w_norm > lower:
                lower, best_f, gap, norm = w_gap / w_norm, lifted, w_gap, w_norm
        diag = {
            "status": status,
            "solver": self.solver,
            "objective": gap,
            "certified_norm": norm,
            "rho_geo": rho,
            "active_cones": int(len(active)),
            "cones": self.n_cones,
            "rounds": rounds,
            "L": self.L,
            "witness": best_f,
        }
        if status not in ("optimal", "optimal_inaccurate") and lower <= 0:
            raise SolverError(f"solver status {status}", best=lower)
        return DistanceBound(lower, env_lo, env_hi, m, diag)


@lru_cache(maxsize=8)
def distance_problem(params: TripleParams, m: int, L: int = DEFAULT_L) -> DistanceProblem:
    """Shared problem instance; building the cone matrix dominates small solves."""
    return DistanceProblem(params, m, L)


def distance_lower_over_levels(
    x: GasketPoint, y: GasketPoint, params: TripleParams, levels, L: int = DEFAULT_L
) -> list[DistanceBound]:
    """Lower bounds at increasing levels, each seeded with the previous witness."""
    out, witness = [], None
    for m in sorted(levels):
        bound = distance_problem(params, m, L).solve(x, y, witness)
        if out and out[-1].lower > bound.lower:
            # every certificate bounds the same distance; re-certifying the
            # lifted witness on the finer graph can round a few ulps lower
            prev = out[-1]
            diag = dict(bound.diagnostics, carried_from_level=prev.level, witness=prev.diagnostics.get("witness"))
            bound = DistanceBound(prev.lower, bound.envelope_low, bound.envelope_high, m, diag)
        witness = bound.diagnostics.get("witness")
        out.append(bound)
    return out


def connes_distance_lower(
    x: GasketPoint, y: GasketPoint, params: TripleParams, m: int, L: int = DEFAULT_L, solver: str = "CLARABEL"
) -> DistanceBound:
    """Certified lower bound for rho_D(x, y) from level-m piecewise affine test functions."""
    return DistanceProblem(params, m, L, solver).solve(x, y)
