"""Kigami's Dirichlet form on the gasket: graph energies, harmonic extension,
cell energies and restriction of vertex data to lacunas.

Vertex data live on :func:`sgtriple.gasket.build_graph` levels. Values may be
floats or :class:`fractions.Fraction` (object arrays); with fractions every
energy below is computed exactly.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .circle import FourierFunction, SampledCircleFunction, spectral_energy
from .errors import DomainError, ResourceError, WordTooDeepError, ZeroEnergyError
from .gasket import (
    LACUNA_SIDES,
    MAX_LEVEL,
    P,
    WordLike,
    build_graph,
    word,
    word_index,
)

ENERGY_RENORMALIZATION = Fraction(5, 3)
EXTENSIONS = ("harmonic", "affine")


def n_vertices(level: int) -> int:
    return (3 ** (level + 1) + 3) // 2


def _as_values(values) -> np.ndarray:
    if isinstance(values, np.ndarray) and values.dtype != object:
        arr = values.astype(float)
    else:
        seq = list(values)
        if any(isinstance(v, (Fraction, int)) and not isinstance(v, bool) for v in seq) and all(
            isinstance(v, (Fraction, int)) for v in seq
        ):
            arr = np.empty(len(seq), dtype=object)
            arr[:] = [Fraction(v) for v in seq]
        else:
            arr = np.asarray(seq, dtype=float)
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class VertexFunction:
    """Real values on the vertices of the level-m graph, in graph vertex order."""

    level: int
    values: np.ndarray

    def __post_init__(self):
        if self.level < 0:
            raise DomainError("level must be nonnegative")
        arr = _as_values(self.values)
        if len(arr) != n_vertices(self.level):
            raise DomainError(
                f"level {self.level} has {n_vertices(self.level)} vertices, got {len(arr)} values"
            )
        object.__setattr__(self, "values", arr)

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    @property
    def graph(self):
        return build_graph(self.level)

    @classmethod
    def from_boundary(cls, a, b, c) -> "VertexFunction":
        return cls(0, [a, b, c])

    @classmethod
    def from_callable(cls, level: int, fn: Callable[[float, float], float]) -> "VertexFunction":
        """Sample a function of plane coordinates at the vertices of V_level."""
        xy = build_graph(level).float_coordinates()
        return cls(level, np.array([fn(x, y) for x, y in xy], dtype=float))

    def restrict(self, level: int) -> "VertexFunction":
        """f restricted to V_level (a prefix of the vertex list)."""
        if level > self.level:
            raise DomainError(f"cannot restrict level {self.level} data to level {level}")
        return VertexFunction(level, self.values[: n_vertices(level)])

    def to_float(self) -> "VertexFunction":
        return VertexFunction(self.level, np.array([float(v) for v in self.values]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex", "value"])
        for i, v in enumerate(self.values):
            w.writerow([i, str(v) if self.exact else repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, level: int | None = None) -> "VertexFunction":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if rows and rows[0][0].strip().lower() == "vertex":
            rows = rows[1:]
        pairs = sorted((int(r[0]), r[1].strip()) for r in rows)
        if [i for i, _ in pairs] != list(range(len(pairs))):
            raise DomainError("vertex ids must be 0..n-1 without gaps")
        raw = [v for _, v in pairs]
        if all("/" in v or v.lstrip("-").isdigit() for v in raw):
            vals = [Fraction(v) for v in raw]
        else:
            vals = [float(v) for v in raw]
        if level is None:
            level = 0
            while n_vertices(level) < len(vals):
                level += 1
        return cls(level, vals)


def _scale(level: int, exact: bool):
    return ENERGY_RENORMALIZATION**level if exact else (5.0 / 3.0) ** level


def _sum(terms, exact: bool):
    if exact:
        return sum(terms, Fraction(0))
    return math.fsum(terms)


def _edge_squares(f: VertexFunction) -> np.ndarray:
    e = f.graph.edges
    d = f.values[e[:, 0]] - f.values[e[:, 1]]
    return d * d


def graph_energy(f: VertexFunction):
    """(5/3)^m times the sum of squared differences over E_m."""
    return _scale(f.level, f.exact) * _sum(_edge_squares(f), f.exact)


def graph_energy_sequence(f: VertexFunction) -> list:
    """Graph energies of the restrictions of f to V_0, ..., V_m."""
    return [graph_energy(f.restrict(l)) for l in range(f.level + 1)]


@dataclass(frozen=True)
class EnergyReport:
    value: float
    level: int
    monotone: bool
    harmonic_beyond: int | None


def energy_report(f: VertexFunction) -> EnergyReport:
    """Energy at the deepest level, with the monotonicity flag of the level sequence.

    ``harmonic_beyond`` is the smallest level l such that f is the harmonic
    extension of its restriction to V_l (None if no check was possible).
    """
    seq = graph_energy_sequence(f)
    monotone = all(b >= a - (0 if f.exact else 1e-12 * abs(b)) for a, b in zip(seq, seq[1:]))
    harmonic_beyond = None
    for l in range(f.level + 1):
        ext = harmonic_extend(f.restrict(l), f.level)
        if f.exact:
            same = all(a == b for a, b in zip(ext.values, f.values))
        else:
            scale = max(1.0, float(np.max(np.abs(f.values.astype(float)))))
            same = bool(np.all(np.abs(ext.values.astype(float) - f.values.astype(float)) <= 1e-12 * scale))
        if same:
            harmonic_beyond = l
            break
    return EnergyReport(float(seq[-1]), f.level, monotone, harmonic_beyond)


# ---------------------------------------------------------------------------
# Extension


def _midpoints(a0, a1, a2, rule: str):
    if rule == "harmonic":
        # Minimizer of the three-unknown local problem on a cell.
        return (
            (2 * a0 + 2 * a1 + a2) / 5,
            (2 * a0 + 2 * a2 + a1) / 5,
            (2 * a1 + 2 * a2 + a0) / 5,
        )
    if rule == "affine":
        return (a0 + a1) / 2, (a0 + a2) / 2, (a1 + a2) / 2
    raise DomainError(f"unknown extension rule {rule!r}; expected one of {EXTENSIONS}")


def extend(f: VertexFunction, target_level: int, rule: str = "harmonic", max_level: int = MAX_LEVEL) -> VertexFunction:
    """Extend vertex data to V_target cell by cell.

    The harmonic rule gives the energy minimizer; the affine rule gives the
    function that is affine on every level-m cell.
    """
    if target_level < f.level:
        raise DomainError(f"target level {target_level} below data level {f.level}")
    g = build_graph(target_level, max_level)
    vals = f.values
    for l in range(f.level, target_level):
        c = g.corners[l]
        m01, m02, m12 = _midpoints(vals[c[:, 0]], vals[c[:, 1]], vals[c[:, 2]], rule)
        new = np.empty(3 * len(c), dtype=vals.dtype)
        new[0::3], new[1::3], new[2::3] = m01, m02, m12
        vals = np.concatenate([vals, new])
    return VertexFunction(target_level, vals)


def harmonic_extend(f: VertexFunction, target_level: int, max_level: int = MAX_LEVEL) -> VertexFunction:
    return extend(f, target_level, "harmonic", max_level)


def affine_extend(f: VertexFunction, target_level: int, max_level: int = MAX_LEVEL) -> VertexFunction:
    return extend(f, target_level, "affine", max_level)


# ---------------------------------------------------------------------------
# Cells


def _cell_edge_slice(level: int, sigma) -> slice:
    n = len(sigma)
    if n > level:
        raise WordTooDeepError(f"word of length {n} is deeper than level {level}")
    block = 3 ** (level - n)
    start = word_index(sigma) * block
    return slice(3 * start, 3 * (start + block))


def cell_energy(f: VertexFunction, sigma: WordLike):
    """Partial energy sum over the level-m edges inside C_sigma."""
    sigma = word(sigma)
    sq = _edge_squares(f)[_cell_edge_slice(f.level, sigma)]
    return _scale(f.level, f.exact) * _sum(sq, f.exact)


def cell_energies(f: VertexFunction, n: int) -> np.ndarray:
    """Cell energies of all words of length n, in lexicographic order."""
    if n > f.level:
        raise WordTooDeepError(f"word length {n} is deeper than level {f.level}")
    sq = _edge_squares(f).reshape(3**n, -1)
    scale = _scale(f.level, f.exact)
    if f.exact:
        out = np.empty(3**n, dtype=object)
        out[:] = [scale * _sum(row, True) for row in sq]
        return out
    return np.array([scale * math.fsum(row) for row in sq])


def decay_profile(f: VertexFunction, m: int | None = None) -> list[tuple[int, float]]:
    """(n, max over |sigma| = n of E_{C_sigma}[f] / E[f]) for n = 0..m.

    Data below level m are extended harmonically first.
    """
    if m is None:
        m = f.level
    if m > f.level:
        f = harmonic_extend(f, m)
    elif m < f.level:
        raise DomainError(f"profile level {m} below the data level {f.level}")
    total = graph_energy(f)
    if total == 0:
        raise ZeroEnergyError("decay profile of a constant function")
    return [(n, float(max(cell_energies(f, n)) / total)) for n in range(m + 1)]


def compose_with_word(f: VertexFunction, sigma: WordLike) -> VertexFunction:
    """f o w_sigma on V_{m - |sigma|}."""
    sigma = word(sigma)
    n = len(sigma)
    if n > f.level:
        raise WordTooDeepError(f"word of length {n} is deeper than level {f.level}")
    small = build_graph(f.level - n)
    # Integer numerators; w_i(p) = (p + p_i)/2 adds one binary digit.
    X = [int(v) for v in small.X]
    Y = [int(v) for v in small.Y]
    den_exp = small.level + 1
    for letter in reversed(sigma):
        px = int(P[letter].x * 2**den_exp)
        py = int(P[letter].y * 2**den_exp)
        X = [x + px for x in X]
        Y = [y + py for y in Y]
        den_exp += 1
    lookup = f.graph._index
    target = np.array([lookup[key] for key in zip(X, Y)], dtype=np.int64)
    return VertexFunction(f.level - n, f.values[target])


# ---------------------------------------------------------------------------
# Lacunas


def _path_words(prefix: tuple, letters: tuple[int, int], depth: int) -> np.ndarray:
    """Lexicographic indices of prefix + w, w in {s, e}^depth, ordered s before e."""
    s, e = letters
    idx = np.array([word_index(prefix)], dtype=np.int64)
    for _ in range(depth):
        idx = np.column_stack([3 * idx + s, 3 * idx + e]).ravel()
    return idx


def _refine_along_edge(tri: np.ndarray, start: int, end: int, steps: int, rule: str) -> np.ndarray:
    """Refine cells along their (start, end) edge.

    ``tri`` has shape (n, 3, ...): corner values per cell, possibly batched.
    """
    third = 3 - start - end
    for _ in range(steps):
        v = [tri[:, 0], tri[:, 1], tri[:, 2]]
        m01, m02, m12 = _midpoints(v[0], v[1], v[2], rule)
        mid = {(0, 1): m01, (1, 0): m01, (0, 2): m02, (2, 0): m02, (1, 2): m12, (2, 1): m12}
        first = np.empty_like(tri)
        first[:, start] = v[start]
        first[:, end] = mid[(start, end)]
        first[:, third] = mid[(start, third)]
        second = np.empty_like(tri)
        second[:, start] = mid[(start, end)]
        second[:, end] = v[end]
        second[:, third] = mid[(end, third)]
        tri = np.stack([first, second], axis=1).reshape((-1,) + tri.shape[1:])
    return tri


def lacuna_samples(values: np.ndarray, level: int, sigma: WordLike, L: int, extension: str = "harmonic") -> np.ndarray:
    """Lacuna grid values from raw vertex values; trailing axes of ``values`` are batched."""
    if extension not in EXTENSIONS:
        raise DomainError(f"unknown extension rule {extension!r}")
    sigma = word(sigma)
    need = len(sigma) + 1 + L
    if need > MAX_LEVEL + 8:
        raise ResourceError(f"lacuna grid level {need} too deep")
    vals = np.asarray(values)
    if level < len(sigma) + 1:
        g = build_graph(len(sigma) + 1)
        for l in range(level, len(sigma) + 1):
            c = g.corners[l]
            m01, m02, m12 = _midpoints(vals[c[:, 0]], vals[c[:, 1]], vals[c[:, 2]], extension)
            new = np.empty((3 * len(c),) + vals.shape[1:], dtype=vals.dtype)
            new[0::3], new[1::3], new[2::3] = m01, m02, m12
            vals = np.concatenate([vals, new])
        level = len(sigma) + 1
    depth = min(level, need)
    corners = build_graph(level).corners[depth]
    out = []
    for letter, start, end in LACUNA_SIDES:
        idx = _path_words(sigma + (letter,), (start, end), depth - len(sigma) - 1)
        tri = vals[corners[idx]]
        tri = _refine_along_edge(tri, start, end, need - depth, extension)
        out.append(tri[:, start])
    return np.concatenate(out)


def restrict_to_lacuna(
    f: VertexFunction, sigma: WordLike, L: int, extension: str = "harmonic"
) -> SampledCircleFunction:
    """Values of f at the 3 * 2^L lacuna grid points of C_sigma.

    Data coarser than level |sigma| + 1 + L are extended with ``extension``;
    only the cells along the lacuna are refined.
    """
    samples = lacuna_samples(f.values, f.level, sigma, L, extension)
    return SampledCircleFunction(samples.astype(float))


def lacuna_restriction_matrix(level: int, sigma: WordLike, L: int, extension: str = "harmonic") -> np.ndarray:
    """The linear map from V_level values to lacuna grid samples, shape (3 2^L, |V_level|)."""
    return lacuna_samples(np.eye(n_vertices(level)), level, sigma, L, extension)


# ---------------------------------------------------------------------------
# Restriction constant


def harmonic_corpus(q_max: int = 3, seed: int = 0, n_random: int = 4) -> list[VertexFunction]:
    """q-harmonic test functions for q <= q_max.

    For each q: the harmonic splines of the new vertices of V_q (all vertices
    for q = 0) and a few random vertex assignments.
    """
    rng = np.random.default_rng(seed)
    corpus = []
    for q in range(q_max + 1):
        nv = n_vertices(q)
        first = 0 if q == 0 else n_vertices(q - 1)
        for v in range(first, nv):
            vals = np.zeros(nv)
            vals[v] = 1.0
            corpus.append(VertexFunction(q, vals))
        for _ in range(n_random):
            corpus.append(VertexFunction(q, rng.standard_normal(nv)))
    return corpus


def restriction_energy_ratio(f: VertexFunction, alpha: float, L: int = 9) -> float:
    e = float(graph_energy(f))
    if e == 0:
        raise ZeroEnergyError("restriction ratio of a constant function")
    g = FourierFunction.from_samples(restrict_to_lacuna(f, (), L))
    return spectral_energy(g, alpha) / e


def restriction_constant_estimate(
    alpha: float, q_max: int = 3, L: int = 9, corpus: Sequence[VertexFunction] | None = None
) -> float:
    """Empirical sup of E_alpha[f on the central lacuna] / E[f] over a harmonic corpus."""
    if corpus is None:
        corpus = harmonic_corpus(q_max)
    return max(restriction_energy_ratio(f, alpha, L) for f in corpus)
