"""Words, cells, lacunas and graph approximations of the Sierpinski gasket.

Coordinates are exact: a point is ``(x, y)`` meaning the plane point
``(x, y*sqrt(3))`` with ``x`` and ``y`` dyadic rationals. The corners are
p0 = (0, 0), p1 = (1, 0), p2 = (1/2, sqrt(3)/2).

Inside :class:`GraphLevel` the same points are stored as integer numerators
over the common denominator ``2**(level+1)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import RepresentationError, ResourceError
from .results import ResidueEstimate

Word = tuple
WordLike = Union[str, Sequence[int]]

MAX_LEVEL = 12


def word(w: WordLike) -> Word:
    """Normalize ``"012"``, ``[0, 1, 2]`` or ``()`` into a tuple of letters."""
    if isinstance(w, str):
        letters = tuple(int(c) for c in w if not c.isspace())
    else:
        letters = tuple(int(c) for c in w)
    if any(c not in (0, 1, 2) for c in letters):
        raise ValueError(f"word letters must be 0, 1 or 2: {w!r}")
    return letters


def word_str(w: Word) -> str:
    return "".join(str(c) for c in w) or "()"


def is_prefix(sigma: WordLike, tau: WordLike) -> bool:
    sigma, tau = word(sigma), word(tau)
    return tau[: len(sigma)] == sigma


def word_index(w: WordLike) -> int:
    idx = 0
    for c in word(w):
        idx = 3 * idx + c
    return idx


def words(n: int) -> Iterator[Word]:
    """All words of length n in lexicographic order."""
    for i in range(3**n):
        letters = []
        for _ in range(n):
            i, r = divmod(i, 3)
            letters.append(r)
        yield tuple(reversed(letters))


def words_upto(m: int) -> Iterator[Word]:
    """Words ordered by (length, lexicographic)."""
    for n in range(m + 1):
        yield from words(n)


@dataclass(frozen=True)
class GasketPoint:
    x: Fraction
    y: Fraction  # coefficient of sqrt(3)

    def __post_init__(self):
        for c in (self.x, self.y):
            den = Fraction(c).denominator
            if den & (den - 1):
                raise RepresentationError(f"coordinate {c} is not dyadic")
        object.__setattr__(self, "x", Fraction(self.x))
        object.__setattr__(self, "y", Fraction(self.y))

    def to_float(self) -> tuple[float, float]:
        return float(self.x), float(self.y) * math.sqrt(3.0)

    def exponent(self) -> int:
        den = max(self.x.denominator, self.y.denominator)
        return den.bit_length() - 1

    def __str__(self) -> str:
        return f"({self.x}, {self.y}*sqrt3)"


P = (
    GasketPoint(Fraction(0), Fraction(0)),
    GasketPoint(Fraction(1), Fraction(0)),
    GasketPoint(Fraction(1, 2), Fraction(1, 2)),
)


def midpoint(a: GasketPoint, b: GasketPoint) -> GasketPoint:
    return GasketPoint((a.x + b.x) / 2, (a.y + b.y) / 2)


def euclidean_distance(a: GasketPoint, b: GasketPoint) -> float:
    dx = a.x - b.x
    dy = a.y - b.y
    return math.sqrt(float(dx * dx + 3 * dy * dy))


def apply_word(sigma: WordLike, x: GasketPoint) -> GasketPoint:
    """w_sigma(x) with w_sigma = w_{s1} o ... o w_{sm}; innermost letter last."""
    px, py = x.x, x.y
    for c in reversed(word(sigma)):
        px = (px + P[c].x) / 2
        py = (py + P[c].y) / 2
    return GasketPoint(px, py)


def cell_corners(sigma: WordLike) -> tuple[GasketPoint, GasketPoint, GasketPoint]:
    return tuple(apply_word(sigma, p) for p in P)


@dataclass(frozen=True, eq=False)
class GraphLevel:
    """The level-m graph (V_m, E_m).

    Vertices of V_{m-1} keep their indices in V_m; new vertices are the edge
    midpoints, three per level-(m-1) cell in the order m01, m02, m12.
    ``corners[l][i]`` holds the vertex ids of the cell with lexicographic
    index ``i`` among words of length ``l``.
    """

    level: int
    X: np.ndarray  # integer numerators of x over 2**(level+1)
    Y: np.ndarray  # integer numerators of the sqrt(3) coefficient of y
    corners: tuple
    edges: np.ndarray  # (3**(level+1), 2) vertex ids
    edge_word: np.ndarray  # lexicographic word index (length = level) per edge

    @property
    def denominator_exponent(self) -> int:
        return self.level + 1

    @property
    def n_vertices(self) -> int:
        return len(self.X)

    def point(self, i: int) -> GasketPoint:
        den = 1 << self.denominator_exponent
        return GasketPoint(Fraction(int(self.X[i]), den), Fraction(int(self.Y[i]), den))

    @property
    def vertices(self) -> list[GasketPoint]:
        return [self.point(i) for i in range(self.n_vertices)]

    def float_coordinates(self) -> np.ndarray:
        den = float(1 << self.denominator_exponent)
        return np.column_stack([self.X / den, self.Y * math.sqrt(3.0) / den])

    @cached_property
    def _index(self) -> dict:
        return {(int(a), int(b)): i for i, (a, b) in enumerate(zip(self.X, self.Y))}

    def _numerators(self, p: GasketPoint) -> tuple[int, int] | None:
        den = 1 << self.denominator_exponent
        X, Y = p.x * den, p.y * den
        if X.denominator != 1 or Y.denominator != 1:
            return None
        return int(X), int(Y)

    def index_of(self, p: GasketPoint) -> int | None:
        key = self._numerators(p)
        return None if key is None else self._index.get(key)

    def cell_vertex_ids(self, sigma: WordLike) -> np.ndarray:
        sigma = word(sigma)
        return self.corners[len(sigma)][word_index(sigma)]


def _check_level(m: int, max_level: int) -> None:
    if m < 0:
        raise ValueError("level must be nonnegative")
    if m > max_level:
        raise ResourceError(f"level {m} exceeds the configured maximum {max_level}")


def build_graph(m: int, max_level: int = MAX_LEVEL) -> GraphLevel:
    _check_level(m, max_level)
    return _build_graph(m)


@lru_cache(maxsize=16)
def _build_graph(m: int) -> GraphLevel:
    e = m + 1
    X = [0, 1 << e, 1 << m]
    Y = [0, 0, 1 << m]
    X = np.array(X, dtype=np.int64)
    Y = np.array(Y, dtype=np.int64)
    corners = [np.array([[0, 1, 2]], dtype=np.int64)]
    for _ in range(m):
        cur = corners[-1]
        n_cells = len(cur)
        nv = len(X)
        a0, a1, a2 = cur[:, 0], cur[:, 1], cur[:, 2]
        base = nv + 3 * np.arange(n_cells, dtype=np.int64)
        m01, m02, m12 = base, base + 1, base + 2
        newX = np.empty(3 * n_cells, dtype=np.int64)
        newY = np.empty(3 * n_cells, dtype=np.int64)
        newX[0::3], newY[0::3] = (X[a0] + X[a1]) // 2, (Y[a0] + Y[a1]) // 2
        newX[1::3], newY[1::3] = (X[a0] + X[a2]) // 2, (Y[a0] + Y[a2]) // 2
        newX[2::3], newY[2::3] = (X[a1] + X[a2]) // 2, (Y[a1] + Y[a2]) // 2
        X = np.concatenate([X, newX])
        Y = np.concatenate([Y, newY])
        children = np.empty((3 * n_cells, 3), dtype=np.int64)
        children[0::3] = np.column_stack([a0, m01, m02])
        children[1::3] = np.column_stack([m01, a1, m12])
        children[2::3] = np.column_stack([m02, m12, a2])
        corners.append(children)
    top = corners[-1]
    edges = np.empty((3 * len(top), 2), dtype=np.int64)
    edges[0::3] = top[:, [0, 1]]
    edges[1::3] = top[:, [0, 2]]
    edges[2::3] = top[:, [1, 2]]
    edge_word = np.repeat(np.arange(len(top), dtype=np.int64), 3)
    for arr in (X, Y, edges, edge_word, *corners):
        arr.setflags(write=False)
    return GraphLevel(m, X, Y, tuple(corners), edges, edge_word)


# ---------------------------------------------------------------------------
# Lacunas

# Corners of the central lacuna in traversal order: t = 0, 2pi/3, 4pi/3.
LACUNA_CORNERS = (midpoint(P[0], P[1]), midpoint(P[1], P[2]), midpoint(P[0], P[2]))
# Each side of the central lacuna is an edge of a level-1 cell:
# (child letter, corner the side starts at, corner it ends at).
LACUNA_SIDES = ((1, 0, 2), (2, 1, 0), (0, 2, 1))

_SNAP_LEVEL = 40


def _grid_position(t: float, level: int | None) -> tuple[int, int, bool]:
    """Locate t on the grid 2 pi j / (3 2^L). Returns (j, L, snapped)."""
    t = math.fmod(t, 2 * math.pi)
    if t < 0:
        t += 2 * math.pi
    levels = [level] if level is not None else range(_SNAP_LEVEL + 1)
    for L in levels:
        q = t * 3 * 2**L / (2 * math.pi)
        j = round(q)
        if abs(q - j) <= 1e-9 * max(1.0, q):
            return j % (3 * 2**L), L, False
    L = level if level is not None else _SNAP_LEVEL
    j = round(t * 3 * 2**L / (2 * math.pi)) % (3 * 2**L)
    return j, L, True


def lacuna_param(sigma: WordLike, t: float, level: int | None = None) -> GasketPoint:
    """Constant-speed counterclockwise parametrization of the lacuna of C_sigma.

    Exact on the grid t = 2 pi j / (3 2^L). Other t are snapped to the
    nearest grid point and a warning is emitted.
    """
    j, L, snapped = _grid_position(t, level)
    if snapped:
        warnings.warn(f"t={t!r} is not on the dyadic lacuna grid; snapped to level {L}", stacklevel=2)
    side, k = divmod(j, 2**L)
    u = Fraction(k, 2**L)
    a, b = LACUNA_CORNERS[side], LACUNA_CORNERS[(side + 1) % 3]
    base = GasketPoint(a.x + u * (b.x - a.x), a.y + u * (b.y - a.y))
    return apply_word(sigma, base)


def lacuna_grid(sigma: WordLike, L: int) -> list[GasketPoint]:
    n = 3 * 2**L
    return [lacuna_param(sigma, 2 * math.pi * j / n, level=L) for j in range(n)]


def lacuna_center_float(sigma: WordLike) -> tuple[float, float]:
    """Centroid of the removed triangle of C_sigma (a point outside K)."""
    pts = [apply_word(sigma, c).to_float() for c in LACUNA_CORNERS]
    return (sum(p[0] for p in pts) / 3, sum(p[1] for p in pts) / 3)


# ---------------------------------------------------------------------------
# Geodesic distance on the level-m skeleton


def _locate_on_skeleton(g: GraphLevel, p: GasketPoint):
    """Return ('vertex', id) or ('edge', u, v, fraction from u)."""
    idx = g.index_of(p)
    if idx is not None:
        return ("vertex", idx)
    den = 1 << g.denominator_exponent
    # exact test with numerators scaled to the point's denominator
    scale = max(den, p.x.denominator, p.y.denominator)
    PX, PY = p.x * scale, p.y * scale
    if PX.denominator != 1 or PY.denominator != 1:
        raise RepresentationError("point is not dyadic")
    PX, PY = int(PX), int(PY)
    f = scale // den
    ux, uy = g.X[g.edges[:, 0]] * f, g.Y[g.edges[:, 0]] * f
    vx, vy = g.X[g.edges[:, 1]] * f, g.Y[g.edges[:, 1]] * f
    # entries stay within int64 for supported levels and point depths
    cross = (vx - ux) * (PY - uy) - (vy - uy) * (PX - ux)
    dot = (PX - ux) * (vx - ux) + 3 * (PY - uy) * (vy - uy)
    len2 = (vx - ux) ** 2 + 3 * (vy - uy) ** 2
    hit = np.nonzero((cross == 0) & (dot > 0) & (dot < len2))[0]
    if len(hit) == 0:
        raise RepresentationError(f"point {p} is not on the level-{g.level} skeleton")
    e = int(hit[0])
    return ("edge", int(g.edges[e, 0]), int(g.edges[e, 1]), Fraction(int(dot[e]), int(len2[e])))


def geodesic_distance(x: GasketPoint, y: GasketPoint, m: int) -> ResidueEstimate:
    """Shortest-path distance between two points of the level-m skeleton.

    Geodesics between points of V_m run along level-m edges, so for vertices
    the value is already the intrinsic distance on K; the value is
    nonincreasing in m in general.
    """
    g = build_graph(m)
    h = 2.0**-m
    n = g.n_vertices
    rows = list(g.edges[:, 0])
    cols = list(g.edges[:, 1])
    w = [h] * len(rows)
    nodes = []
    locs = [_locate_on_skeleton(g, x), _locate_on_skeleton(g, y)]
    extra = n
    for loc in locs:
        if loc[0] == "vertex":
            nodes.append(loc[1])
        else:
            _, u, v, frac = loc
            rows += [u, extra]
            cols += [extra, v]
            w += [float(frac) * h, float(1 - frac) * h]
            nodes.append(extra)
            extra += 1
    A = coo_matrix((w, (rows, cols)), shape=(extra, extra)).tocsr()
    dist = dijkstra(A, directed=False, indices=nodes[0])
    d = float(dist[nodes[1]])
    if locs[0][0] == "edge" and locs[1][0] == "edge" and set(locs[0][1:3]) == set(locs[1][1:3]):
        d = min(d, euclidean_distance(x, y))
    if x == y:
        d = 0.0
    return ResidueEstimate(d, 0.0, {"level": m})


def point_on_graph(g: GraphLevel, p: GasketPoint) -> bool:
    try:
        _locate_on_skeleton(g, p)
    except RepresentationError:
        return False
    return True


def iter_vertex_pairs(m: int) -> Iterable[tuple[int, int]]:
    n = build_graph(m).n_vertices
    for i in range(n):
        for j in range(i + 1, n):
            yield i, j
