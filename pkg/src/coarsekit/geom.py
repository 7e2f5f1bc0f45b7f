"""Locally ordered simplicial complexes with exact dyadic vertex coordinates.

A complex stores its vertices as tuples of `fractions.Fraction` whose
denominators are powers of two, its simplices as tuples of vertex ids sorted
by a local (partial) order, and the generating pairs of that order.  Exact
quantities (edge lengths squared, volumes, similarity keys) are computed in
rational arithmetic; metric quantities that genuinely need square roots or
operator norms (width, diameter, affine Lipschitz constants) are computed in
floating point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Coord = tuple[Fraction, ...]
SimplexT = tuple[int, ...]

__all__ = [
    "Coord",
    "SimplexT",
    "GeoComplex",
    "GeomError",
    "frac",
    "is_dyadic",
    "dyadic_pair",
    "pair_value",
    "point",
    "build_complex",
    "faces_of",
    "diameter",
    "diameter_sq",
    "edge_length_sq",
    "width",
    "affine_lipschitz",
    "ordered_similarity_key",
    "similarity_key",
    "simplex_similarity_key",
    "strongly_similar",
    "volume_sq",
    "volume",
    "frac_sqrt",
    "barycentric_exact",
    "barycenter",
    "validate",
    "translate_complex",
    "scale_complex",
]


class GeomError(ValueError):
    """Raised when a complex or simplex violates a structural precondition."""


def frac(x) -> Fraction:
    """Coerce ints, Fractions and float-free strings to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        # Floats are binary rationals, hence exactly representable and dyadic.
        return Fraction(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to Fraction")


def is_dyadic(q: Fraction) -> bool:
    d = q.denominator
    return d & (d - 1) == 0


def dyadic_pair(q: Fraction) -> tuple[int, int]:
    """Return (numerator, exponent) with q == numerator / 2**exponent, reduced."""
    if not is_dyadic(q):
        raise GeomError(f"{q} is not a dyadic rational")
    return q.numerator, q.denominator.bit_length() - 1


def pair_value(num: int, exp: int) -> Fraction:
    return Fraction(num, 1 << exp)


def point(*coords) -> Coord:
    return tuple(frac(c) for c in coords)


def faces_of(simplex: SimplexT) -> list[SimplexT]:
    """All nonempty subtuples of a simplex tuple, order preserved."""
    ids = list(simplex)
    out = []
    for r in range(1, len(ids) + 1):
        out.extend(itertools.combinations(ids, r))
    return out


@dataclass(frozen=True)
class GeoComplex:
    """A geometric simplicial complex with a local order on its vertices.

    vertices: exact coordinates, one tuple of Fractions per vertex.
    simplices: face-closed set of vertex-id tuples, each sorted so that
        consecutive entries are related in the local order.
    order: generating relation pairs (a, b) meaning a precedes b.
    """

    vertices: tuple[Coord, ...]
    simplices: frozenset[SimplexT]
    order: frozenset[tuple[int, int]]

    @cached_property
    def ambient_dim(self) -> int:
        return len(self.vertices[0]) if self.vertices else 0

    @cached_property
    def dim(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    @cached_property
    def coords(self) -> np.ndarray:
        return np.array(
            [[float(c) for c in v] for v in self.vertices], dtype=float
        ).reshape(len(self.vertices), self.ambient_dim)

    @cached_property
    def simplex_sets(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset(s) for s in self.simplices)

    @cached_property
    def top_simplices(self) -> tuple[SimplexT, ...]:
        """Simplices that are not a proper face of another simplex."""
        sets = {frozenset(s): s for s in self.simplices}
        tops = []
        for key, s in sets.items():
            if not any(key < other for other in sets):
                tops.append(s)
        return tuple(sorted(tops))

    def simplex_coords(self, s: SimplexT) -> list[Coord]:
        return [self.vertices[i] for i in s]

    def simplex_points(self, s: SimplexT) -> np.ndarray:
        return self.coords[list(s)]

    def __contains__(self, s) -> bool:
        return tuple(s) in self.simplices


def _closure(simplices: Iterable[SimplexT]) -> frozenset[SimplexT]:
    out: set[SimplexT] = set()
    for s in simplices:
        for f in faces_of(tuple(s)):
            out.add(f)
    return frozenset(out)


def _consecutive_pairs(simplices: Iterable[SimplexT]) -> frozenset[tuple[int, int]]:
    pairs: set[tuple[int, int]] = set()
    for s in simplices:
        for a, b in zip(s, s[1:]):
            pairs.add((a, b))
    return frozenset(pairs)


def build_complex(
    vertices: Sequence[Sequence],
    simplices: Iterable[Sequence[int]],
    order: Iterable[Sequence[int]] | None = None,
) -> GeoComplex:
    """Build a face-closed GeoComplex from vertex coordinates and simplices.

    When ``order`` is omitted the natural index order is used and simplex
    tuples are sorted ascending.  When it is given, each simplex tuple is kept
    as passed and must already be sorted consistently with the order.
    """
    verts = tuple(tuple(frac(c) for c in v) for v in vertices)
    for v in verts:
        for c in v:
            if not is_dyadic(c):
                raise GeomError(f"non-dyadic coordinate {c}")
        if len(v) != len(verts[0]):
            raise GeomError("inconsistent ambient dimension")
    if order is None:
        simps = [tuple(sorted(int(i) for i in s)) for s in simplices]
        closed = _closure(simps)
        pairs = _consecutive_pairs(closed)
    else:
        simps = [tuple(int(i) for i in s) for s in simplices]
        closed = _closure(simps)
        pairs = frozenset((int(a), int(b)) for a, b in order) | _consecutive_pairs(closed)
    return GeoComplex(vertices=verts, simplices=closed, order=pairs)


# ---------------------------------------------------------------------------
# metric quantities
# ---------------------------------------------------------------------------


def edge_length_sq(c: GeoComplex, i: int, j: int) -> Fraction:
    return sum((a - b) ** 2 for a, b in zip(c.vertices[i], c.vertices[j]))


def diameter_sq(s: SimplexT, c: GeoComplex) -> Fraction:
    best = Fraction(0)
    for i, j in itertools.combinations(s, 2):
        d = edge_length_sq(c, i, j)
        if d > best:
            best = d
    return best


def diameter(s: SimplexT, c: GeoComplex) -> float:
    """Float diameter of a simplex: the largest pairwise vertex distance."""
    return math.sqrt(float(diameter_sq(s, c)))


def _dist_point_affine(p: np.ndarray, base: np.ndarray) -> float:
    """Distance from p to the affine hull of the rows of base."""
    o = base[0]
    if base.shape[0] == 1:
        return float(np.linalg.norm(p - o))
    d = (base[1:] - o).T
    t, *_ = np.linalg.lstsq(d, p - o, rcond=None)
    return float(np.linalg.norm(p - o - d @ t))


def width(s: SimplexT, c: GeoComplex) -> float:
    """Minimal distance from a vertex to the affine hull of the opposite face.

    Defined for simplices of dimension >= 1; a lone vertex has no opposite
    face.
    """
    if len(s) < 2:
        raise GeomError("width is undefined for 0-simplices")
    if not affinely_independent(c.simplex_coords(s)):
        raise GeomError(f"degenerate simplex {s}")
    pts = c.simplex_points(s)
    best = math.inf
    for k in range(len(s)):
        rest = np.delete(pts, k, axis=0)
        best = min(best, _dist_point_affine(pts[k], rest))
    return best


def _exact_rank(rows: list[list[Fraction]]) -> int:
    m = [list(r) for r in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    row = 0
    for col in range(cols):
        piv = None
        for r in range(row, len(m)):
            if m[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        pv = m[row][col]
        for r in range(len(m)):
            if r != row and m[r][col] != 0:
                f = m[r][col] / pv
                m[r] = [a - f * b for a, b in zip(m[r], m[row])]
        row += 1
        rank += 1
        if row == len(m):
            break
    return rank


def _edge_rows(coords: list[Coord]) -> list[list[Fraction]]:
    v0 = coords[0]
    return [[a - b for a, b in zip(v, v0)] for v in coords[1:]]


def affinely_independent(coords: list[Coord]) -> bool:
    rows = _edge_rows(coords)
    return _exact_rank(rows) == len(rows)


def affine_lipschitz(s: SimplexT, c: GeoComplex, images: Sequence[Sequence[float]]) -> float:
    """Lipschitz constant of the affine map sending the vertices of s to images.

    This is the largest singular value of the linear part restricted to the
    direction space of s.  Vertices of s must be affinely independent.
    """
    if len(images) != len(s):
        raise GeomError("one image point per vertex required")
    if not affinely_independent(c.simplex_coords(s)):
        raise GeomError("simplex vertices are affinely dependent")
    if len(s) == 1:
        return 0.0
    pts = c.simplex_points(s)
    img = np.asarray(images, dtype=float)
    v = (pts[1:] - pts[0]).T          # ambient x n
    w = (img[1:] - img[0]).T
    q, r = np.linalg.qr(v)
    return float(np.linalg.norm(w @ np.linalg.inv(r), 2))


# ---------------------------------------------------------------------------
# similarity keys
# ---------------------------------------------------------------------------


def ordered_similarity_key(coords: list[Coord]) -> tuple:
    """Exact key for a simplex with a fixed vertex order.

    Equal keys mean the two ordered simplices differ by a translation plus a
    positive rescaling.  Edges from the first vertex are jointly divided by
    the absolute value of the largest-magnitude coordinate of the first edge,
    so a negative scaling flips the key's signs and yields a distinct key.
    """
    if len(coords) == 1:
        return ()
    v0 = coords[0]
    edges = [tuple(a - b for a, b in zip(v, v0)) for v in coords[1:]]
    first = edges[0]
    c = max(first, key=abs)
    if c == 0:
        raise GeomError("degenerate simplex: repeated vertex")
    scale = 1 / abs(c)
    return tuple(tuple(x * scale for x in e) for e in edges)


def simplex_similarity_key(coords: list[Coord]) -> tuple:
    """Canonical key: equal iff the simplices (as point sets) are related by a
    translation and a positive scaling, for any vertex matching."""
    if len(coords) == 1:
        return ()
    return min(
        ordered_similarity_key([coords[i] for i in perm])
        for perm in itertools.permutations(range(len(coords)))
    )


def similarity_key(s: SimplexT, c: GeoComplex) -> tuple:
    return simplex_similarity_key(c.simplex_coords(s))


def strongly_similar(coords_a: list[Coord], coords_b: list[Coord]) -> bool:
    """Exhaustive oracle: is there a vertex matching, a translation and a
    positive rational scale carrying one simplex onto the other?"""
    if len(coords_a) != len(coords_b):
        return False
    if len(coords_a) == 1:
        return True
    n = len(coords_a)
    ea = _edge_rows(coords_a)
    for perm in itertools.permutations(range(n)):
        pb = [coords_b[i] for i in perm]
        eb = _edge_rows(pb)
        lam = None
        ok = True
        for ra, rb in zip(ea, eb):
            for x, y in zip(ra, rb):
                if x == 0 and y == 0:
                    continue
                if x == 0 or y == 0:
                    ok = False
                    break
                cand = y / x
                if lam is None:
                    lam = cand
                elif cand != lam:
                    ok = False
                    break
            if not ok:
                break
        if ok and lam is not None and lam > 0:
            return True
    return False


# ---------------------------------------------------------------------------
# exact volumes (Cayley-Menger)
# ---------------------------------------------------------------------------


def _det_frac(m: list[list[Fraction]]) -> Fraction:
    """Fraction determinant by fraction-free-ish Gaussian elimination."""
    a = [list(r) for r in m]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if a[r][col] != 0:
                piv = r
                break
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        pv = a[col][col]
        det *= pv
        for r in range(col + 1, n):
            if a[r][col] != 0:
                f = a[r][col] / pv
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def volume_sq(s: SimplexT, c: GeoComplex) -> Fraction:
    """Exact squared d-volume of a d-simplex via the Cayley-Menger determinant."""
    d = len(s) - 1
    if d == 0:
        return Fraction(1)
    m: list[list[Fraction]] = [[Fraction(0)] + [Fraction(1)] * (d + 1)]
    for i in s:
        row = [Fraction(1)]
        for j in s:
            row.append(edge_length_sq(c, i, j))
        m.append(row)
    cm = _det_frac(m)
    sign = -1 if (d + 1) % 2 else 1
    val = sign * cm / (Fraction(2) ** d * Fraction(math.factorial(d)) ** 2)
    return val


def volume(s: SimplexT, c: GeoComplex) -> float:
    return math.sqrt(float(volume_sq(s, c)))


def frac_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None if irrational."""
    if q < 0:
        return None
    rn = math.isqrt(q.numerator)
    rd = math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


# ---------------------------------------------------------------------------
# exact point location
# ---------------------------------------------------------------------------


def barycentric_exact(p: Coord, coords: list[Coord]) -> list[Fraction] | None:
    """Exact barycentric coordinates of p in the affine hull of coords.

    Returns None when p lies outside the hull.  The simplex must be affinely
    independent.
    """
    n = len(coords) - 1
    amb = len(p)
    # Solve [e_1 ... e_n] t = p - v0 in exact arithmetic, then check residual.
    rows = _edge_rows(coords)  # n rows of length amb
    rhs = [a - b for a, b in zip(p, coords[0])]
    # normal equations in exact arithmetic (rank n guaranteed by caller)
    g = [[sum(rows[i][k] * rows[j][k] for k in range(amb)) for j in range(n)] for i in range(n)]
    b = [sum(rows[i][k] * rhs[k] for k in range(amb)) for i in range(n)]
    t = _solve_frac(g, b)
    if t is None:
        return None
    # verify the solution reproduces p exactly (p must be in the affine hull)
    for k in range(amb):
        if sum(t[i] * rows[i][k] for i in range(n)) != rhs[k]:
            return None
    lam0 = Fraction(1) - sum(t)
    return [lam0] + t


def _solve_frac(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    n = len(a)
    m = [list(a[i]) + [b[i]] for i in range(n)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if m[r][col] != 0:
                piv = r
                break
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        m[col] = [x / pv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[i][n] for i in range(n)]


def barycenter(s: SimplexT, c: GeoComplex) -> Coord:
    k = Fraction(1, len(s))
    acc = [Fraction(0)] * c.ambient_dim
    for i in s:
        for j, x in enumerate(c.vertices[i]):
            acc[j] += k * x
    return tuple(acc)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

_INTERIOR_CHECK_LIMIT = 600


def _reachable(order: frozenset[tuple[int, int]], n_vertices: int):
    succ: dict[int, list[int]] = {}
    for a, b in order:
        succ.setdefault(a, []).append(b)

    def reach(a: int, b: int) -> bool:
        seen = {a}
        stack = [a]
        while stack:
            x = stack.pop()
            if x == b:
                return True
            for y in succ.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return False

    return reach


def validate(c: GeoComplex) -> list[str]:
    """Structural and geometric checks; an empty report means the complex is valid.

    Interior disjointness of top cells is checked by exact point location of
    barycenters, and only on complexes small enough for the quadratic scan.
    """
    report: list[str] = []
    amb = c.ambient_dim
    for i, v in enumerate(c.vertices):
        if len(v) != amb:
            report.append(f"vertex {i}: inconsistent ambient dimension")
        for x in v:
            if not is_dyadic(x):
                report.append(f"vertex {i}: non-dyadic coordinate {x}")
    # order must be acyclic
    indeg = {i: 0 for i in range(len(c.vertices))}
    succ: dict[int, list[int]] = {}
    for a, b in c.order:
        succ.setdefault(a, []).append(b)
        indeg[b] = indeg.get(b, 0) + 1
    queue = [i for i, d in indeg.items() if d == 0]
    seen = 0
    indeg2 = dict(indeg)
    while queue:
        x = queue.pop()
        seen += 1
        for y in succ.get(x, ()):
            indeg2[y] -= 1
            if indeg2[y] == 0:
                queue.append(y)
    if seen != len(indeg):
        report.append("order relation contains a cycle")
        return report
    reach = _reachable(c.order, len(c.vertices))
    for s in sorted(c.simplices):
        if len(set(s)) != len(s):
            report.append(f"simplex {s}: repeated vertex id")
            continue
        for a, b in zip(s, s[1:]):
            if not reach(a, b):
                report.append(f"simplex {s}: vertices {a},{b} not ordered")
        for f in faces_of(s):
            if f not in c.simplices:
                report.append(f"simplex {s}: missing face {f}")
        if not affinely_independent(c.simplex_coords(s)):
            report.append(f"simplex {s}: affinely dependent vertices")
    tops = [s for s in c.top_simplices if len(s) - 1 == c.dim]
    if len(tops) <= _INTERIOR_CHECK_LIMIT:
        for s in tops:
            if not affinely_independent(c.simplex_coords(s)):
                continue
            bc = barycenter(s, c)
            for t in tops:
                if t == s:
                    continue
                lam = barycentric_exact(bc, c.simplex_coords(t))
                if lam is not None and all(x > 0 for x in lam):
                    report.append(f"interior overlap: barycenter of {s} inside {t}")
    return report


# ---------------------------------------------------------------------------
# affine images
# ---------------------------------------------------------------------------


def translate_complex(c: GeoComplex, offset: Sequence) -> GeoComplex:
    off = tuple(frac(x) for x in offset)
    verts = tuple(tuple(a + b for a, b in zip(v, off)) for v in c.vertices)
    return GeoComplex(vertices=verts, simplices=c.simplices, order=c.order)


def scale_complex(c: GeoComplex, factor) -> GeoComplex:
    f = frac(factor)
    if f <= 0:
        raise GeomError("scale factor must be positive")
    verts = tuple(tuple(f * a for a in v) for v in c.vertices)
    return GeoComplex(vertices=verts, simplices=c.simplices, order=c.order)
