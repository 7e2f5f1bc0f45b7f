"""Triangulated metric cones over locally ordered complexes.

The flat cone over X in R^N is the set {(h*x, h) : x in X, h >= 0} in
R^{N+1}.  Its triangulation between integer heights 1 and K places the n-th
standard subdivision of X, scaled by k, at height k whenever 2^n <= k < 2^{n+1},
and fills the slab between heights k and k+1 with the canonical product
triangulation (level unchanged) or the standard product subdivision (level
increases by one, which happens exactly when k+1 is a power of two).

Similarity bookkeeping: the cross-section cells, rescaled by 1/k, range over
the iterated subdivisions of X and therefore draw their similarity classes
from a finite stable pool.  Slab interior cells additionally depend on the
height ratio (k+1)/k and on the radial offset of the cell, so their class
list is reported separately and is not expected to stabilize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .geom import (
    Coord,
    GeoComplex,
    GeomError,
    SimplexT,
    _closure,
    _consecutive_pairs,
    edge_length_sq,
    frac,
    ordered_similarity_key,
    simplex_similarity_key,
)
from .subdivide import (
    canonical_product,
    iterate_subdivision,
    standard_product_subdivision,
    standard_subdivision,
)

__all__ = [
    "cone_level",
    "build_cone_triangulation",
    "tip_fan",
    "merge_complexes",
    "cross_section",
    "EdgeStats",
    "edge_statistics",
    "PLMap",
    "radial_map",
    "flat_to_spherical",
    "path_metric_estimate",
    "PathEstimate",
    "ConeModel",
    "sample_base_points",
]


def cone_level(k: int) -> int:
    """Subdivision level carried by the cross-section at integer height k >= 1."""
    if k < 1:
        raise GeomError("cone heights start at 1")
    return k.bit_length() - 1


def _place(scale: int, height: int):
    s = Fraction(scale)
    h = Fraction(height)

    def placer(v: Coord) -> Coord:
        return tuple(s * x for x in v) + (h,)

    return placer


def merge_complexes(parts: list[GeoComplex]) -> GeoComplex:
    """Union of complexes, deduplicating vertices by exact coordinates."""
    index: dict[Coord, int] = {}
    coords: list[Coord] = []
    simplices: set[SimplexT] = set()
    order: set[tuple[int, int]] = set()
    for part in parts:
        remap = []
        for v in part.vertices:
            got = index.get(v)
            if got is None:
                got = len(coords)
                index[v] = got
                coords.append(v)
            remap.append(got)
        for s in part.simplices:
            simplices.add(tuple(remap[i] for i in s))
        for a, b in part.order:
            order.add((remap[a], remap[b]))
    return GeoComplex(
        vertices=tuple(coords), simplices=frozenset(simplices), order=frozenset(order)
    )


def build_cone_triangulation(c: GeoComplex, K: int) -> GeoComplex:
    """Triangulation of the cone over c between heights 1 and K.

    Cross-sections of adjacent slabs agree exactly as point sets, and the
    cross-section at height k is k times the level-n subdivision of c with
    2^n <= k < 2^{n+1}.
    """
    if K < 1:
        raise GeomError("ceiling height must be >= 1")
    levels: dict[int, GeoComplex] = {0: c}

    def level_complex(n: int) -> GeoComplex:
        if n not in levels:
            levels[n] = standard_subdivision(level_complex(n - 1))
        return levels[n]

    if K == 1:
        base = level_complex(0)
        placed = GeoComplex(
            vertices=tuple(_place(1, 1)(v) for v in base.vertices),
            simplices=base.simplices,
            order=base.order,
        )
        return placed
    parts: list[GeoComplex] = []
    for k in range(1, K):
        n0 = cone_level(k)
        n1 = cone_level(k + 1)
        base = level_complex(n0)
        if n1 == n0:
            parts.append(
                canonical_product(base, _place(k, k), _place(k + 1, k + 1))
            )
        else:
            parts.append(
                standard_product_subdivision(base, _place(k, k), _place(k + 1, k + 1))
            )
    return merge_complexes(parts)


def tip_fan(c: GeoComplex) -> GeoComplex:
    """Compact cone below height 1: the origin joined to c placed at height 1.

    Only supported for base complexes of dimension <= 2; higher-dimensional
    bases exclude heights below 1 instead.
    """
    if c.dim > 2:
        raise GeomError("tip fan only modeled for base dimension <= 2")
    amb = c.ambient_dim
    origin = tuple(Fraction(0) for _ in range(amb + 1))
    place = _place(1, 1)
    coords: list[Coord] = [origin]
    index: dict[Coord, int] = {origin: 0}
    cells: list[SimplexT] = []
    for s in sorted(c.top_simplices):
        ids = [0]
        for v in c.simplex_coords(s):
            pv = place(v)
            got = index.get(pv)
            if got is None:
                got = len(coords)
                index[pv] = got
                coords.append(pv)
            ids.append(got)
        cells.append(tuple(ids))
    closed = _closure(cells)
    return GeoComplex(
        vertices=tuple(coords), simplices=closed, order=_consecutive_pairs(closed)
    )


def cross_section(t: GeoComplex, k: int) -> GeoComplex:
    """Subcomplex of simplices all of whose vertices sit at height exactly k."""
    h = Fraction(k)
    keep = [i for i, v in enumerate(t.vertices) if v[-1] == h]
    keep_set = set(keep)
    remap = {old: new for new, old in enumerate(keep)}
    simps = frozenset(
        tuple(remap[i] for i in s)
        for s in t.simplices
        if all(i in keep_set for i in s)
    )
    order = frozenset(
        (remap[a], remap[b]) for a, b in t.order if a in keep_set and b in keep_set
    )
    return GeoComplex(
        vertices=tuple(t.vertices[i] for i in keep), simplices=simps, order=order
    )


@dataclass
class EdgeStats:
    """Exact edge-length bounds and similarity-class bookkeeping for a cone
    triangulation."""

    min_edge_sq: Fraction
    max_edge_sq: Fraction
    min_edge: float
    max_edge: float
    cross_class_keys: frozenset
    cross_class_count: int
    cell_class_count: int
    n_vertices: int
    n_cells: int

    def as_dict(self) -> dict:
        return {
            "min_edge": self.min_edge,
            "max_edge": self.max_edge,
            "min_edge_sq": [self.min_edge_sq.numerator, self.min_edge_sq.denominator],
            "max_edge_sq": [self.max_edge_sq.numerator, self.max_edge_sq.denominator],
            "classes": self.cross_class_count,
            "cell_classes": self.cell_class_count,
            "vertices": self.n_vertices,
            "cells": self.n_cells,
        }


@lru_cache(maxsize=None)
def _canonical_key_cached(okey: tuple) -> tuple:
    if okey == ():
        return ()
    amb = len(okey[0])
    origin = tuple(Fraction(0) for _ in range(amb))
    coords = [origin] + [tuple(e) for e in okey]
    return simplex_similarity_key(coords)


def edge_statistics(t: GeoComplex) -> EdgeStats:
    """Edge bounds over all edges; class pool over integer-height cross-section
    cells (the stable family), plus the count over all cells for reference."""
    edges = [s for s in t.simplices if len(s) == 2]
    if not edges:
        raise GeomError("complex has no edges")
    lens = [edge_length_sq(t, a, b) for a, b in edges]
    mn, mx = min(lens), max(lens)
    cross_keys: set[tuple] = set()
    all_keys: set[tuple] = set()
    for s in t.simplices:
        okey = ordered_similarity_key(t.simplex_coords(s))
        ckey = _canonical_key_cached(okey)
        all_keys.add(ckey)
        heights = {t.vertices[i][-1] for i in s}
        if len(heights) == 1 and next(iter(heights)).denominator == 1:
            cross_keys.add(ckey)
    tops = t.top_simplices
    return EdgeStats(
        min_edge_sq=mn,
        max_edge_sq=mx,
        min_edge=math.sqrt(float(mn)),
        max_edge=math.sqrt(float(mx)),
        cross_class_keys=frozenset(cross_keys),
        cross_class_count=len(cross_keys),
        cell_class_count=len(all_keys),
        n_vertices=len(t.vertices),
        n_cells=len(tops),
    )


# ---------------------------------------------------------------------------
# piecewise-linear base maps and cone maps
# ---------------------------------------------------------------------------


@dataclass
class PLMap:
    """Vertex-wise map on a complex with affine extension over each simplex."""

    domain: GeoComplex
    images: np.ndarray  # (n_vertices, target_dim)
    tol: float = 1e-9

    def __post_init__(self) -> None:
        self.images = np.asarray(self.images, dtype=float)
        tops = [s for s in self.domain.top_simplices]
        self._tops = tops
        v = self.domain.coords
        self._v0 = np.stack([v[s[0]] for s in tops])
        pinvs = []
        for s in tops:
            d = (v[list(s[1:])] - v[s[0]]).T if len(s) > 1 else np.zeros((v.shape[1], 0))
            pinvs.append(np.linalg.pinv(d))
        self._pinv = pinvs

    def locate(self, x: np.ndarray) -> tuple[int, np.ndarray]:
        """Index of a top simplex containing x and its barycentric coordinates."""
        x = np.asarray(x, dtype=float)
        v = self.domain.coords
        for idx, s in enumerate(self._tops):
            rel = x - self._v0[idx]
            tcoef = self._pinv[idx] @ rel
            resid = rel - (v[list(s[1:])] - v[s[0]]).T @ tcoef if len(s) > 1 else rel
            if np.linalg.norm(resid) > self.tol * (1.0 + np.linalg.norm(x)):
                continue
            lam = np.concatenate([[1.0 - tcoef.sum()], tcoef])
            if np.all(lam >= -self.tol):
                return idx, lam
        raise GeomError(f"point {x} is not on the complex")

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty((pts.shape[0], self.images.shape[1]))
        for row, x in enumerate(pts):
            idx, lam = self.locate(x)
            out[row] = lam @ self.images[list(self._tops[idx])]
        return out


def radial_map(base_map):
    """Cone map induced by a base map: (h*x, h) -> (h * f(x), h).

    The returned callable takes (bases (m,d), heights (m,)) and yields ambient
    target points (m, M+1).
    """

    def func(bases: np.ndarray, heights: np.ndarray) -> np.ndarray:
        bases = np.atleast_2d(np.asarray(bases, dtype=float))
        heights = np.asarray(heights, dtype=float)
        img = np.asarray(base_map(bases), dtype=float)
        return np.hstack([img * heights[:, None], heights[:, None]])

    return func


def flat_to_spherical(bases: np.ndarray, heights: np.ndarray, unit_embedding) -> np.ndarray:
    """Map (h*x, h) in the flat cone to h * g(x), with g a unit-sphere embedding
    of the base; the tip goes to the origin."""
    bases = np.atleast_2d(np.asarray(bases, dtype=float))
    heights = np.asarray(heights, dtype=float)
    g = np.asarray(unit_embedding(bases), dtype=float)
    norms = np.linalg.norm(g, axis=1)
    if not np.allclose(norms[heights > 0], 1.0, atol=1e-9):
        raise GeomError("embedding must take values on the unit sphere")
    return g * heights[:, None]


@dataclass
class PathEstimate:
    length: float
    ambient: float
    snap_p: float
    snap_q: float

    @property
    def ratio(self) -> float:
        return self.length / self.ambient if self.ambient > 0 else math.inf


def path_metric_estimate(t: GeoComplex, p, q) -> PathEstimate:
    """Upper bound for the path metric between two points of a triangulated
    cone: snap both points to the 1-skeleton of one extra standard subdivision
    and add the shortest skeleton path to the two snap distances."""
    refined = standard_subdivision(t)
    coords = refined.coords
    edges = [s for s in refined.simplices if len(s) == 2]
    w = np.array(
        [math.sqrt(float(edge_length_sq(refined, a, b))) for a, b in edges]
    )
    rows = np.array([e[0] for e in edges])
    cols = np.array([e[1] for e in edges])
    n = len(refined.vertices)
    graph = coo_matrix((w, (rows, cols)), shape=(n, n))
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    dp = np.linalg.norm(coords - p, axis=1)
    dq = np.linalg.norm(coords - q, axis=1)
    ip, iq = int(dp.argmin()), int(dq.argmin())
    dist = dijkstra(graph, directed=False, indices=[ip])[0, iq]
    return PathEstimate(
        length=float(dp[ip] + dist + dq[iq]),
        ambient=float(np.linalg.norm(p - q)),
        snap_p=float(dp[ip]),
        snap_q=float(dq[iq]),
    )


@dataclass
class ConeModel:
    """A cone over a base complex between two heights, with an optional
    triangulation and an optional sample of cone points."""

    base: GeoComplex
    floor: float = 1.0
    ceiling: float = 64.0
    triangulation: GeoComplex | None = None
    sample_bases: np.ndarray | None = None
    sample_heights: np.ndarray | None = None

    def ambient_points(self) -> np.ndarray:
        if self.sample_bases is None or self.sample_heights is None:
            raise GeomError("cone model carries no sample")
        h = self.sample_heights[:, None]
        return np.hstack([self.sample_bases * h, h])


def sample_base_points(c: GeoComplex, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform-ish sample on a complex: top simplices weighted by dimension-d
    volume, barycentric coordinates Dirichlet(1,..,1)."""
    tops = [s for s in c.top_simplices if len(s) - 1 == c.dim]
    vols = np.array([_float_volume(s, c) for s in tops])
    w = vols / vols.sum()
    picks = rng.choice(len(tops), size=n, p=w)
    out = np.empty((n, c.ambient_dim))
    for row, t_idx in enumerate(picks):
        s = tops[t_idx]
        lam = rng.dirichlet(np.ones(len(s)))
        out[row] = lam @ c.coords[list(s)]
    return out


def _float_volume(s: SimplexT, c: GeoComplex) -> float:
    from .geom import volume_sq

    return math.sqrt(float(volume_sq(s, c)))
