"""Standard (midpoint/chain) subdivision and product triangulations.

The subdivision of an ordered n-simplex has one vertex (v_i + v_j)/2 for each
label pair i <= j, ordered by the sandwich relation (i,j) <= (k,l) iff
k <= i <= j <= l; its simplices are the chains of that poset.  Midpoint
vertices are deduplicated across simplices by their exact coordinates, so
shared faces subdivide consistently.

Product triangulations of X x [0,1] come in two flavours: the canonical one
(same complex on both layers) and the standard product subdivision (bottom
layer X, top layer the standard subdivision of X).  Both accept placement
callbacks so that cone slabs can realize the layers at different heights and
scales.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable

from .geom import (
    Coord,
    GeoComplex,
    GeomError,
    SimplexT,
    _closure,
    _consecutive_pairs,
    ordered_similarity_key,
    simplex_similarity_key,
)

__all__ = [
    "standard_subdivision",
    "standard_subdivision_detailed",
    "iterate_subdivision",
    "canonical_product",
    "standard_product_subdivision",
    "max_chains",
    "ordered_class_children",
    "class_sets_by_depth",
    "canonical_class_count",
    "canonical_counts_by_depth",
]

Placement = Callable[[Coord], Coord]


@lru_cache(maxsize=None)
def max_chains(n: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """Maximal chains of the label poset of an n-simplex subdivision.

    Chains run from a minimal label (i,i) up to (0,n); each has n+1 labels and
    there are 2**n of them.
    """
    chains: list[tuple[tuple[int, int], ...]] = []

    def grow(path: list[tuple[int, int]]) -> None:
        i, j = path[-1]
        if (i, j) == (0, n):
            chains.append(tuple(path))
            return
        if i > 0:
            grow(path + [(i - 1, j)])
        if j < n:
            grow(path + [(i, j + 1)])

    for i in range(n + 1):
        grow([(i, i)])
    return tuple(chains)


class _VertexPool:
    """Deduplicates vertices by exact coordinates, assigning stable ids."""

    def __init__(self) -> None:
        self.index: dict[Coord, int] = {}
        self.coords: list[Coord] = []

    def add(self, coord: Coord) -> int:
        got = self.index.get(coord)
        if got is None:
            got = len(self.coords)
            self.index[coord] = got
            self.coords.append(coord)
        return got


def _midpoint(a: Coord, b: Coord) -> Coord:
    half = Fraction(1, 2)
    return tuple((x + y) * half for x, y in zip(a, b))


def standard_subdivision_detailed(
    c: GeoComplex,
) -> tuple[GeoComplex, dict[SimplexT, list[SimplexT]]]:
    """Standard subdivision plus a map from input top simplices to their
    top-dimensional children (as tuples of new vertex ids)."""
    pool = _VertexPool()
    cells: list[SimplexT] = []
    carriers: dict[SimplexT, list[SimplexT]] = {}
    for s in sorted(c.top_simplices):
        n = len(s) - 1
        verts = c.simplex_coords(s)
        label_id: dict[tuple[int, int], int] = {}
        for i in range(n + 1):
            for j in range(i, n + 1):
                label_id[(i, j)] = pool.add(_midpoint(verts[i], verts[j]))
        children = []
        for chain in max_chains(n):
            cell = tuple(label_id[lab] for lab in chain)
            cells.append(cell)
            children.append(cell)
        carriers[s] = children
    closed = _closure(cells)
    out = GeoComplex(
        vertices=tuple(pool.coords),
        simplices=closed,
        order=_consecutive_pairs(closed),
    )
    return out, carriers


def standard_subdivision(c: GeoComplex) -> GeoComplex:
    """One round of standard subdivision of a locally ordered complex."""
    return standard_subdivision_detailed(c)[0]


def iterate_subdivision(c: GeoComplex, k: int) -> GeoComplex:
    """k rounds of standard subdivision; k = 0 returns the complex unchanged."""
    if k < 0:
        raise GeomError("iteration count must be nonnegative")
    out = c
    for _ in range(k):
        out = standard_subdivision(out)
    return out


# ---------------------------------------------------------------------------
# similarity classes of iterated subdivisions
#
# Subdivision commutes with translation and positive scaling, so the children
# of a simplex depend only on its order-sensitive similarity key.  Iterating
# on the key set instead of the complex makes deep class counts cheap.
# ---------------------------------------------------------------------------


def _key_representative(key: tuple) -> list[Coord]:
    """A concrete ordered simplex realizing an ordered similarity key."""
    if key == ():
        return [(Fraction(0),)]
    amb = len(key[0])
    origin = tuple(Fraction(0) for _ in range(amb))
    return [origin] + [tuple(e) for e in key]


@lru_cache(maxsize=None)
def ordered_class_children(key: tuple) -> frozenset[tuple]:
    """Ordered similarity keys of all simplices of the standard subdivision of
    any simplex with the given ordered key."""
    if key == ():
        return frozenset({()})
    coords = _key_representative(key)
    n = len(coords) - 1
    comp = GeoComplex(
        vertices=tuple(coords),
        simplices=_closure([tuple(range(n + 1))]),
        order=_consecutive_pairs([tuple(range(n + 1))]),
    )
    sub = standard_subdivision(comp)
    return frozenset(
        ordered_similarity_key(sub.simplex_coords(s)) for s in sub.simplices
    )


def class_sets_by_depth(c: GeoComplex, depth: int) -> list[frozenset[tuple]]:
    """Ordered-key class sets of the iterated subdivisions of c.

    Entry d is the set of ordered similarity keys of the simplices of the
    d-fold standard subdivision, computed by iterating the per-class expansion
    map rather than building the complexes.
    """
    current = frozenset(ordered_similarity_key(c.simplex_coords(s)) for s in c.simplices)
    sets = [current]
    for _ in range(depth):
        nxt: set[tuple] = set()
        for key in current:
            nxt |= ordered_class_children(key)
        current = frozenset(nxt)
        sets.append(current)
    return sets


@lru_cache(maxsize=None)
def _canonical_of_ordered(key: tuple) -> tuple:
    return simplex_similarity_key(_key_representative(key))


def canonical_class_count(keys: frozenset[tuple]) -> int:
    """Number of strong similarity classes represented by a set of ordered keys."""
    return len({_canonical_of_ordered(k) for k in keys})


def canonical_counts_by_depth(c: GeoComplex, depth: int) -> list[int]:
    return [canonical_class_count(s) for s in class_sets_by_depth(c, depth)]


# ---------------------------------------------------------------------------
# product triangulations
# ---------------------------------------------------------------------------


def _default_bottom(v: Coord) -> Coord:
    return v + (Fraction(0),)


def _default_top(v: Coord) -> Coord:
    return v + (Fraction(1),)


def canonical_product(
    c: GeoComplex,
    place_bottom: Placement | None = None,
    place_top: Placement | None = None,
) -> GeoComplex:
    """Canonical triangulation of X x [0,1].

    For each ordered simplex (v_0..v_k) and each 0 <= j <= k the cell spans
    (v_0,0)..(v_j,0),(v_j,1)..(v_k,1).  Restricting to either layer gives back
    the input complex.
    """
    pb = place_bottom or _default_bottom
    pt = place_top or _default_top
    pool = _VertexPool()
    cells: list[SimplexT] = []
    for s in sorted(c.top_simplices):
        verts = c.simplex_coords(s)
        bot = [pool.add(pb(v)) for v in verts]
        top = [pool.add(pt(v)) for v in verts]
        k = len(s) - 1
        for j in range(k + 1):
            cells.append(tuple(bot[: j + 1]) + tuple(top[j:]))
    closed = _closure(cells)
    return GeoComplex(
        vertices=tuple(pool.coords),
        simplices=closed,
        order=_consecutive_pairs(closed),
    )


def _nested_pair_chains(
    n: int, lo: int, hi: int
) -> Iterable[tuple[tuple[int, int], ...]]:
    """All chains (possibly empty) of nested label pairs (u_0,w_0) < (u_1,w_1)
    < ... whose innermost pair sandwiches [lo, hi]."""
    yield ()
    starts = [
        (u, w) for u in range(lo + 1) for w in range(hi, n + 1)
    ]

    def grow(chain: list[tuple[int, int]]) -> Iterable[tuple[tuple[int, int], ...]]:
        yield tuple(chain)
        u0, w0 = chain[-1]
        for u in range(u0 + 1):
            for w in range(w0, n + 1):
                if (u, w) != (u0, w0):
                    yield from grow(chain + [(u, w)])

    for st in starts:
        yield from grow([st])


def standard_product_subdivision(
    c: GeoComplex,
    place_bottom: Placement | None = None,
    place_top: Placement | None = None,
) -> GeoComplex:
    """Product triangulation with bottom layer X and top layer its standard
    subdivision.

    Cells combine an increasing bottom chain v_0 < .. < v_k with a nested top
    chain of subdivision pairs (u_0,w_0) < (u_1,w_1) < .. whose innermost
    interval sandwiches [v_0, v_k]; the cell spans (v_0,0)..(v_k,0),
    ((u_0,w_0),1)..((u_l,w_l),1).
    """
    pb = place_bottom or _default_bottom
    pt = place_top or _default_top
    pool = _VertexPool()
    cells: list[SimplexT] = []
    for s in sorted(c.top_simplices):
        n = len(s) - 1
        verts = c.simplex_coords(s)
        bot = [pool.add(pb(v)) for v in verts]
        pair_id: dict[tuple[int, int], int] = {}
        for i in range(n + 1):
            for j in range(i, n + 1):
                pair_id[(i, j)] = pool.add(pt(_midpoint(verts[i], verts[j])))
        for size in range(1, n + 2):
            for subset in itertools.combinations(range(n + 1), size):
                lo, hi = subset[0], subset[-1]
                for chain in _nested_pair_chains(n, lo, hi):
                    cell = tuple(bot[i] for i in subset) + tuple(
                        pair_id[p] for p in chain
                    )
                    cells.append(cell)
    closed = _closure(cells)
    return GeoComplex(
        vertices=tuple(pool.coords),
        simplices=closed,
        order=_consecutive_pairs(closed),
    )
