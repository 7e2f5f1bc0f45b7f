"""Finite metric nets, entourages, and cylinder homotopy combinators.

Entourages are explicit finite sets of index pairs over a net.  On grids of
nonnegative reals the interval hull operator Z, pointwise sums/differences and
translates are computed exactly over the grid values (kept as Fractions), with
pairs that leave the grid clipped and counted.  Cylinders over a net carry a
dyadic time grid (default step 1/4) so that the flip and concatenation
combinators act exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .geom import frac

__all__ = [
    "CoarseError",
    "FiniteNet",
    "grid_net",
    "euclidean_net",
    "Entourage",
    "entourage",
    "magnitude",
    "compose",
    "inverse",
    "union",
    "symmetrize",
    "bounded_entourage",
    "z_operator",
    "GridOpResult",
    "plus_entourage",
    "minus_entourage",
    "translates",
    "plus_minus_translate",
    "SampledMap",
    "image_entourage",
    "ControlModulus",
    "control_profile",
    "control_value",
    "properness_profile",
    "CylinderNet",
    "cylinder",
    "CylinderMap",
    "flip",
    "flip_entourage_check",
    "concat_homotopies",
    "ExcisiveProfile",
    "excisive_profile",
    "divergence_flags",
    "normalize_homotopy",
    "snap_up",
]


class CoarseError(ValueError):
    pass


@dataclass
class FiniteNet:
    """A finite metric space: points in R^d with the Euclidean metric.

    For grids on the nonnegative reals, ``grid`` holds the exact value of each
    point (ascending) so that the interval and arithmetic operators can work
    without rounding.
    """

    points: np.ndarray
    grid: tuple[Fraction, ...] | None = None

    def __post_init__(self) -> None:
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.grid is not None:
            if len(self.grid) != len(self.points):
                raise CoarseError("grid values must match point count")
            if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
                raise CoarseError("grid values must be strictly ascending")
            if self.grid and self.grid[0] < 0:
                raise CoarseError("grid values must be nonnegative")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dist_matrix(self) -> np.ndarray:
        cached = getattr(self, "_dist", None)
        if cached is None:
            diff = self.points[:, None, :] - self.points[None, :, :]
            cached = np.sqrt((diff**2).sum(axis=2))
            self._dist = cached
        return cached

    def dist(self, i: int, j: int) -> float:
        return float(self.dist_matrix[i, j])


def grid_net(values: Sequence) -> FiniteNet:
    vals = sorted(frac(v) for v in values)
    pts = np.array([[float(v)] for v in vals])
    return FiniteNet(points=pts, grid=tuple(vals))


def euclidean_net(points) -> FiniteNet:
    return FiniteNet(points=np.asarray(points, dtype=float))


@dataclass(frozen=True)
class Entourage:
    net: FiniteNet
    pairs: frozenset[tuple[int, int]]

    def __len__(self) -> int:
        return len(self.pairs)


def entourage(net: FiniteNet, pairs: Iterable[Sequence[int]]) -> Entourage:
    n = len(net)
    ps = frozenset((int(a), int(b)) for a, b in pairs)
    for a, b in ps:
        if not (0 <= a < n and 0 <= b < n):
            raise CoarseError(f"pair ({a},{b}) outside net of size {n}")
    return Entourage(net=net, pairs=ps)


def magnitude(m: Entourage) -> float:
    """Largest distance realized by a pair of the entourage (0 when empty)."""
    if not m.pairs:
        return 0.0
    d = m.net.dist_matrix
    return max(float(d[a, b]) for a, b in m.pairs)


def _same_net(a: Entourage, b: Entourage) -> None:
    if a.net is not b.net:
        raise CoarseError("entourages live on different nets")


def compose(m1: Entourage, m2: Entourage) -> Entourage:
    """Pairs (x, z) admitting y with (x,y) in m1 and (y,z) in m2."""
    _same_net(m1, m2)
    succ: dict[int, list[int]] = {}
    for y, z in m2.pairs:
        succ.setdefault(y, []).append(z)
    out = {(x, z) for x, y in m1.pairs for z in succ.get(y, ())}
    return Entourage(net=m1.net, pairs=frozenset(out))


def inverse(m: Entourage) -> Entourage:
    return Entourage(net=m.net, pairs=frozenset((b, a) for a, b in m.pairs))


def union(m1: Entourage, m2: Entourage) -> Entourage:
    _same_net(m1, m2)
    return Entourage(net=m1.net, pairs=m1.pairs | m2.pairs)


def symmetrize(m: Entourage) -> Entourage:
    return union(m, inverse(m))


def bounded_entourage(net: FiniteNet, radius: float) -> Entourage:
    """All pairs at distance strictly below the radius."""
    d = net.dist_matrix
    idx = np.argwhere(d < radius)
    return Entourage(net=net, pairs=frozenset((int(a), int(b)) for a, b in idx))


# ---------------------------------------------------------------------------
# grid operators
# ---------------------------------------------------------------------------


def _require_grid(net: FiniteNet) -> tuple[Fraction, ...]:
    if net.grid is None:
        raise CoarseError("operation requires a grid net over the nonnegative reals")
    return net.grid


def z_operator(m: Entourage) -> Entourage:
    """Interval hull: all grid pairs (u, v) with x <= u <= y and x <= v <= y
    for some pair (x, y) of m.  Idempotent: z(z(m)) == z(m)."""
    grid = _require_grid(m.net)
    n = len(grid)
    # the grid is ascending, so interval tests reduce to integer ranks;
    # equal values share a rank and their indices are contiguous
    rank = np.zeros(n, dtype=np.int64)
    for i in range(1, n):
        rank[i] = rank[i - 1] + (grid[i] != grid[i - 1])
    nr = int(rank[-1]) + 1 if n else 0
    first = np.zeros(nr, dtype=np.int64)
    last = np.zeros(nr, dtype=np.int64)
    for i in range(n):
        last[rank[i]] = i
    for i in range(n - 1, -1, -1):
        first[rank[i]] = i

    best = np.full(nr, -1, dtype=np.int64)  # widest reach per left rank
    if m.pairs:
        arr = np.array(list(m.pairs), dtype=np.int64)
        ra, rb = rank[arr[:, 0]], rank[arr[:, 1]]
        keep = ra <= rb
        np.maximum.at(best, ra[keep], rb[keep])

    pairs: set[tuple[int, int]] = set()
    far = -1
    for lo in range(nr):
        hi = int(best[lo])
        if hi > far:  # skip intervals nested in an earlier one
            members = range(int(first[lo]), int(last[hi]) + 1)
            pairs.update((u, v) for u in members for v in members)
            far = hi
    return Entourage(net=m.net, pairs=frozenset(pairs))


@dataclass
class GridOpResult:
    entourage: Entourage
    clipped: int


def _grid_index(grid: tuple[Fraction, ...]) -> dict[Fraction, int]:
    return {v: i for i, v in enumerate(grid)}


def plus_entourage(m: Entourage, n: Entourage) -> GridOpResult:
    """Pairs (u+x, v+y); results leaving the grid are clipped and counted."""
    grid = _require_grid(m.net)
    _same_net(m, n)
    lookup = _grid_index(grid)
    pairs: set[tuple[int, int]] = set()
    clipped = 0
    for u, v in m.pairs:
        for x, y in n.pairs:
            a = lookup.get(grid[u] + grid[x])
            b = lookup.get(grid[v] + grid[y])
            if a is None or b is None:
                clipped += 1
            else:
                pairs.add((a, b))
    return GridOpResult(Entourage(net=m.net, pairs=frozenset(pairs)), clipped)


def minus_entourage(m: Entourage, n: Entourage) -> GridOpResult:
    """Pairs (u-x, v-y) for u >= x and v >= y; off-grid results are clipped."""
    grid = _require_grid(m.net)
    _same_net(m, n)
    lookup = _grid_index(grid)
    pairs: set[tuple[int, int]] = set()
    clipped = 0
    for u, v in m.pairs:
        for x, y in n.pairs:
            if grid[u] < grid[x] or grid[v] < grid[y]:
                continue
            a = lookup.get(grid[u] - grid[x])
            b = lookup.get(grid[v] - grid[y])
            if a is None or b is None:
                clipped += 1
            else:
                pairs.add((a, b))
    return GridOpResult(Entourage(net=m.net, pairs=frozenset(pairs)), clipped)


def translates(m: Entourage) -> GridOpResult:
    """Pairs (x+a, y+a) over all grid offsets a; off-grid results clipped."""
    grid = _require_grid(m.net)
    lookup = _grid_index(grid)
    pairs: set[tuple[int, int]] = set()
    clipped = 0
    for x, y in m.pairs:
        for a in grid:
            u = lookup.get(grid[x] + a)
            v = lookup.get(grid[y] + a)
            if u is None or v is None:
                clipped += 1
            else:
                pairs.add((u, v))
    return GridOpResult(Entourage(net=m.net, pairs=frozenset(pairs)), clipped)


def plus_minus_translate(m: Entourage, n: Entourage):
    return plus_entourage(m, n), minus_entourage(m, n), translates(m)


# ---------------------------------------------------------------------------
# sampled maps and profiles
# ---------------------------------------------------------------------------


@dataclass
class SampledMap:
    """A map evaluated on every point of a finite net, with image coordinates
    in some Euclidean target."""

    source: FiniteNet
    images: np.ndarray

    def __post_init__(self) -> None:
        self.images = np.atleast_2d(np.asarray(self.images, dtype=float))
        if len(self.images) != len(self.source):
            raise CoarseError("one image per net point required")

    @property
    def image_dist(self) -> np.ndarray:
        cached = getattr(self, "_idist", None)
        if cached is None:
            diff = self.images[:, None, :] - self.images[None, :, :]
            cached = np.sqrt((diff**2).sum(axis=2))
            self._idist = cached
        return cached


def image_entourage(m: Entourage, mapping: Sequence[int], target: FiniteNet) -> Entourage:
    """Push an entourage forward along an index map into another net."""
    return Entourage(
        net=target, pairs=frozenset((mapping[a], mapping[b]) for a, b in m.pairs)
    )


@dataclass
class ControlModulus:
    radii: tuple[float, ...]
    values: tuple[float, ...]

    def is_monotone(self) -> bool:
        return all(a <= b + 1e-12 for a, b in zip(self.values, self.values[1:]))

    def linear_fit(self) -> float:
        """Smallest c with S(R) <= c*R + c on the sampled radii."""
        return max((v / (r + 1.0) for r, v in zip(self.radii, self.values)), default=0.0)


def control_value(f: SampledMap, radius: float, closed: bool = False) -> float:
    d = f.source.dist_matrix
    mask = d <= radius if closed else d < radius
    if not mask.any():
        return 0.0
    return float(f.image_dist[mask].max())


def control_profile(f: SampledMap, radii: Sequence[float]) -> ControlModulus:
    """Expansion staircase R -> max image distance over source pairs closer
    than R."""
    rs = tuple(float(r) for r in radii)
    if any(b <= a for a, b in zip(rs, rs[1:])):
        raise CoarseError("radii must be strictly increasing")
    return ControlModulus(radii=rs, values=tuple(control_value(f, r) for r in rs))


def properness_profile(
    f: SampledMap, radii: Sequence[float], center: np.ndarray | None = None
) -> ControlModulus:
    """Staircase r -> source diameter of the preimage of the closed r-ball
    around the center (default: image of the first net point)."""
    if center is None:
        center = f.images[0]
    center = np.asarray(center, dtype=float)
    dist_to_center = np.linalg.norm(f.images - center, axis=1)
    d = f.source.dist_matrix
    values = []
    for r in radii:
        sel = np.where(dist_to_center <= float(r))[0]
        if len(sel) == 0:
            values.append(0.0)
        else:
            values.append(float(d[np.ix_(sel, sel)].max()))
    return ControlModulus(radii=tuple(float(r) for r in radii), values=tuple(values))


# ---------------------------------------------------------------------------
# cylinders
# ---------------------------------------------------------------------------


def snap_up(value: float, step: Fraction) -> Fraction:
    """Smallest multiple of the step >= value (never negative)."""
    v = max(float(value), 0.0)
    k = math.ceil(v / float(step) - 1e-12)
    return step * k


@dataclass
class CylinderNet:
    """Grid cylinder over a net: points (i, t) with t on the step grid of
    [0, p(i) + 1], the exact top p(i)+1 always included."""

    base: FiniteNet
    profile: tuple[Fraction, ...]
    step: Fraction = Fraction(1, 4)
    points: list[tuple[int, Fraction]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(self.profile) != len(self.base):
            raise CoarseError("profile must assign a value to every base point")
        if any(p < 0 for p in self.profile):
            raise CoarseError("profile values must be nonnegative")
        if not self.points:
            pts = []
            for i, p in enumerate(self.profile):
                top = p + 1
                t = Fraction(0)
                while t < top:
                    pts.append((i, t))
                    t += self.step
                pts.append((i, top))
            self.points = pts

    def top(self, i: int) -> Fraction:
        return self.profile[i] + 1

    def contains(self, i: int, t: Fraction) -> bool:
        return 0 <= t <= self.top(i)

    def i0(self, i: int) -> tuple[int, Fraction]:
        return (i, Fraction(0))

    def i1(self, i: int) -> tuple[int, Fraction]:
        return (i, self.top(i))

    @staticmethod
    def q(point: tuple[int, Fraction]) -> int:
        return point[0]

    def coords(self) -> np.ndarray:
        """Embed the cylinder points as (base coords, t) for metric purposes."""
        base = self.base.points
        return np.array(
            [list(base[i]) + [float(t)] for i, t in self.points], dtype=float
        )


def cylinder(
    base: FiniteNet, profile: Sequence, step: Fraction = Fraction(1, 4)
) -> CylinderNet:
    prof = tuple(frac(p) for p in profile)
    return CylinderNet(base=base, profile=prof, step=step)


@dataclass
class CylinderMap:
    """A homotopy sample: a map defined for every base point i and every time
    0 <= t <= p(i)+1 (not only grid times)."""

    cylinder: CylinderNet
    func: Callable[[int, Fraction], np.ndarray]

    def __call__(self, i: int, t) -> np.ndarray:
        tf = t if isinstance(t, Fraction) else frac(t) if isinstance(t, int) else t
        if isinstance(tf, Fraction) and not self.cylinder.contains(i, tf):
            raise CoarseError(f"time {t} outside cylinder fiber of point {i}")
        return np.asarray(self.func(i, tf), dtype=float)

    def bottom(self, i: int) -> np.ndarray:
        return self(i, Fraction(0))

    def top(self, i: int) -> np.ndarray:
        return self(i, self.cylinder.top(i))


def flip(cyl: CylinderNet) -> Callable[[int, Fraction], tuple[int, Fraction]]:
    """The exact involution (x, t) -> (x, p(x)+1-t)."""

    def f(i: int, t: Fraction) -> tuple[int, Fraction]:
        if not cyl.contains(i, t):
            raise CoarseError("flip applied outside the cylinder")
        return (i, cyl.top(i) - t)

    return f


def flip_entourage_check(
    cyl: CylinderNet,
    base_pairs: frozenset[tuple[int, int]],
    time_pairs: frozenset[tuple[Fraction, Fraction]],
) -> tuple[bool, int]:
    """Exhaustively verify F[M x N] is contained in M x (p[M] + 1 - N).

    Returns (holds, number of product pairs checked).
    """
    f = flip(cyl)
    rhs_time = {
        (cyl.top(a) - u, cyl.top(b) - v)
        for a, b in base_pairs
        for u, v in time_pairs
    }
    checked = 0
    for a, b in base_pairs:
        for u, v in time_pairs:
            if not (cyl.contains(a, u) and cyl.contains(b, v)):
                continue
            checked += 1
            (_, fu) = f(a, u)
            (_, fv) = f(b, v)
            if (fu, fv) not in rhs_time:
                return False, checked
    return True, checked


def concat_homotopies(h1: CylinderMap, h2: CylinderMap, tol: float = 1e-9) -> CylinderMap:
    """Concatenation on the cylinder over p1 + p2 + 1: run h1 on [0, p1+1],
    then h2 on [p1+1, p1+p2+2].  Endpoints must match within tol."""
    c1, c2 = h1.cylinder, h2.cylinder
    if c1.base is not c2.base:
        raise CoarseError("homotopies live over different nets")
    if c1.step != c2.step:
        raise CoarseError("time steps differ")
    worst = 0.0
    for i in range(len(c1.base)):
        gap = float(np.linalg.norm(h1.top(i) - h2.bottom(i)))
        worst = max(worst, gap)
    if worst > tol:
        raise CoarseError(f"endpoint mismatch {worst:.3e} exceeds tolerance {tol:.1e}")
    prof = tuple(p1 + p2 + 1 for p1, p2 in zip(c1.profile, c2.profile))
    cyl = CylinderNet(base=c1.base, profile=prof, step=c1.step)

    def func(i: int, t: Fraction) -> np.ndarray:
        cut = c1.top(i)
        if t <= cut:
            return h1.func(i, t)
        return h2.func(i, t - cut)

    return CylinderMap(cylinder=cyl, func=func)


# ---------------------------------------------------------------------------
# coarsely excisive decompositions
# ---------------------------------------------------------------------------


@dataclass
class ExcisiveProfile:
    radii: tuple[float, ...]
    values: tuple[float, ...]  # may contain inf
    empty_intersection: bool


def excisive_profile(
    net: FiniteNet, a_idx: Sequence[int], b_idx: Sequence[int], radii: Sequence[float]
) -> ExcisiveProfile:
    """Staircase R -> max distance to the intersection over the overlap of the
    R-neighborhoods of the two parts; infinite when the parts do not meet but
    their neighborhoods do."""
    d = net.dist_matrix
    a = np.asarray(sorted(set(int(i) for i in a_idx)), dtype=int)
    b = np.asarray(sorted(set(int(i) for i in b_idx)), dtype=int)
    if len(a) == 0 or len(b) == 0:
        raise CoarseError("both parts must be nonempty")
    if len(np.union1d(a, b)) != len(net):
        raise CoarseError("the two parts must cover the net")
    both = np.intersect1d(a, b)
    dist_a = d[:, a].min(axis=1)
    dist_b = d[:, b].min(axis=1)
    dist_ab = d[:, both].min(axis=1) if len(both) else None
    values = []
    for r in radii:
        sel = (dist_a <= float(r)) & (dist_b <= float(r))
        if not sel.any():
            values.append(0.0)
        elif dist_ab is None:
            values.append(math.inf)
        else:
            values.append(float(dist_ab[sel].max()))
    return ExcisiveProfile(
        radii=tuple(float(r) for r in radii),
        values=tuple(values),
        empty_intersection=len(both) == 0,
    )


def divergence_flags(
    small: ExcisiveProfile, large: ExcisiveProfile, growth: float = 0.25
) -> tuple[bool, ...]:
    """Flag radii where the profile grows by more than the given fraction when
    the net is refined/extended (heuristic for a failed excision)."""
    if small.radii != large.radii:
        raise CoarseError("profiles sampled on different radii")
    flags = []
    for s, l in zip(small.values, large.values):
        if math.isinf(l) or math.isinf(s):
            flags.append(True)
        elif s == 0.0:
            flags.append(l > 0.0 and l > growth)
        else:
            flags.append(l > s * (1.0 + growth))
    return tuple(flags)


# ---------------------------------------------------------------------------
# homotopy normalization
# ---------------------------------------------------------------------------


def normalize_homotopy(
    h: CylinderMap,
    x0: int,
    L: float,
    C: float | None = None,
    tol: float = 1e-9,
) -> tuple[CylinderMap, float]:
    """Reparametrize a homotopy over I_q to one over the basepoint-distance
    profile p0(x) = d(x, x0), without changing the endpoint maps.

    Requires the profile to be large-scale Lipschitz: |q(x) - q(y)| <=
    L d(x,y) + L on the net.  Uses C = L + |q(x0)| unless a larger C is given.
    The time change runs (C+1) times faster on [0, 1] and L times faster
    beyond, and the map is extended constantly above the original top.
    """
    cyl = h.cylinder
    q = np.array([float(p) for p in cyl.profile])
    d = cyl.base.dist_matrix
    gap = np.abs(q[:, None] - q[None, :]) - (L * d + L)
    worst = float(gap.max())
    if worst > tol:
        i, j = np.unravel_index(int(gap.argmax()), gap.shape)
        raise CoarseError(
            f"profile is not ({L})-large-scale Lipschitz: points {i},{j} "
            f"violate the bound by {worst:.3e}"
        )
    c_min = L + abs(float(q[x0]))
    if C is None:
        C = c_min
    elif C < c_min - tol:
        raise CoarseError(f"C={C} is below the required L + |q(x0)| = {c_min}")
    p0 = tuple(snap_up(float(d[x0, i]), cyl.step) for i in range(len(cyl.base)))
    new_cyl = CylinderNet(base=cyl.base, profile=p0, step=cyl.step)

    def func(i: int, t) -> np.ndarray:
        tf = float(t)
        if tf <= 1.0:
            s = (C + 1.0) * tf
        else:
            s = C + 1.0 + L * (tf - 1.0)
        sf = Fraction(s)
        top = cyl.top(i)
        if sf > top:
            sf = top
        return h.func(i, sf)

    return CylinderMap(cylinder=new_cyl, func=func), float(C)
