"""Simplicial approximation on embedded complexes.

Given a sampled map phi into a triangulated region, build a vertex assignment
v -> w_v certified by open-star containment of sampled star images, realize it
as a piecewise-affine map, and connect it to phi by the straight-line
homotopy.  Also: sampled Lebesgue numbers for the open-star cover, and the
collar "stretch" map used to push homotopies off a face.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .geom import GeoComplex, GeomError, affine_lipschitz
from .cone import PLMap

__all__ = [
    "ApproxError",
    "StarTable",
    "build_star_table",
    "sample_simplex_grid",
    "point_simplex_distance",
    "LebesgueCertificate",
    "star_cover_lebesgue",
    "batch_locate",
    "carrier_sets",
    "VertexAssignment",
    "simplicial_approximation",
    "LineHomotopy",
    "HomotopyCertificate",
    "homotopy_certificate",
    "straight_line_homotopy",
    "StretchPoint",
    "StretchMap",
    "stretch_map",
]

_TOL = 1e-9


class ApproxError(ValueError):
    pass


# ---------------------------------------------------------------------------
# stars
# ---------------------------------------------------------------------------


@dataclass
class StarTable:
    complex: GeoComplex
    closed_star: dict[int, tuple[tuple[int, ...], ...]]
    star_diameter: dict[int, float]

    def max_diameter(self) -> float:
        return max(self.star_diameter.values())


def build_star_table(c: GeoComplex) -> StarTable:
    coords = c.coords
    closed: dict[int, list] = {v: [] for v in range(len(c.vertices))}
    for s in sorted(c.simplices):
        for v in s:
            closed[v].append(s)
    diam: dict[int, float] = {}
    for v, simps in closed.items():
        verts = sorted({w for s in simps for w in s})
        if not verts:
            diam[v] = 0.0
            continue
        pts = coords[verts]
        diff = pts[:, None, :] - pts[None, :, :]
        diam[v] = float(np.sqrt((diff**2).sum(axis=2)).max())
    return StarTable(
        complex=c,
        closed_star={v: tuple(s) for v, s in closed.items()},
        star_diameter=diam,
    )


# ---------------------------------------------------------------------------
# sampling and distances
# ---------------------------------------------------------------------------


def sample_simplex_grid(coords: np.ndarray, density: int) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric grid samples of a simplex: all compositions of the density
    into len(coords) parts.  Returns (points, barycentrics)."""
    k = len(coords)
    if density < 1:
        raise ApproxError("density must be >= 1")
    barys = []
    for comp in itertools.combinations(range(density + k - 1), k - 1):
        parts = []
        prev = -1
        for cpos in comp:
            parts.append(cpos - prev - 1)
            prev = cpos
        parts.append(density + k - 2 - prev)
        barys.append(parts)
    lam = np.array(barys, dtype=float) / density
    return lam @ np.asarray(coords, dtype=float), lam


def point_simplex_distance(y: np.ndarray, coords: np.ndarray) -> float:
    """Euclidean distance from a point to a closed simplex, by projecting
    onto the affine hull of every face and keeping feasible projections."""
    y = np.asarray(y, dtype=float)
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    best = min(float(np.linalg.norm(y - v)) for v in coords)
    k = len(coords)
    for size in range(2, k + 1):
        for face in itertools.combinations(range(k), size):
            pts = coords[list(face)]
            base = pts[0]
            span = pts[1:] - base
            sol, *_ = np.linalg.lstsq(span.T, y - base, rcond=None)
            lam = np.concatenate([[1.0 - sol.sum()], sol])
            if (lam >= -1e-12).all():
                proj = base + sol @ span
                best = min(best, float(np.linalg.norm(y - proj)))
    return best


@dataclass
class LebesgueCertificate:
    value: float
    raw_min: float
    margin: float
    density: int
    n_samples: int


def star_cover_lebesgue(c: GeoComplex, density: int = 24) -> LebesgueCertificate:
    """Certified lower bound for the Lebesgue number of the open-star cover:
    sample a barycentric grid, take the worst best-star clearance, and
    subtract the sampling margin (the radius function is 1-Lipschitz, so the
    bound holds for every point of the complex)."""
    tops = sorted(c.top_simplices)
    if not tops:
        raise ApproxError("complex has no simplices")
    coords = c.coords
    cdiff = coords[:, None, :] - coords[None, :, :]
    if float((cdiff**2).sum(axis=2).max()) <= 0.0:
        raise ApproxError("degenerate complex: zero diameter")

    # maximal simplices avoiding w: tops without w, plus opposite faces in
    # tops containing w
    complement: dict[int, list[np.ndarray]] = {}
    for v in range(len(c.vertices)):
        pieces = []
        for s in tops:
            if v not in s:
                pieces.append(coords[list(s)])
            elif len(s) > 1:
                pieces.append(coords[[w for w in s if w != v]])
        complement[v] = pieces

    worst = np.inf
    margin = 0.0
    n_samples = 0
    for s in tops:
        simplex_coords = coords[list(s)]
        pts, lam = sample_simplex_grid(simplex_coords, density)
        n_samples += len(pts)
        d = len(s) - 1
        diff = simplex_coords[:, None, :] - simplex_coords[None, :, :]
        dia = float(np.sqrt((diff**2).sum(axis=2)).max())
        margin = max(margin, dia * (d + 1) / (2.0 * density))
        for y, l in zip(pts, lam):
            carrier = [s[i] for i in range(len(s)) if l[i] > _TOL]
            r = 0.0
            for w in carrier:
                pieces = complement[w]
                if not pieces:
                    r = np.inf
                    break
                clearance = min(point_simplex_distance(y, p) for p in pieces)
                r = max(r, clearance)
            worst = min(worst, r)
    value = max(float(worst) - margin, 0.0)
    if value <= 0.0:
        raise ApproxError(
            f"sampled Lebesgue bound not positive (raw {worst:.3g}, margin {margin:.3g});"
            " increase the density"
        )
    return LebesgueCertificate(
        value=value, raw_min=float(worst), margin=margin, density=density,
        n_samples=n_samples,
    )


# ---------------------------------------------------------------------------
# batch point location
# ---------------------------------------------------------------------------


def batch_locate(
    c: GeoComplex, points: np.ndarray, tol: float = 1e-7
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Locate many points on an embedded complex at once.

    Returns (top simplex index per point, per-point barycentric coordinates in
    that simplex).  Raises if any point is farther than tol from the complex.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    tops = sorted(c.top_simplices)
    coords = c.coords
    m = len(pts)
    best_res = np.full(m, np.inf)
    best_top = np.full(m, -1, dtype=int)
    best_lam: list[np.ndarray | None] = [None] * m
    for ti, s in enumerate(tops):
        sc = coords[list(s)]
        base = sc[0]
        span = (sc[1:] - base).T  # (d, k)
        pinv = np.linalg.pinv(span)
        rel = pts - base
        sol = rel @ pinv.T  # (m, k)
        recon = sol @ span.T
        res = np.linalg.norm(rel - recon, axis=1)
        lam0 = 1.0 - sol.sum(axis=1)
        feas = (sol >= -tol).all(axis=1) & (lam0 >= -tol)
        better = feas & (res < best_res)
        idx = np.where(better)[0]
        best_res[idx] = res[idx]
        best_top[idx] = ti
        for i in idx:
            best_lam[i] = np.concatenate([[lam0[i]], sol[i]])
    bad = np.where(best_top < 0)[0]
    if len(bad):
        raise ApproxError(
            f"{len(bad)} of {m} points lie off the complex (first index {bad[0]})"
        )
    if float(best_res.max()) > tol * 10 + 1e-12:
        worst = int(best_res.argmax())
        raise ApproxError(
            f"point {worst} lies {best_res[worst]:.3e} off the complex"
        )
    return best_top, [np.asarray(l) for l in best_lam]


def carrier_sets(
    c: GeoComplex, points: np.ndarray, tol: float = 1e-7
) -> list[frozenset[int]]:
    """For each point, the vertices of the simplex containing it in its
    relative interior — equivalently, the vertices whose open stars contain
    the point."""
    tops = sorted(c.top_simplices)
    top_idx, lams = batch_locate(c, points, tol)
    out = []
    for ti, lam in zip(top_idx, lams):
        s = tops[ti]
        out.append(frozenset(s[i] for i in range(len(s)) if lam[i] > 1e-6))
    return out


# ---------------------------------------------------------------------------
# the approximation itself
# ---------------------------------------------------------------------------


@dataclass
class VertexAssignment:
    mapping: np.ndarray  # domain vertex -> codomain vertex
    candidate_counts: np.ndarray
    samples_per_vertex: np.ndarray
    sup_difference: float
    codomain_max_diameter: float
    lipschitz: float
    simplicial: bool  # True iff simplex vertex-images span codomain simplices

    @property
    def within_bound(self) -> bool:
        return self.sup_difference <= self.codomain_max_diameter * (1 + 1e-9)


def simplicial_approximation(
    domain: GeoComplex,
    codomain: GeoComplex,
    phi: Callable[[np.ndarray], np.ndarray],
    density: int = 3,
    tol: float = 1e-7,
) -> tuple[VertexAssignment, PLMap]:
    """Construct a simplicial map close to phi.

    Certifies on a barycentric sample grid that each domain vertex star maps
    into a single codomain open star, picks the codomain vertex closest to the
    vertex image (ties to the lowest index), checks the assignment is
    simplicial, and measures sup |f - phi| over all samples.
    """
    dom_tops = sorted(domain.top_simplices)
    if not dom_tops:
        raise ApproxError("domain has no simplices")
    dcoords = domain.coords
    ccoords = codomain.coords

    all_pts = []
    all_lams = []
    owners = []  # top simplex index per sample
    for ti, s in enumerate(dom_tops):
        pts, lam = sample_simplex_grid(dcoords[list(s)], density)
        all_pts.append(pts)
        all_lams.append(lam)
        owners.append(np.full(len(pts), ti))
    pts = np.vstack(all_pts)
    owners = np.concatenate(owners)
    images = np.atleast_2d(np.asarray(phi(pts), dtype=float))
    carriers = carrier_sets(codomain, images, tol)

    nv = len(domain.vertices)
    candidates: list[set[int] | None] = [None] * nv
    sample_counts = np.zeros(nv, dtype=int)
    k = 0
    for s, lam_block in zip(dom_tops, all_lams):
        for lam_row in lam_block:
            car = carriers[k]
            k += 1
            # a sample belongs to the open star of v only while its
            # barycentric coordinate at v stays positive
            for v, lv in zip(s, lam_row):
                if lv <= 1e-9:
                    continue
                sample_counts[v] += 1
                if candidates[v] is None:
                    candidates[v] = set(car)
                else:
                    candidates[v] &= car

    phi_v = np.atleast_2d(np.asarray(phi(dcoords), dtype=float))
    mapping = np.full(nv, -1, dtype=int)
    cand_counts = np.zeros(nv, dtype=int)
    for v in range(nv):
        cand = candidates[v]
        if cand is None:
            # isolated vertex: fall back to its own image carrier
            cand = set(carrier_sets(codomain, phi_v[v : v + 1], tol)[0])
        if not cand:
            raise ApproxError(
                f"star condition unsatisfiable at domain vertex {v}: no codomain"
                " open star contains the sampled star image"
            )
        cand_counts[v] = len(cand)
        best = min(cand, key=lambda w: (float(np.linalg.norm(ccoords[w] - phi_v[v])), w))
        mapping[v] = best

    cset = {frozenset(s) for s in codomain.simplices}
    simplicial = True
    for s in domain.simplices:
        span = frozenset(int(mapping[v]) for v in s)
        if span not in cset:
            simplicial = False
            break

    f = PLMap(domain=domain, images=ccoords[mapping])
    f_at_samples = np.vstack(
        [lam @ ccoords[mapping[list(s)]] for s, lam in zip(dom_tops, all_lams)]
    )
    sup_diff = float(np.linalg.norm(f_at_samples - images, axis=1).max())

    max_diam = 0.0
    for s in sorted(codomain.top_simplices):
        sc = ccoords[list(s)]
        diff = sc[:, None, :] - sc[None, :, :]
        max_diam = max(max_diam, float(np.sqrt((diff**2).sum(axis=2)).max()))

    lip = 0.0
    for s in dom_tops:
        try:
            lip = max(lip, affine_lipschitz(s, domain, ccoords[mapping[list(s)]]))
        except GeomError:
            pass

    assignment = VertexAssignment(
        mapping=mapping,
        candidate_counts=cand_counts,
        samples_per_vertex=sample_counts,
        sup_difference=sup_diff,
        codomain_max_diameter=max_diam,
        lipschitz=lip,
        simplicial=simplicial,
    )
    return assignment, f


# ---------------------------------------------------------------------------
# straight-line homotopy
# ---------------------------------------------------------------------------


@dataclass
class LineHomotopy:
    points: np.ndarray
    start: np.ndarray
    finish: np.ndarray

    def at(self, t: float) -> np.ndarray:
        t = float(t)
        if not (0.0 <= t <= 1.0):
            raise ApproxError("line homotopy time must lie in [0, 1]")
        return (1.0 - t) * self.start + t * self.finish

    def max_step(self) -> float:
        return float(np.linalg.norm(self.finish - self.start, axis=1).max())

    def measured_lipschitz(
        self,
        times: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0),
        max_pairs: int = 500_000,
        rng: np.random.Generator | None = None,
    ) -> float:
        """Global constant over sampled ((y,t), (y',s)) pairs in the product
        metric."""
        m = len(self.points)
        flat_pts = np.vstack(
            [np.hstack([self.points, np.full((m, 1), t)]) for t in times]
        )
        flat_img = np.vstack([self.at(t) for t in times])
        n = len(flat_pts)
        if n * (n - 1) // 2 <= max_pairs:
            i, j = np.triu_indices(n, k=1)
        else:
            if rng is None:
                rng = np.random.default_rng(0)
            i = rng.integers(0, n, size=max_pairs)
            j = rng.integers(0, n, size=max_pairs)
            keep = i != j
            i, j = i[keep], j[keep]
        d = np.linalg.norm(flat_pts[i] - flat_pts[j], axis=1)
        di = np.linalg.norm(flat_img[i] - flat_img[j], axis=1)
        mask = d > 1e-12
        return float((di[mask] / d[mask]).max()) if mask.any() else 0.0


@dataclass
class HomotopyCertificate:
    """Measured homotopy constant against the bound K + D, with K the larger
    of the two endpoint constants realized on the same pairs and D a bound on
    the pointwise gap between the endpoint maps."""

    lipschitz: float
    endpoint_lipschitz: float
    gap: float
    diameter_bound: float
    passed: bool

    @property
    def bound(self) -> float:
        return self.endpoint_lipschitz + self.diameter_bound


def homotopy_certificate(
    hom: LineHomotopy,
    diameter_bound: float,
    times: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0),
    max_pairs: int = 500_000,
    rng: np.random.Generator | None = None,
) -> HomotopyCertificate:
    """Certify the interpolation constant on a shared pair sample.

    On every pair ((x,t), (y,s)) the difference splits into an endpoint part
    bounded by K d(x,y) and a time part bounded by |t-s| times the pointwise
    gap, so the product-metric constant never exceeds K + D once the gap is
    below D.
    """
    m = len(hom.points)
    flat_pts = np.vstack(
        [np.hstack([hom.points, np.full((m, 1), t)]) for t in times]
    )
    flat_img = np.vstack([hom.at(t) for t in times])
    n = len(flat_pts)
    if n * (n - 1) // 2 <= max_pairs:
        i, j = np.triu_indices(n, k=1)
    else:
        if rng is None:
            rng = np.random.default_rng(0)
        i = rng.integers(0, n, size=max_pairs)
        j = rng.integers(0, n, size=max_pairs)
        keep = i != j
        i, j = i[keep], j[keep]
    d = np.linalg.norm(flat_pts[i] - flat_pts[j], axis=1)
    di = np.linalg.norm(flat_img[i] - flat_img[j], axis=1)
    mask = d > 1e-12
    h_lip = float((di[mask] / d[mask]).max()) if mask.any() else 0.0

    pi, pj = i % m, j % m
    base_d = np.linalg.norm(hom.points[pi] - hom.points[pj], axis=1)
    pmask = base_d > 1e-12
    k = 0.0
    for ends in (hom.start, hom.finish):
        de = np.linalg.norm(ends[pi] - ends[pj], axis=1)
        if pmask.any():
            k = max(k, float((de[pmask] / base_d[pmask]).max()))
    gap = float(np.linalg.norm(hom.start - hom.finish, axis=1).max())
    passed = (
        gap <= diameter_bound * (1 + 1e-6)
        and h_lip <= (k + diameter_bound) * (1 + 1e-6)
    )
    return HomotopyCertificate(
        lipschitz=h_lip,
        endpoint_lipschitz=k,
        gap=gap,
        diameter_bound=diameter_bound,
        passed=passed,
    )


def straight_line_homotopy(
    codomain: GeoComplex,
    points: np.ndarray,
    phi_values: np.ndarray,
    f_values: np.ndarray,
    tol: float = 1e-7,
) -> LineHomotopy:
    """The homotopy (1-t) phi + t f, valid when each pair of values shares a
    codomain simplex (so the segment stays in the complex)."""
    phi_values = np.atleast_2d(phi_values)
    f_values = np.atleast_2d(f_values)
    cars_phi = carrier_sets(codomain, phi_values, tol)
    cars_f = carrier_sets(codomain, f_values, tol)
    tops = [frozenset(s) for s in sorted(codomain.top_simplices)]
    for k, (a, b) in enumerate(zip(cars_phi, cars_f)):
        u = a | b
        if not any(u <= t for t in tops):
            raise ApproxError(
                f"sample {k}: images lie in no common simplex; straight line"
                " would leave the complex"
            )
    return LineHomotopy(
        points=np.atleast_2d(np.asarray(points, dtype=float)),
        start=phi_values,
        finish=f_values,
    )


# ---------------------------------------------------------------------------
# stretch map
# ---------------------------------------------------------------------------


@dataclass
class StretchPoint:
    region: str  # "collar" or "body"
    value: np.ndarray
    layer: float | None  # collar coordinate in [0, 1], None in the body


@dataclass
class StretchMap:
    sigma: tuple[int, ...]
    tau: tuple[int, ...]
    tau_perp: tuple[int, ...]
    func: Callable[[np.ndarray], StretchPoint]
    lipschitz: float

    def __call__(self, point: np.ndarray) -> StretchPoint:
        return self.func(point)


def stretch_map(c: GeoComplex, sigma, tau) -> StretchMap:
    """Piecewise-affine retraction data for a simplex with a chosen face.

    In join coordinates p = (1-s) a + s b (a in the face tau, b in the
    complementary face): the half s <= 1/2 is sent to the collar tau x [0,1]
    via (a, 2s); the half s >= 1/2 is squeezed back onto the whole simplex via
    (2-2s) a + (2s-1) b.  The face tau lands identically on tau x {0}, the
    complementary face stays pointwise fixed, and the two branches agree at
    s = 1/2."""
    sigma = tuple(sigma)
    if sigma not in c.simplices:
        raise ApproxError(f"{sigma} is not a simplex of the complex")
    tau = tuple(tau)
    if not (set(tau) < set(sigma)) or not tau:
        raise ApproxError("tau must be a nonempty proper face of sigma")
    if tuple(sorted(tau, key=sigma.index)) != tau:
        tau = tuple(sorted(tau, key=sigma.index))
    tau_perp = tuple(v for v in sigma if v not in tau)
    coords = c.coords[list(sigma)]
    base = coords[0]
    span = (coords[1:] - base).T
    pinv = np.linalg.pinv(span)
    ti = [sigma.index(v) for v in tau]
    pi = [sigma.index(v) for v in tau_perp]

    def func(point: np.ndarray) -> StretchPoint:
        y = np.asarray(point, dtype=float)
        sol = pinv @ (y - base)
        lam = np.concatenate([[1.0 - sol.sum()], sol])
        if (lam < -1e-9).any():
            raise ApproxError("point lies outside the simplex")
        s = float(lam[pi].sum())
        if s <= 0.5:
            a = lam[ti] / (1.0 - s) @ coords[ti]
            return StretchPoint(region="collar", value=a, layer=2.0 * s)
        b = lam[pi] / s @ coords[pi]
        if s >= 1.0 - 1e-12:
            return StretchPoint(region="body", value=b, layer=None)
        a = lam[ti] / (1.0 - s) @ coords[ti]
        return StretchPoint(
            region="body", value=(2.0 - 2.0 * s) * a + (2.0 * s - 1.0) * b, layer=None
        )

    # measure branch constants on a sample, embedding collar output as
    # (value, layer * diam) so the two coordinates are comparable
    pts, _ = sample_simplex_grid(coords, 8)
    diff = coords[:, None, :] - coords[None, :, :]
    dia = float(np.sqrt((diff**2).sum(axis=2)).max())
    embedded = []
    for y in pts:
        r = func(y)
        tail = [r.layer * dia] if r.region == "collar" else [dia]
        embedded.append(np.concatenate([r.value, tail]))
    emb = np.array(embedded)
    i, j = np.triu_indices(len(pts), k=1)
    d = np.linalg.norm(pts[i] - pts[j], axis=1)
    di = np.linalg.norm(emb[i] - emb[j], axis=1)
    mask = d > 1e-12
    lip = float((di[mask] / d[mask]).max()) if mask.any() else 0.0

    return StretchMap(sigma=sigma, tau=tau, tau_perp=tau_perp, func=func, lipschitz=lip)
