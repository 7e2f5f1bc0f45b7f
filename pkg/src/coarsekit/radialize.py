"""Deforming cone maps to radial ones, and the cube-level group operations.

A cone point is an ambient row (z, h) with height h > 0 and base point z/h.
A cone map is any vectorized callable on such rows.  This module builds the
three-stage deformation of a cone map f to its radialization
v(hx, h) = h*f(x, 1):

    g(hx, h) = f(sqrt(h) x, sqrt(h))        compress to the sqrt level
    u(hx, h) = sqrt(h) * f(x, 1)            radial map at the sqrt level
    v(hx, h) = h * f(x, 1)                  full radialization

joined by explicit homotopies F (f to g), G (u to g) and H (u to v), all
running over the time interval [0, h - sqrt(h)] pointwise.  It also provides
the slice-Lipschitz criterion, a two-point cone metric estimate, basepoint
padding over cube cones, the concatenation product for cube cone maps, and
the radial-map construction from a Lipschitz base map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .coarse import (
    CoarseError,
    CylinderMap,
    CylinderNet,
    FiniteNet,
    euclidean_net,
    snap_up,
)

__all__ = [
    "ConeMap",
    "split_cone",
    "join_cone",
    "unit_level",
    "ConeSample",
    "make_sample",
    "ConeMapStats",
    "measure_cone_map",
    "radial_residual",
    "stage_maps",
    "HomotopySample",
    "homotopy_F",
    "homotopy_G",
    "homotopy_H",
    "RadializationBundle",
    "radialization_bundle",
    "to_cylinder_map",
    "SliceCheck",
    "slice_lipschitz_check",
    "slice_ratio_samples",
    "GSliceReport",
    "g_slice_report",
    "pair_indices",
    "MetricVerdict",
    "cone_metric_estimate",
    "metric_estimate_batch",
    "PaddedBundle",
    "pad_basepoint",
    "dance_rho",
    "basepoint_ray_residual",
    "cube_concat",
    "PsiStats",
    "psi_map",
]

_EPS = 1e-12


@dataclass
class ConeMap:
    """A vectorized map on ambient cone rows (m, d+1) -> (m, e+1)."""

    func: Callable[[np.ndarray], np.ndarray]
    name: str = "cone-map"

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.atleast_2d(np.asarray(self.func(pts), dtype=float))
        if len(out) != len(pts):
            raise CoarseError(f"{self.name}: image count mismatch")
        return out


def split_cone(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    return pts[:, :-1], pts[:, -1]


def join_cone(z: np.ndarray, h: np.ndarray) -> np.ndarray:
    return np.hstack([np.atleast_2d(z), np.asarray(h, dtype=float)[:, None]])


def unit_level(f: ConeMap, bases: np.ndarray) -> np.ndarray:
    """Evaluate a cone map on the height-1 copies of the given base points."""
    bases = np.atleast_2d(np.asarray(bases, dtype=float))
    return f(join_cone(bases, np.ones(len(bases))))


@dataclass
class ConeSample:
    """A finite sample of a cone: base points and heights, with the ambient
    rows and the per-point deformation time budget h - sqrt(h)."""

    bases: np.ndarray
    heights: np.ndarray

    def __post_init__(self) -> None:
        self.bases = np.atleast_2d(np.asarray(self.bases, dtype=float))
        self.heights = np.asarray(self.heights, dtype=float)
        if len(self.bases) != len(self.heights):
            raise CoarseError("one height per base point required")
        if (self.heights < 1.0 - _EPS).any():
            raise CoarseError("sample heights must be >= 1")

    def __len__(self) -> int:
        return len(self.heights)

    @property
    def points(self) -> np.ndarray:
        cached = getattr(self, "_pts", None)
        if cached is None:
            cached = join_cone(self.bases * self.heights[:, None], self.heights)
            self._pts = cached
        return cached

    @property
    def durations(self) -> np.ndarray:
        return self.heights - np.sqrt(self.heights)

    def net(self) -> FiniteNet:
        cached = getattr(self, "_net", None)
        if cached is None:
            cached = euclidean_net(self.points)
            self._net = cached
        return cached


def make_sample(bases, heights) -> ConeSample:
    return ConeSample(bases=np.asarray(bases), heights=np.asarray(heights))


@dataclass
class ConeMapStats:
    lip: float
    growth: float
    unit_norm: float
    constant: float  # max of the three, used in the slice bounds
    n_pairs: int


def pair_indices(
    m: int, max_pairs: int = 200_000, rng: np.random.Generator | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """All unordered index pairs when that fits in the budget, otherwise a
    seeded random subsample (an rng is then required for determinism)."""
    if m * (m - 1) // 2 <= max_pairs:
        return np.triu_indices(m, k=1)
    if rng is None:
        raise CoarseError("sample too large for exhaustive pairs; pass an rng")
    i = rng.integers(0, m, size=max_pairs)
    j = rng.integers(0, m, size=max_pairs)
    keep = i != j
    return i[keep], j[keep]


def _max_ratio(
    src: np.ndarray, dst: np.ndarray, i: np.ndarray, j: np.ndarray
) -> tuple[float, int]:
    d = np.linalg.norm(src[i] - src[j], axis=1)
    di = np.linalg.norm(dst[i] - dst[j], axis=1)
    mask = d > _EPS
    if not mask.any():
        return 0.0, 0
    return float((di[mask] / d[mask]).max()), int(mask.sum())


def measure_cone_map(
    f: ConeMap,
    sample: ConeSample,
    max_pairs: int = 200_000,
    rng: np.random.Generator | None = None,
) -> ConeMapStats:
    """Measured Lipschitz ratio over sample pairs, growth sup |f(w)|/|w|, and
    the largest unit-level norm sup |(x,1)| over the sampled base points."""
    pts = sample.points
    img = f(pts)
    i, j = pair_indices(len(pts), max_pairs, rng)
    lip, n_pairs = _max_ratio(pts, img, i, j)
    norms = np.linalg.norm(pts, axis=1)
    inorms = np.linalg.norm(img, axis=1)
    growth = float((inorms / np.maximum(norms, _EPS)).max())
    unit = float(np.sqrt((sample.bases**2).sum(axis=1) + 1.0).max())
    return ConeMapStats(
        lip=lip,
        growth=growth,
        unit_norm=unit,
        constant=max(lip, growth, unit),
        n_pairs=n_pairs,
    )


def radial_residual(f: ConeMap, sample: ConeSample) -> float:
    """How far f is from being radial on the sample: the largest relative gap
    between f(hx, h) and h*f(x, 1)."""
    img = f(sample.points)
    radial = unit_level(f, sample.bases) * sample.heights[:, None]
    gap = np.linalg.norm(img - radial, axis=1)
    return float((gap / (1.0 + sample.heights)).max())


def _check_heights(h: np.ndarray, name: str) -> None:
    if (h < 1.0 - _EPS).any():
        raise CoarseError(f"{name}: heights must be >= 1")


def stage_maps(f: ConeMap) -> tuple[ConeMap, ConeMap, ConeMap]:
    """The compressed, lifted-radial and radial stages of a cone map."""

    def g_func(pts: np.ndarray) -> np.ndarray:
        z, h = split_cone(pts)
        _check_heights(h, "stage g")
        r = np.sqrt(h)
        return f(join_cone(z * (r / h)[:, None], r))

    def u_func(pts: np.ndarray) -> np.ndarray:
        z, h = split_cone(pts)
        _check_heights(h, "stage u")
        r = np.sqrt(h)
        return unit_level(f, z / h[:, None]) * r[:, None]

    def v_func(pts: np.ndarray) -> np.ndarray:
        z, h = split_cone(pts)
        _check_heights(h, "stage v")
        return unit_level(f, z / h[:, None]) * h[:, None]

    return (
        ConeMap(g_func, name=f"{f.name}/compressed"),
        ConeMap(u_func, name=f"{f.name}/lifted"),
        ConeMap(v_func, name=f"{f.name}/radial"),
    )


@dataclass
class HomotopySample:
    """A time-parametrized family over a cone sample; the time budget of point
    i is durations[i] = h_i - sqrt(h_i)."""

    sample: ConeSample
    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "homotopy"

    @property
    def durations(self) -> np.ndarray:
        return self.sample.durations

    def at(self, times) -> np.ndarray:
        t = np.broadcast_to(np.asarray(times, dtype=float), (len(self.sample),)).copy()
        dur = self.durations
        if (t < -_EPS).any() or (t > dur + 1e-9).any():
            raise CoarseError(f"{self.name}: time outside [0, h - sqrt(h)]")
        return self.func(self.sample.points, np.minimum(t, dur))

    def at_fraction(self, frac: float) -> np.ndarray:
        return self.func(self.sample.points, float(frac) * self.durations)

    def start(self) -> np.ndarray:
        return self.at_fraction(0.0)

    def end(self) -> np.ndarray:
        return self.at_fraction(1.0)


def homotopy_F(f: ConeMap, sample: ConeSample) -> HomotopySample:
    """Slide down the cone: time t sends (hx, h) to f((h-t)x, h-t), ending at
    the compressed stage when t exhausts the budget."""

    def func(pts: np.ndarray, t: np.ndarray) -> np.ndarray:
        z, h = split_cone(pts)
        s = h - t
        return f(join_cone(z * (s / h)[:, None], s))

    return HomotopySample(sample=sample, func=func, name=f"{f.name}/F")


def homotopy_G(f: ConeMap, sample: ConeSample) -> HomotopySample:
    """Scale between the lifted stage (t=0) and the compressed stage (t=end):
    t sends (hx, h) to (sqrt(h)/a) f(a x, a) with a = t/sqrt(h) + 1."""

    def func(pts: np.ndarray, t: np.ndarray) -> np.ndarray:
        z, h = split_cone(pts)
        r = np.sqrt(h)
        a = t / r + 1.0
        return f(join_cone(z * (a / h)[:, None], a)) * (r / a)[:, None]

    return HomotopySample(sample=sample, func=func, name=f"{f.name}/G")


def homotopy_H(f: ConeMap, sample: ConeSample) -> HomotopySample:
    """Raise the radial stage: t sends (hx, h) to (t + sqrt(h)) f(x, 1),
    running from the lifted stage to the full radialization."""

    def func(pts: np.ndarray, t: np.ndarray) -> np.ndarray:
        z, h = split_cone(pts)
        r = np.sqrt(h)
        return unit_level(f, z / h[:, None]) * (t + r)[:, None]

    return HomotopySample(sample=sample, func=func, name=f"{f.name}/H")


@dataclass
class RadializationBundle:
    source: ConeMap
    sample: ConeSample
    stages: dict[str, np.ndarray]  # images of f, g, u, v on the sample
    f_homotopy: HomotopySample
    g_homotopy: HomotopySample
    h_homotopy: HomotopySample
    stats: ConeMapStats
    height_scale: float  # Lipschitz normalization factor carried along
    residuals: dict[str, float] = field(default_factory=dict)

    @property
    def profile(self) -> np.ndarray:
        return self.sample.durations


def radialization_bundle(
    f: ConeMap,
    sample: ConeSample,
    rng: np.random.Generator | None = None,
) -> RadializationBundle:
    """Evaluate all stages and homotopies of the radialization on a sample and
    record the endpoint residuals.  An rng is needed once the sample is too
    large for exhaustive Lipschitz pairs."""
    g, u, v = stage_maps(f)
    hf, hg, hh = homotopy_F(f, sample), homotopy_G(f, sample), homotopy_H(f, sample)
    pts = sample.points
    stages = {"f": f(pts), "g": g(pts), "u": u(pts), "v": v(pts)}
    stats = measure_cone_map(f, sample, rng=rng)

    def gap(a: np.ndarray, b: np.ndarray) -> float:
        return float(np.linalg.norm(a - b, axis=1).max())

    residuals = {
        "F0=f": gap(hf.start(), stages["f"]),
        "Fend=g": gap(hf.end(), stages["g"]),
        "G0=u": gap(hg.start(), stages["u"]),
        "Gend=g": gap(hg.end(), stages["g"]),
        "H0=u": gap(hh.start(), stages["u"]),
        "Hend=v": gap(hh.end(), stages["v"]),
    }
    return RadializationBundle(
        source=f,
        sample=sample,
        stages=stages,
        f_homotopy=hf,
        g_homotopy=hg,
        h_homotopy=hh,
        stats=stats,
        height_scale=stats.lip,
        residuals=residuals,
    )


def to_cylinder_map(hs: HomotopySample, step: Fraction = Fraction(1, 4)) -> CylinderMap:
    """Wrap a homotopy sample as a map on the grid cylinder whose profile is
    the time budget snapped up to the step grid; motion runs on the natural
    time range and extends constantly to the cylinder top."""
    dur = hs.durations
    profile = tuple(snap_up(d, step) for d in dur)
    cyl = CylinderNet(base=hs.sample.net(), profile=profile, step=step)

    def func(i: int, t: Fraction) -> np.ndarray:
        tn = min(float(t), dur[i])
        times = np.zeros(len(hs.sample))
        times[i] = tn
        return hs.func(hs.sample.points, times)[i]

    return CylinderMap(cylinder=cyl, func=func)


@dataclass
class SliceCheck:
    times: tuple[float, ...]
    slice_max: float
    line_max: float
    global_max: float
    bound: float
    passed: bool
    witness: tuple[int, int] | None


def slice_lipschitz_check(
    hs: HomotopySample,
    C: float,
    n_times: int = 9,
    rel_tol: float = 1e-6,
) -> SliceCheck:
    """If every fixed-time slice and every fixed-point time line is
    C-Lipschitz, the whole family is 2C-Lipschitz for the product metric.
    Measures all three constants on a shared time grid and asserts the
    doubling bound; raises if the slice precondition itself fails."""
    dur = hs.durations
    times = np.linspace(0.0, float(dur.max()), n_times)
    pts = hs.sample.points
    base_d = hs.sample.net().dist_matrix

    frames = []  # (time, active indices, images)
    for t in times:
        active = np.where(dur >= t - _EPS)[0]
        if len(active) == 0:
            continue
        tv = np.zeros(len(dur))
        tv[active] = t
        img = hs.func(pts, np.minimum(tv, dur))[active]
        frames.append((float(t), active, img))

    slice_max = 0.0
    for t, active, img in frames:
        if len(active) < 2:
            continue
        i, j = np.triu_indices(len(active), k=1)
        d = base_d[active[i], active[j]]
        di = np.linalg.norm(img[i] - img[j], axis=1)
        mask = d > _EPS
        if mask.any():
            ratio = float((di[mask] / d[mask]).max())
            if ratio > slice_max:
                slice_max = ratio

    line_max = 0.0
    for (t1, a1, img1), (t2, a2, img2) in zip(frames, frames[1:]):
        if t2 - t1 <= _EPS:
            continue
        common, i1, i2 = np.intersect1d(a1, a2, return_indices=True)
        if len(common) == 0:
            continue
        step_ratio = np.linalg.norm(img2[i2] - img1[i1], axis=1) / (t2 - t1)
        line_max = max(line_max, float(step_ratio.max()))

    worst = max(slice_max, line_max)
    if worst > C * (1.0 + rel_tol):
        raise CoarseError(
            f"slice/line precondition fails: measured {worst:.6g} exceeds C={C:.6g}"
        )

    global_max = 0.0
    witness = None
    flat_pts = []
    flat_img = []
    for t, active, img in frames:
        for row, i in enumerate(active):
            flat_pts.append(np.append(pts[i], t))
            flat_img.append(img[row])
    fp = np.array(flat_pts)
    fi = np.array(flat_img)
    ii, jj = pair_indices(len(fp), max_pairs=500_000, rng=np.random.default_rng(0))
    d = np.linalg.norm(fp[ii] - fp[jj], axis=1)
    di = np.linalg.norm(fi[ii] - fi[jj], axis=1)
    mask = d > _EPS
    if mask.any():
        ratios = di[mask] / d[mask]
        global_max = float(ratios.max())
        src = np.where(mask)[0][int(ratios.argmax())]
        witness = (int(ii[src]), int(jj[src]))
    bound = 2.0 * C
    return SliceCheck(
        times=tuple(float(t) for t, _, _ in frames),
        slice_max=slice_max,
        line_max=line_max,
        global_max=global_max,
        bound=bound,
        passed=global_max <= bound * (1.0 + rel_tol),
        witness=witness,
    )


def slice_ratio_samples(
    hs: HomotopySample, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Ratios |W(x,t) - W(x,s)| / |t - s| for random points and time pairs of
    the same fiber."""
    m = len(hs.sample)
    idx = rng.integers(0, m, size=n)
    dur = hs.durations[idx]
    t = rng.random(n) * dur
    s = rng.random(n) * dur
    keep = np.abs(t - s) > 1e-9
    idx, t, s, dur = idx[keep], t[keep], s[keep], dur[keep]
    pts = hs.sample.points[idx]
    a = hs.func(pts, t)
    b = hs.func(pts, s)
    return np.linalg.norm(a - b, axis=1) / np.abs(t - s)


@dataclass
class GSliceReport:
    max_ratio: float
    constant: float  # L measured on exactly the induced evaluation pairs
    bound: float  # 2 L^2
    n_triples: int
    passed: bool


def g_slice_report(
    f: ConeMap, sample: ConeSample, n: int, rng: np.random.Generator,
    rel_tol: float = 1e-6,
) -> GSliceReport:
    """Check the time-slice estimate of the scaling homotopy on random
    (point, t, s) triples.

    The difference quotient of G at a fixed point is controlled by
    2 L^2 |t - s| where L bounds the Lipschitz ratio of f on the two induced
    evaluation points, the growth |f(w)|/|w| there, and the unit-level norm
    |(x, 1)|; measuring L on those same samples makes the comparison
    self-contained."""
    m = len(sample)
    idx = rng.integers(0, m, size=n)
    dur = sample.durations[idx]
    h = sample.heights[idx]
    x = sample.bases[idx]
    t = rng.random(n) * dur
    s = rng.random(n) * dur
    keep = np.abs(t - s) > 1e-9
    idx, h, x, t, s = idx[keep], h[keep], x[keep], t[keep], s[keep]
    r = np.sqrt(h)
    at = t / r + 1.0
    asl = s / r + 1.0
    pt = join_cone(x * at[:, None], at)
    ps = join_cone(x * asl[:, None], asl)
    ft = f(pt)
    fs = f(ps)
    gt = ft * (r / at)[:, None]
    gs = fs * (r / asl)[:, None]
    ratios = np.linalg.norm(gt - gs, axis=1) / np.abs(t - s)

    pd = np.linalg.norm(pt - ps, axis=1)
    pmask = pd > _EPS
    pair_lip = (
        float((np.linalg.norm(ft - fs, axis=1)[pmask] / pd[pmask]).max())
        if pmask.any()
        else 0.0
    )
    growth = float(
        max(
            (np.linalg.norm(ft, axis=1) / np.linalg.norm(pt, axis=1)).max(),
            (np.linalg.norm(fs, axis=1) / np.linalg.norm(ps, axis=1)).max(),
        )
    )
    unit = float(np.sqrt((x**2).sum(axis=1) + 1.0).max())
    L = max(pair_lip, growth, unit)
    bound = 2.0 * L * L
    max_ratio = float(ratios.max()) if len(ratios) else 0.0
    return GSliceReport(
        max_ratio=max_ratio,
        constant=L,
        bound=bound,
        n_triples=int(len(ratios)),
        passed=max_ratio <= bound * (1.0 + rel_tol),
    )


# ---------------------------------------------------------------------------
# metric estimate
# ---------------------------------------------------------------------------


@dataclass
class MetricVerdict:
    lhs: float
    rhs: float
    factor: float
    passed: bool


def cone_metric_estimate(p, q, t: float, C: float, rel_tol: float = 1e-9) -> MetricVerdict:
    """For cone points p = (hx, h), q = (ry, r) with base norms bounded by C
    and t <= min(h, r): the distance of the level-t copies (tx, t), (ty, t) is
    at most (2 + C) times the ambient distance of p and q."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    h, r = p[-1], q[-1]
    if t > min(h, r) + _EPS:
        raise CoarseError(f"level t={t} exceeds min height {min(h, r)}")
    x = p[:-1] / h
    y = q[:-1] / r
    if max(np.linalg.norm(x), np.linalg.norm(y)) > C + 1e-9:
        raise CoarseError(f"base points exceed the stated bound C={C}")
    lhs = t * float(np.linalg.norm(x - y))
    factor = 2.0 + C
    rhs = factor * float(np.linalg.norm(p - q))
    return MetricVerdict(lhs=lhs, rhs=rhs, factor=factor, passed=lhs <= rhs * (1 + rel_tol))


def metric_estimate_batch(
    pa: np.ndarray, pb: np.ndarray, ts: np.ndarray, C: float
) -> tuple[np.ndarray, np.ndarray, bool]:
    """Vectorized version over rows; returns (lhs, rhs, all_passed)."""
    pa = np.atleast_2d(pa)
    pb = np.atleast_2d(pb)
    ts = np.asarray(ts, dtype=float)
    h = pa[:, -1]
    r = pb[:, -1]
    if (ts > np.minimum(h, r) + _EPS).any():
        raise CoarseError("some levels exceed min height")
    x = pa[:, :-1] / h[:, None]
    y = pb[:, :-1] / r[:, None]
    if max(np.linalg.norm(x, axis=1).max(), np.linalg.norm(y, axis=1).max()) > C + 1e-9:
        raise CoarseError("base points exceed the stated bound")
    lhs = ts * np.linalg.norm(x - y, axis=1)
    rhs = (2.0 + C) * np.linalg.norm(pa - pb, axis=1)
    return lhs, rhs, bool((lhs <= rhs * (1 + 1e-9)).all())


# ---------------------------------------------------------------------------
# basepoint padding over cube cones
# ---------------------------------------------------------------------------


def dance_rho(h: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Height schedule of the down-and-up deformation at normalized time
    s in [0, 1/2]: descend linearly to sqrt(h) during [0, 1/3], then hold.
    The caller mirrors s -> 1 - s for the second half, making the full
    schedule palindromic with rho(h, 0) = h and rho(h, 1/2) = sqrt(h)."""
    h = np.asarray(h, dtype=float)
    s = np.asarray(s, dtype=float)
    root = np.sqrt(h)
    s3 = np.clip(3.0 * s, 0.0, 1.0)
    return h - s3 * (h - root)


def basepoint_ray_residual(f: ConeMap, pts: np.ndarray, x0: np.ndarray) -> float:
    """Largest relative gap between f on the given points and the radial ray
    through the base point x0."""
    pts = np.atleast_2d(pts)
    h = pts[:, -1]
    img = f(pts)
    ray = join_cone(np.tile(np.asarray(x0, dtype=float), (len(pts), 1)) * h[:, None], h)
    gap = np.linalg.norm(img - ray, axis=1)
    return float((gap / (1.0 + h)).max())


@dataclass
class PaddedBundle:
    padded: ConeMap
    squeeze: Callable[[np.ndarray, float], np.ndarray]
    dance: Callable[[np.ndarray, float], np.ndarray]
    lid_residual: float

    def profile(self, pts: np.ndarray) -> np.ndarray:
        h = np.atleast_2d(pts)[:, -1]
        return h - np.sqrt(h)


def pad_basepoint(f: ConeMap, n: int, lid_heights=None, tol: float = 1e-9) -> PaddedBundle:
    """Squeeze a cube cone map into the lower half of the last coordinate and
    extend it constantly above, then deform the result radially while keeping
    the top face pointwise fixed.

    The map must already be radial on the cone over the top face
    x_n = 1 (checked on sampled heights).  The returned ``squeeze`` homotopy
    slides the last base coordinate from x_n to min(2 x_n, 1); the ``dance``
    homotopy lowers heights toward sqrt(h) and back, with amplitude fading
    linearly to zero at the top face so the lid never moves.  Both are
    parametrized by a normalized time in [0, 1]."""
    if n < 1:
        raise CoarseError("cube dimension must be >= 1")
    if lid_heights is None:
        lid_heights = np.array([1.0, 2.0, 4.0, 9.0, 16.0])
    grid = np.linspace(0.0, 1.0, 5)
    mesh = np.stack(np.meshgrid(*([grid] * (n - 1) or [np.array([0.0])]), indexing="ij"), axis=-1).reshape(-1, max(n - 1, 1))
    if n == 1:
        lid_bases = np.ones((1, 1))
    else:
        lid_bases = np.hstack([mesh, np.ones((len(mesh), 1))])
    hh = np.repeat(np.asarray(lid_heights, dtype=float), len(lid_bases))
    bb = np.tile(lid_bases, (len(lid_heights), 1))
    lid_sample = ConeSample(bases=bb, heights=hh)
    lid_res = radial_residual(f, lid_sample)
    if lid_res > tol:
        raise CoarseError(
            f"map is not radial over the top face: residual {lid_res:.3e} > {tol:.1e}"
        )

    def squeezed_base(z: np.ndarray, h: np.ndarray, tau: float) -> np.ndarray:
        x = z / h[:, None]
        xn = x[:, -1]
        target = np.minimum(2.0 * xn, 1.0)
        moved = (1.0 - tau) * xn + tau * target
        out = x.copy()
        out[:, -1] = moved
        return out

    def padded_func(pts: np.ndarray) -> np.ndarray:
        z, h = split_cone(pts)
        x = squeezed_base(z, h, 1.0)
        return f(join_cone(x * h[:, None], h))

    padded = ConeMap(padded_func, name=f"{f.name}/padded")

    def squeeze(pts: np.ndarray, tau: float) -> np.ndarray:
        z, h = split_cone(pts)
        x = squeezed_base(z, h, float(tau))
        return f(join_cone(x * h[:, None], h))

    def dance(pts: np.ndarray, tau: float) -> np.ndarray:
        tau = float(tau)
        if not (0.0 - _EPS <= tau <= 1.0 + _EPS):
            raise CoarseError("normalized dance time must lie in [0, 1]")
        z, h = split_cone(pts)
        _check_heights(h, "dance")
        x = z / h[:, None]
        xn = x[:, -1]
        lower = xn <= 0.5 + _EPS
        out = np.empty((len(pts), padded(pts[:1]).shape[1]))

        if lower.any():
            zl, hl = z[lower], h[lower]
            dur = hl - np.sqrt(hl)
            if tau <= 1.0 / 3.0:
                t = 3.0 * tau * dur
                s = hl - t
                out[lower] = padded(join_cone(zl * (s / hl)[:, None], s))
            elif tau <= 2.0 / 3.0:
                t = (2.0 - 3.0 * tau) * dur
                r = np.sqrt(hl)
                a = t / r + 1.0
                out[lower] = padded(join_cone(zl * (a / hl)[:, None], a)) * (r / a)[:, None]
            else:
                t = (3.0 * tau - 2.0) * dur
                r = np.sqrt(hl)
                out[lower] = unit_level(padded, zl / hl[:, None]) * (t + r)[:, None]

        upper = ~lower
        if upper.any():
            xu = x[upper].copy()
            hu = h[upper]
            amp = np.clip(2.0 - 2.0 * xu[:, -1], 0.0, 1.0)
            xu[:, -1] = 0.5
            seam_unit = unit_level(padded, xu)
            arg = (tau if tau <= 0.5 else 1.0 - tau) * amp
            rho = dance_rho(hu, arg)
            out[upper] = seam_unit * rho[:, None]
        return out

    return PaddedBundle(padded=padded, squeeze=squeeze, dance=dance, lid_residual=lid_res)


# ---------------------------------------------------------------------------
# concatenation product and radial maps from base maps
# ---------------------------------------------------------------------------


def cube_concat(
    f: ConeMap,
    g: ConeMap,
    x0: np.ndarray,
    boundary_pts: np.ndarray | None = None,
    tol: float = 1e-9,
) -> ConeMap:
    """Glue two cube cone maps along the first coordinate: run f on the first
    ambient half z1 <= h/2 (doubling z1) and g on the second half.  Both maps
    must agree with the ray through x0 on the sampled boundary points."""
    x0 = np.asarray(x0, dtype=float)
    if boundary_pts is not None and len(boundary_pts):
        for m in (f, g):
            res = basepoint_ray_residual(m, boundary_pts, x0)
            if res > tol:
                raise CoarseError(
                    f"{m.name}: boundary is off the basepoint ray by {res:.3e}"
                )

    def func(pts: np.ndarray) -> np.ndarray:
        z, h = split_cone(pts)
        first = z[:, 0]
        low = first <= h / 2.0 + _EPS
        out = np.empty((len(pts), f(pts[:1]).shape[1]))
        if low.any():
            zz = z[low].copy()
            zz[:, 0] = 2.0 * zz[:, 0]
            out[low] = f(join_cone(zz, h[low]))
        hi = ~low
        if hi.any():
            zz = z[hi].copy()
            zz[:, 0] = 2.0 * zz[:, 0] - h[hi]
            out[hi] = g(join_cone(zz, h[hi]))
        return out

    return ConeMap(func, name=f"{f.name}*{g.name}")


@dataclass
class PsiStats:
    base_lip: float
    norm_bound: float
    cone_lip: float
    bound: float  # 2 (L+1) (D+1)
    boundary_residual: float
    passed: bool


def psi_map(
    base_map: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    sample: ConeSample,
    boundary_bases: np.ndarray | None = None,
    tol: float = 1e-9,
    max_pairs: int = 200_000,
    rng: np.random.Generator | None = None,
) -> tuple[ConeMap, PsiStats]:
    """Radial extension of a Lipschitz base map with basepoint boundary.

    Returns the cone map (hx, h) -> (h * base_map(x), h) together with the
    measured base Lipschitz constant L, the norm bound D over sampled base and
    image points, the measured cone Lipschitz constant, and the comparison
    against 2 (L+1) (D+1)."""
    x0 = np.asarray(x0, dtype=float)

    def func(pts: np.ndarray) -> np.ndarray:
        z, h = split_cone(pts)
        img = np.atleast_2d(np.asarray(base_map(z / h[:, None]), dtype=float))
        return join_cone(img * h[:, None], h)

    cone_map = ConeMap(func, name="radial")

    bases = sample.bases
    imgs = np.atleast_2d(np.asarray(base_map(bases), dtype=float))
    # base and cone ratios are taken over the same index pairs so the product
    # bound is certified by the very quantities it is compared against
    i, j = pair_indices(len(bases), max_pairs, rng)
    base_lip, _ = _max_ratio(bases, imgs, i, j)
    norm_bound = float(
        max(np.linalg.norm(bases, axis=1).max(), np.linalg.norm(imgs, axis=1).max())
    )
    cone_pts = sample.points
    cone_imgs = cone_map(cone_pts)
    cone_lip, _ = _max_ratio(cone_pts, cone_imgs, i, j)
    bound = 2.0 * (base_lip + 1.0) * (norm_bound + 1.0)

    bres = 0.0
    if boundary_bases is not None and len(boundary_bases):
        bimgs = np.atleast_2d(np.asarray(base_map(np.atleast_2d(boundary_bases)), dtype=float))
        bres = float(np.linalg.norm(bimgs - x0, axis=1).max())
        if bres > tol:
            raise CoarseError(f"boundary points map {bres:.3e} away from the basepoint")

    stats = PsiStats(
        base_lip=base_lip,
        norm_bound=norm_bound,
        cone_lip=cone_lip,
        bound=bound,
        boundary_residual=bres,
        passed=cone_lip <= bound * (1 + 1e-6),
    )
    return cone_map, stats
