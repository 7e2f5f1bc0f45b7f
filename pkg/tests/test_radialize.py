from fractions import Fraction as F

import numpy as np
import pytest

from coarsekit.coarse import CoarseError
from coarsekit.maps import (
    bump_base_map,
    cube_boundary_bases,
    seeded_cone_map,
    spiral_cone_map,
    triangle_loop,
)
from coarsekit.radialize import (
    ConeMap,
    ConeSample,
    basepoint_ray_residual,
    cone_metric_estimate,
    cube_concat,
    dance_rho,
    g_slice_report,
    homotopy_G,
    join_cone,
    make_sample,
    measure_cone_map,
    metric_estimate_batch,
    pad_basepoint,
    psi_map,
    radial_residual,
    radialization_bundle,
    slice_lipschitz_check,
    split_cone,
    stage_maps,
    to_cylinder_map,
    unit_level,
)

SQUARE_HEIGHTS = np.array([1.0, 4.0, 9.0, 16.0, 25.0])


def loop_sample(n, rng, heights=SQUARE_HEIGHTS):
    bases = triangle_loop(rng.random(n))
    hs = rng.choice(heights, size=n)
    return make_sample(bases, hs)


def radial_from_base(base_map, name="radial"):
    def func(pts):
        z, h = split_cone(pts)
        img = np.atleast_2d(np.asarray(base_map(z / h[:, None]), dtype=float))
        return join_cone(img * h[:, None], h)

    return ConeMap(func, name=name)


# ---------------------------------------------------------------------------
# stages and endpoint chain
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "mapper",
    [spiral_cone_map(0.25), seeded_cone_map(3), seeded_cone_map(12)],
    ids=["spiral", "seeded3", "seeded12"],
)
def test_endpoint_residuals_vanish(mapper):
    rng = np.random.default_rng(2)
    sample = loop_sample(200, rng)
    bundle = radialization_bundle(mapper, sample)
    for key, val in bundle.residuals.items():
        assert val <= 1e-9, (key, val)


def test_stage_values_explicit():
    f = spiral_cone_map(0.3)
    g, u, v = stage_maps(f)
    rng = np.random.default_rng(4)
    sample = loop_sample(50, rng)
    pts = sample.points
    z, h = split_cone(pts)
    r = np.sqrt(h)
    np.testing.assert_allclose(g(pts), f(join_cone(z * (r / h)[:, None], r)))
    np.testing.assert_allclose(u(pts), r[:, None] * unit_level(f, sample.bases))
    np.testing.assert_allclose(v(pts), h[:, None] * unit_level(f, sample.bases))
    # the final stage is radial by construction
    assert radial_residual(v, sample) <= 1e-12


def test_stages_reject_heights_below_one():
    g, u, v = stage_maps(spiral_cone_map())
    low = np.array([[0.1, 0.0, 0.5]])
    for stage in (g, u, v):
        with pytest.raises(CoarseError):
            stage(low)


def test_scaling_homotopy_constant_on_radial_maps():
    base = lambda x: x @ np.array([[0.3, -0.1], [0.2, 0.5]])
    f = radial_from_base(base)
    rng = np.random.default_rng(8)
    sample = loop_sample(40, rng)
    hg = homotopy_G(f, sample)
    ref = hg.start()
    for frac in (0.25, 0.5, 0.75, 1.0):
        np.testing.assert_allclose(hg.at_fraction(frac), ref, atol=1e-10)


# ---------------------------------------------------------------------------
# slice estimates
# ---------------------------------------------------------------------------


def test_g_slice_bound_holds():
    rng = np.random.default_rng(11)
    sample = loop_sample(300, rng)
    for f in (spiral_cone_map(0.25), seeded_cone_map(3)):
        rep = g_slice_report(f, sample, n=20_000, rng=rng)
        assert rep.passed
        assert rep.max_ratio <= rep.bound * (1 + 1e-6)
        assert rep.n_triples > 10_000


def test_slice_check_doubling_bound():
    rng = np.random.default_rng(13)
    sample = loop_sample(60, rng)
    f = spiral_cone_map(0.25)
    bundle = radialization_bundle(f, sample)
    for hs in (bundle.f_homotopy, bundle.g_homotopy, bundle.h_homotopy):
        probe = slice_lipschitz_check(hs, C=np.inf)
        c = max(probe.slice_max, probe.line_max)
        chk = slice_lipschitz_check(hs, C=c)
        assert chk.passed
        assert chk.global_max <= 2.0 * c * (1 + 1e-6)


def test_slice_check_raises_on_tight_c():
    rng = np.random.default_rng(17)
    sample = loop_sample(40, rng)
    hs = radialization_bundle(spiral_cone_map(0.25), sample).f_homotopy
    probe = slice_lipschitz_check(hs, C=np.inf)
    c = max(probe.slice_max, probe.line_max)
    with pytest.raises(CoarseError):
        slice_lipschitz_check(hs, C=0.5 * c)


# ---------------------------------------------------------------------------
# radial extension of base maps
# ---------------------------------------------------------------------------


def test_psi_map_bound_and_boundary():
    rng = np.random.default_rng(19)
    x0 = np.array([0.25, 0.25])
    base = bump_base_map(x0, np.array([1.0, -0.5]), scale=0.8)

    def shifted(x):
        return x0 + np.atleast_2d(base(x)) - x0  # identity wrapper, stays x0 on boundary

    bases = rng.random((400, 2))
    heights = rng.choice(SQUARE_HEIGHTS, size=400)
    sample = make_sample(bases, heights)
    boundary = cube_boundary_bases(2, 20, rng)
    cone_map, stats = psi_map(shifted, x0, sample, boundary_bases=boundary)
    assert stats.passed
    assert stats.cone_lip <= stats.bound * (1 + 1e-6)
    assert stats.boundary_residual <= 1e-9
    img = cone_map(sample.points)
    np.testing.assert_allclose(img[:, -1], heights)  # heights preserved


def test_psi_map_rejects_moving_boundary():
    rng = np.random.default_rng(23)
    x0 = np.zeros(2)
    base = lambda x: np.atleast_2d(x)[:, :2] + 1.0  # boundary lands far from x0
    sample = make_sample(rng.random((50, 2)), np.full(50, 4.0))
    with pytest.raises(CoarseError):
        psi_map(base, x0, sample, boundary_bases=cube_boundary_bases(2, 5, rng))


# ---------------------------------------------------------------------------
# metric estimate
# ---------------------------------------------------------------------------


def test_metric_estimate_single_and_batch():
    v = cone_metric_estimate([2.0, 0.0, 2.0], [0.0, 3.0, 3.0], t=1.5, C=1.0)
    assert v.passed and v.factor == 3.0
    rng = np.random.default_rng(29)
    n = 5000
    x = triangle_loop(rng.random(n))
    y = triangle_loop(rng.random(n))
    h = 1.0 + rng.random(n) * 20
    r = 1.0 + rng.random(n) * 20
    pa = join_cone(x * h[:, None], h)
    pb = join_cone(y * r[:, None], r)
    ts = rng.random(n) * np.minimum(h, r)
    c = float(max(np.linalg.norm(x, axis=1).max(), np.linalg.norm(y, axis=1).max()))
    lhs, rhs, ok = metric_estimate_batch(pa, pb, ts, C=c)
    assert ok and (lhs <= rhs * (1 + 1e-9)).all()


def test_metric_estimate_rejects_bad_level_and_base():
    with pytest.raises(CoarseError):
        cone_metric_estimate([1.0, 0.0, 1.0], [1.0, 0.0, 1.0], t=2.0, C=5.0)
    with pytest.raises(CoarseError):
        cone_metric_estimate([9.0, 0.0, 1.0], [0.0, 0.0, 1.0], t=0.5, C=1.0)


# ---------------------------------------------------------------------------
# height schedule of the down-and-up deformation
# ---------------------------------------------------------------------------


def test_dance_rho_profile():
    h = np.array([1.0, 4.0, 9.0, 16.0])
    np.testing.assert_allclose(dance_rho(h, np.zeros(4)), h)
    np.testing.assert_allclose(dance_rho(h, np.full(4, 1.0 / 3.0)), np.sqrt(h))
    np.testing.assert_allclose(dance_rho(h, np.full(4, 0.5)), np.sqrt(h))
    s = np.linspace(0, 0.5, 30)
    vals = dance_rho(np.full_like(s, 9.0), s)
    assert (np.diff(vals) <= 1e-12).all()  # non-increasing on the way down


# ---------------------------------------------------------------------------
# basepoint padding on cube cones
# ---------------------------------------------------------------------------


def padded_fixture(rng):
    x0 = np.array([0.3, 0.4])
    base = bump_base_map(x0, np.array([0.6, 0.2]), scale=0.5)
    f = radial_from_base(base, name="bump")
    bundle = pad_basepoint(f, n=2)
    return f, bundle, x0


def test_pad_rejects_non_radial_lid():
    f = spiral_cone_map(0.25)  # not radial anywhere
    with pytest.raises(CoarseError):
        pad_basepoint(f, n=2)


def test_pad_lid_fixed_at_all_times():
    rng = np.random.default_rng(31)
    f, bundle, _ = padded_fixture(rng)
    m = 40
    lid = np.column_stack([rng.random(m), np.ones(m)])
    h = rng.choice(SQUARE_HEIGHTS, size=m)
    pts = join_cone(lid * h[:, None], h)
    ref = bundle.padded(pts)
    for tau in (0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 1.0):
        np.testing.assert_allclose(bundle.dance(pts, tau), ref, atol=1e-9)
        np.testing.assert_allclose(bundle.squeeze(pts, tau), ref, atol=1e-9)


def test_pad_dance_endpoints_and_continuity():
    rng = np.random.default_rng(37)
    f, bundle, _ = padded_fixture(rng)
    m = 60
    bases = rng.random((m, 2))
    h = rng.choice(SQUARE_HEIGHTS, size=m)
    pts = join_cone(bases * h[:, None], h)
    np.testing.assert_allclose(bundle.dance(pts, 0.0), bundle.padded(pts), atol=1e-9)
    np.testing.assert_allclose(bundle.dance(pts, 1.0), bundle.padded(pts), atol=1e-9)
    eps = 1e-7
    for tau in (1.0 / 3.0, 0.5, 2.0 / 3.0):
        gap = np.abs(
            bundle.dance(pts, tau - eps) - bundle.dance(pts, tau + eps)
        ).max()
        assert gap < 1e-4, (tau, gap)


def test_pad_profile_is_deformation_budget():
    rng = np.random.default_rng(41)
    _, bundle, _ = padded_fixture(rng)
    pts = join_cone(np.array([[0.2, 0.2]]) * 9.0, [9.0])
    np.testing.assert_allclose(bundle.profile(pts), [9.0 - 3.0])


# ---------------------------------------------------------------------------
# gluing cube cone maps
# ---------------------------------------------------------------------------


def test_cube_concat_seam_and_halves():
    rng = np.random.default_rng(43)
    x0 = np.array([0.5, 0.5])
    f = radial_from_base(bump_base_map(x0, np.array([1.0, 0.0]), 0.4), "left")
    g = radial_from_base(bump_base_map(x0, np.array([0.0, 1.0]), 0.4), "right")
    bnd = cube_boundary_bases(2, 10, rng)
    h = np.full(len(bnd), 4.0)
    boundary_pts = join_cone(bnd * h[:, None], h)
    glued = cube_concat(f, g, x0, boundary_pts=boundary_pts)

    hh = np.array([4.0, 9.0])
    seam = join_cone(np.array([[0.5, 0.3], [0.5, 0.7]]) * hh[:, None], hh)
    left_val = f(join_cone(np.array([[1.0, 0.3], [1.0, 0.7]]) * hh[:, None], hh))
    np.testing.assert_allclose(glued(seam), left_val, atol=1e-12)
    # both halves land on the basepoint ray at the seam
    np.testing.assert_allclose(left_val[:, :2], x0 * hh[:, None], atol=1e-12)

    inner = join_cone(np.array([[0.2, 0.6]]) * 4.0, [4.0])
    expect = f(join_cone(np.array([[0.4, 0.6]]) * 4.0, [4.0]))
    np.testing.assert_allclose(glued(inner), expect)
    inner2 = join_cone(np.array([[0.8, 0.6]]) * 4.0, [4.0])
    expect2 = g(join_cone(np.array([[0.6, 0.6]]) * 4.0, [4.0]))
    np.testing.assert_allclose(glued(inner2), expect2)


def test_cube_concat_rejects_bad_boundary():
    rng = np.random.default_rng(47)
    x0 = np.zeros(2)
    f = radial_from_base(bump_base_map(x0, np.array([1.0, 0.0])))
    off = radial_from_base(lambda x: np.atleast_2d(x)[:, :2] + 2.0)
    bnd = cube_boundary_bases(2, 5, rng)
    pts = join_cone(bnd * 4.0, np.full(len(bnd), 4.0))
    with pytest.raises(CoarseError):
        cube_concat(f, off, x0, boundary_pts=pts)


def test_basepoint_ray_residual_zero_on_ray():
    x0 = np.array([0.2, 0.9])
    f = radial_from_base(lambda x: np.tile(x0, (len(np.atleast_2d(x)), 1)))
    pts = join_cone(np.array([[0.7, 0.1], [0.3, 0.3]]) * 4.0, [4.0, 4.0])
    assert basepoint_ray_residual(f, pts, x0) <= 1e-12
    assert basepoint_ray_residual(f, pts, x0 + 1.0) > 0.1


# ---------------------------------------------------------------------------
# wrapping homotopies on grid cylinders
# ---------------------------------------------------------------------------


def test_to_cylinder_map_profile_and_endpoints():
    rng = np.random.default_rng(53)
    sample = loop_sample(8, rng)
    bundle = radialization_bundle(spiral_cone_map(0.25), sample)
    hs = bundle.f_homotopy
    cm = to_cylinder_map(hs)
    prof = cm.cylinder.profile
    for i, d in enumerate(hs.durations):
        assert prof[i] >= d - 1e-12
        assert prof[i] - d < F(1, 4)
        np.testing.assert_allclose(cm(*cm.cylinder.i0(i)), hs.start()[i])
        np.testing.assert_allclose(cm(*cm.cylinder.i1(i)), hs.end()[i])


def test_measure_cone_map_constants():
    rng = np.random.default_rng(59)
    sample = loop_sample(100, rng)
    stats = measure_cone_map(spiral_cone_map(0.25), sample)
    assert stats.constant == max(stats.lip, stats.growth, stats.unit_norm)
    assert stats.lip > 0 and stats.n_pairs > 0
    ident = ConeMap(lambda p: p, name="id")
    s2 = measure_cone_map(ident, sample)
    assert s2.lip == pytest.approx(1.0)
    assert s2.growth == pytest.approx(1.0)
