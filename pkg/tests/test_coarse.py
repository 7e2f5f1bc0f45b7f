import math
from fractions import Fraction as F

import numpy as np
import pytest

from coarsekit import coarse as co
from coarsekit.coarse import (
    CoarseError,
    CylinderMap,
    SampledMap,
    bounded_entourage,
    compose,
    concat_homotopies,
    control_profile,
    control_value,
    cylinder,
    entourage,
    excisive_profile,
    flip,
    flip_entourage_check,
    grid_net,
    euclidean_net,
    image_entourage,
    inverse,
    magnitude,
    minus_entourage,
    normalize_homotopy,
    plus_entourage,
    properness_profile,
    symmetrize,
    translates,
    union,
    z_operator,
)


def random_entourage(net, rng, max_pairs=20):
    n = len(net)
    k = int(rng.integers(1, max_pairs + 1))
    pairs = {(int(rng.integers(0, n)), int(rng.integers(0, n))) for _ in range(k)}
    return entourage(net, pairs)


# ---------------------------------------------------------------------------
# entourage algebra
# ---------------------------------------------------------------------------


def test_compose_singleton_chain():
    net = grid_net([0, 1, 2])
    m1 = entourage(net, {(0, 1)})
    m2 = entourage(net, {(1, 2)})
    assert compose(m1, m2).pairs == frozenset({(0, 2)})


def test_diagonal_is_identity_for_compose():
    rng = np.random.default_rng(0)
    net = grid_net(range(10))
    delta = entourage(net, {(i, i) for i in range(10)})
    m = random_entourage(net, rng)
    assert compose(delta, m).pairs == m.pairs
    assert compose(m, delta).pairs == m.pairs


def test_algebra_matches_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(60):
        n = int(rng.integers(3, 15))
        net = grid_net(range(n))
        m1 = random_entourage(net, rng)
        m2 = random_entourage(net, rng)
        oracle = {
            (x, z)
            for (x, y1) in m1.pairs
            for (y2, z) in m2.pairs
            if y1 == y2
        }
        assert compose(m1, m2).pairs == frozenset(oracle)
        assert inverse(m1).pairs == frozenset((b, a) for a, b in m1.pairs)
        assert union(m1, m2).pairs == m1.pairs | m2.pairs


def test_inverse_is_involution_and_symmetrize_symmetric():
    rng = np.random.default_rng(7)
    net = grid_net(range(12))
    m = random_entourage(net, rng)
    assert inverse(inverse(m)).pairs == m.pairs
    s = symmetrize(m)
    assert inverse(s).pairs == s.pairs


def test_union_with_empty_is_identity():
    net = grid_net(range(5))
    m = entourage(net, {(0, 3), (2, 2)})
    empty = entourage(net, set())
    assert union(m, empty).pairs == m.pairs


def test_compose_associative_and_antihomomorphic_inverse():
    rng = np.random.default_rng(9)
    net = grid_net(range(8))
    for _ in range(20):
        m1, m2, m3 = (random_entourage(net, rng, 10) for _ in range(3))
        left = compose(compose(m1, m2), m3).pairs
        right = compose(m1, compose(m2, m3)).pairs
        assert left == right
        assert (
            inverse(compose(m1, m2)).pairs
            == compose(inverse(m2), inverse(m1)).pairs
        )


def test_magnitude_subadditive_under_compose():
    rng = np.random.default_rng(13)
    net = grid_net(sorted(rng.choice(100, size=15, replace=False).tolist()))
    for _ in range(20):
        m1 = random_entourage(net, rng)
        m2 = random_entourage(net, rng)
        c = compose(m1, m2)
        if c.pairs:
            assert magnitude(c) <= magnitude(m1) + magnitude(m2) + 1e-9


def test_mismatched_nets_raise():
    a = grid_net(range(4))
    b = grid_net(range(4))
    with pytest.raises(CoarseError):
        compose(entourage(a, {(0, 1)}), entourage(b, {(1, 2)}))


# ---------------------------------------------------------------------------
# the interval-hull operator Z
# ---------------------------------------------------------------------------


def test_z_single_interval_example():
    net = grid_net(range(6))
    m = entourage(net, {(1, 4)})
    z = z_operator(m)
    inside = {1, 2, 3, 4}
    assert z.pairs == frozenset((u, v) for u in inside for v in inside)


def test_z_of_diagonal_is_diagonal():
    net = grid_net(range(7))
    delta = entourage(net, {(i, i) for i in range(7)})
    assert z_operator(delta).pairs == delta.pairs


def test_z_keeps_overlapping_intervals_separate():
    """Intervals that overlap without nesting must not fuse into one block."""
    net = grid_net(range(4))
    m = entourage(net, {(0, 2), (1, 3)})
    z = z_operator(m)
    assert (0, 3) not in z.pairs
    assert (0, 2) in z.pairs and (1, 3) in z.pairs


def test_z_idempotent_and_matches_sandwich_oracle():
    rng = np.random.default_rng(21)
    for _ in range(80):
        size = int(rng.integers(3, 25))
        vals = sorted(rng.choice(60, size=size, replace=False).tolist())
        net = grid_net(vals)
        m = symmetrize(random_entourage(net, rng))
        z = z_operator(m)
        assert z_operator(z).pairs == z.pairs
        grid = net.grid
        oracle = set()
        for a, b in m.pairs:
            if grid[a] > grid[b]:
                continue
            members = [i for i in range(size) if grid[a] <= grid[i] <= grid[b]]
            oracle.update((u, v) for u in members for v in members)
        assert z.pairs == frozenset(oracle)


def test_z_requires_grid_net():
    net = euclidean_net(np.zeros((3, 2)))
    with pytest.raises(CoarseError):
        z_operator(entourage(net, {(0, 1)}))


# ---------------------------------------------------------------------------
# grid arithmetic on entourages
# ---------------------------------------------------------------------------


def test_plus_zero_is_identity():
    net = grid_net(range(9))
    m = entourage(net, {(1, 3), (2, 2)})
    zero = entourage(net, {(0, 0)})
    res = plus_entourage(m, zero)
    assert res.entourage.pairs == m.pairs and res.clipped == 0


def test_minus_self_contains_diagonal_piece():
    net = grid_net(range(6))
    m = entourage(net, {(2, 4), (1, 1)})
    res = minus_entourage(m, m)
    assert (0, 0) in res.entourage.pairs


def test_grid_ops_match_brute_force():
    rng = np.random.default_rng(30)
    for _ in range(40):
        size = int(rng.integers(4, 12))
        vals = list(range(size))
        net = grid_net(vals)
        m = random_entourage(net, rng, 8)
        n = random_entourage(net, rng, 8)
        g = net.grid

        plus_oracle, plus_clip = set(), 0
        for (u, v) in m.pairs:
            for (x, y) in n.pairs:
                a, b = g[u] + g[x], g[v] + g[y]
                if a in g and b in g:
                    plus_oracle.add((g.index(a), g.index(b)))
                else:
                    plus_clip += 1
        res = plus_entourage(m, n)
        assert res.entourage.pairs == frozenset(plus_oracle)
        assert res.clipped == plus_clip

        minus_oracle = set()
        for (u, v) in m.pairs:
            for (x, y) in n.pairs:
                if g[u] >= g[x] and g[v] >= g[y]:
                    a, b = g[u] - g[x], g[v] - g[y]
                    if a in g and b in g:
                        minus_oracle.add((g.index(a), g.index(b)))
        assert minus_entourage(m, n).entourage.pairs == frozenset(minus_oracle)

        trans_oracle = set()
        for (x, y) in m.pairs:
            for a in g:
                u, v = g[x] + a, g[y] + a
                if u in g and v in g:
                    trans_oracle.add((g.index(u), g.index(v)))
        assert translates(m).entourage.pairs == frozenset(trans_oracle)


def test_plus_magnitude_subadditive_without_clipping():
    net = grid_net(range(40))
    m = entourage(net, {(0, 5), (3, 4)})
    n = entourage(net, {(1, 2), (7, 7)})
    res = plus_entourage(m, n)
    assert res.clipped == 0
    assert magnitude(res.entourage) <= magnitude(m) + magnitude(n) + 1e-12


# ---------------------------------------------------------------------------
# control and properness staircases
# ---------------------------------------------------------------------------


def test_control_identity_below_radius():
    net = grid_net([0, 1, 3, 7])
    f = SampledMap(source=net, images=net.points)
    prof = control_profile(f, [1.0, 2.5, 5.0, 10.0])
    for r, s in zip(prof.radii, prof.values):
        assert s < r or s == 0.0
    assert prof.is_monotone()


def test_control_constant_is_zero():
    net = grid_net(range(10))
    f = SampledMap(source=net, images=np.zeros((10, 2)))
    prof = control_profile(f, [1.0, 4.0, 16.0])
    assert prof.values == (0.0, 0.0, 0.0)


def test_control_requires_increasing_radii():
    net = grid_net(range(4))
    f = SampledMap(source=net, images=net.points)
    with pytest.raises(CoarseError):
        control_profile(f, [2.0, 1.0])


def test_control_of_composition_bounded_by_composition_of_controls():
    rng = np.random.default_rng(41)
    pts = np.sort(rng.random(25)) * 20
    net = euclidean_net(pts[:, None])
    fim = np.column_stack([pts * 1.5, np.sin(pts)])
    f = SampledMap(source=net, images=fim)
    mid = euclidean_net(fim)
    gim = fim @ np.array([[1.0, 0.2], [0.0, 1.0]])
    g = SampledMap(source=mid, images=gim)
    gf = SampledMap(source=net, images=gim)
    for r in (1.0, 2.0, 5.0):
        sf = control_value(f, r)
        bound = control_value(g, sf, closed=True)
        assert control_value(gf, r) <= bound + 1e-9


def test_properness_identity_and_constant():
    net = grid_net(range(12))
    ident = SampledMap(source=net, images=net.points)
    prof = properness_profile(ident, [1.0, 2.0, 4.0])
    for r, v in zip(prof.radii, prof.values):
        assert v <= 2 * r + 1e-12
    const = SampledMap(source=net, images=np.zeros((12, 1)))
    got = properness_profile(const, [1.0])
    assert got.values[0] == pytest.approx(11.0)  # whole net


def test_properness_of_ray_inclusion():
    ts = np.linspace(0.0, 30.0, 61)
    net = euclidean_net(ts[:, None])
    images = np.column_stack([ts, np.zeros_like(ts)])
    f = SampledMap(source=net, images=images)
    prof = properness_profile(f, [2.0, 5.0], center=np.array([0.0, 0.0]))
    for r, v in zip(prof.radii, prof.values):
        assert v <= 2 * r + 1e-12


def test_sum_of_maps_entourage_containment():
    """The pointwise sum maps an entourage into the sum of the images."""
    rng = np.random.default_rng(55)
    src = grid_net(range(8))
    fvals = [int(x) for x in rng.integers(0, 10, size=8)]
    gvals = [int(x) for x in rng.integers(0, 10, size=8)]
    target_vals = sorted(
        {a + b for a in fvals + gvals + [0] for b in fvals + gvals + [0]}
    )
    target = grid_net(target_vals)
    tg = target.grid

    def idx(v):
        return tg.index(F(v))

    m = random_entourage(src, rng, 12)
    f_m = image_entourage(m, [idx(v) for v in fvals], target)
    g_m = image_entourage(m, [idx(v) for v in gvals], target)
    fg_m = image_entourage(m, [idx(a + b) for a, b in zip(fvals, gvals)], target)
    summed = plus_entourage(f_m, g_m)
    assert fg_m.pairs <= summed.entourage.pairs
    assert magnitude(fg_m) <= magnitude(f_m) + magnitude(g_m) + 1e-12


# ---------------------------------------------------------------------------
# cylinders, flips, concatenation
# ---------------------------------------------------------------------------


def test_cylinder_zero_profile_is_unit_grid():
    net = grid_net(range(3))
    cyl = cylinder(net, [F(0)] * 3)
    times = {t for i, t in cyl.points if i == 0}
    assert times == {F(0), F(1, 4), F(1, 2), F(3, 4), F(1)}


def test_cylinder_section_retraction_identities():
    net = grid_net(range(4))
    cyl = cylinder(net, [F(1), F(0), F(2), F(1, 2)])
    for i in range(4):
        assert cyl.q(cyl.i0(i)) == i
        assert cyl.q(cyl.i1(i)) == i
        assert cyl.contains(*cyl.i0(i))
        assert cyl.contains(*cyl.i1(i))


def test_cylinder_rejects_beyond_top():
    net = grid_net(range(2))
    cyl = cylinder(net, [F(1), F(1)])
    assert not cyl.contains(0, F(9, 4))
    h = CylinderMap(cylinder=cyl, func=lambda i, t: np.zeros(1))
    with pytest.raises(CoarseError):
        h(0, F(9, 4))


def test_cylinder_rejects_negative_profile():
    net = grid_net(range(2))
    with pytest.raises(CoarseError):
        cylinder(net, [F(-1), F(0)])


def test_flip_boundary_and_involution():
    net = grid_net(range(5))
    prof = [F(0), F(1), F(2), F(1, 2), F(3, 4)]
    cyl = cylinder(net, prof)
    f = flip(cyl)
    for i in range(5):
        assert f(i, F(0)) == (i, prof[i] + 1)
    for i, t in cyl.points:
        assert f(*f(i, t)) == (i, t)


def test_flip_containment_exhaustive_random():
    rng = np.random.default_rng(77)
    net = grid_net(range(12))
    prof = [F(int(x), 4) for x in rng.integers(0, 12, size=12)]
    cyl = cylinder(net, prof)
    for _ in range(10):
        base = frozenset(
            (int(rng.integers(0, 12)), int(rng.integers(0, 12))) for _ in range(8)
        )
        times = frozenset(
            (F(int(rng.integers(0, 5)), 4), F(int(rng.integers(0, 5)), 4))
            for _ in range(6)
        )
        holds, checked = flip_entourage_check(cyl, base, times)
        assert holds and checked > 0


def test_concat_requires_matching_endpoints():
    net = grid_net(range(3))
    cyl = cylinder(net, [F(1)] * 3)
    h1 = CylinderMap(cylinder=cyl, func=lambda i, t: np.array([float(t)]))
    h2 = CylinderMap(cylinder=cyl, func=lambda i, t: np.array([99.0]))
    with pytest.raises(CoarseError):
        concat_homotopies(h1, h2)


def test_concat_formula_and_endpoints():
    net = grid_net(range(3))
    prof1 = [F(1), F(0), F(2)]
    prof2 = [F(0), F(1), F(1)]
    c1 = cylinder(net, prof1)
    c2 = cylinder(net, prof2)
    h1 = CylinderMap(cylinder=c1, func=lambda i, t: np.array([float(t), float(i)]))

    def h2f(i, t):
        return np.array([float(c1.top(i)), float(i)])  # constant in time

    h2 = CylinderMap(cylinder=c2, func=h2f)
    cat = concat_homotopies(h1, h2)
    assert cat.cylinder.profile == tuple(p1 + p2 + 1 for p1, p2 in zip(prof1, prof2))
    for i in range(3):
        np.testing.assert_allclose(cat.bottom(i), h1.bottom(i))
        np.testing.assert_allclose(cat.top(i), h2.top(i))
        # below the cut the first homotopy runs unchanged
        np.testing.assert_allclose(cat(i, F(1, 2)), h1(i, F(1, 2)))
        # above the cut the second, shifted by p1+1
        cut = c1.top(i)
        np.testing.assert_allclose(cat(i, cut + F(1, 4)), h2(i, F(1, 4)))


def test_split_cylinder_witness_containment():
    """The two-sided witness memberships behind concatenation being coarse.

    With M = (M1 x M2) restricted to the cylinder, M1, M2 symmetric with
    diagonal and M2 interval-closed, every mixed pair ((x,s),(y,t)) with
    s <= p(x), t >= p(y) factors through (y, p(y)) inside
    N = M1 x sym(Z(p[M1]) o M2).
    """
    rng = np.random.default_rng(101)
    size = 7
    net = grid_net(range(size))
    prof = [F(int(x), 4) for x in rng.integers(0, 10, size=size)]
    qrof = [F(int(x), 4) for x in rng.integers(0, 8, size=size)]
    full = cylinder(net, [p + q for p, q in zip(prof, qrof)])

    # time grid shared by cylinder times and profile values
    tmax = max(full.top(i) for i in range(size))
    times = []
    t = F(0)
    while t <= tmax:
        times.append(t)
        t += F(1, 4)
    tnet = grid_net(times)
    tidx = {v: i for i, v in enumerate(tnet.grid)}

    m1 = symmetrize(
        union(
            entourage(net, {(i, i) for i in range(size)}),
            random_entourage(net, rng, 10),
        )
    )
    raw_m2 = symmetrize(
        union(
            entourage(tnet, {(i, i) for i in range(len(times))}),
            random_entourage(tnet, rng, 10),
        )
    )
    m2 = z_operator(raw_m2)

    p_m1 = entourage(
        tnet, {(tidx[prof[a]], tidx[prof[b]]) for a, b in m1.pairs}
    )
    zpm1 = z_operator(p_m1)
    n_time = union(compose(zpm1, m2), compose(m2, zpm1))

    checked = 0
    for (a, b) in m1.pairs:
        for (u, v) in m2.pairs:
            s, t = tnet.grid[u], tnet.grid[v]
            if not (full.contains(a, s) and full.contains(b, t)):
                continue
            if not (s <= prof[a] and t >= prof[b]):
                continue  # only the mixed A x B case
            checked += 1
            pb = tidx[prof[b]]
            assert (a, b) in m1.pairs
            assert (u, pb) in n_time.pairs, (s, t, prof[a], prof[b])
            assert (b, b) in m1.pairs
            assert (pb, v) in n_time.pairs, (s, t, prof[a], prof[b])
    assert checked > 0


# ---------------------------------------------------------------------------
# homotopy normalization
# ---------------------------------------------------------------------------


def make_homotopy(net, prof):
    cyl = cylinder(net, prof)
    return CylinderMap(
        cylinder=cyl, func=lambda i, t: np.array([float(t), float(i)])
    )


def test_normalize_rejects_wild_profile():
    net = grid_net([0, 1])
    h = make_homotopy(net, [F(0), F(100)])
    with pytest.raises(CoarseError):
        normalize_homotopy(h, x0=0, L=1.0)


def test_normalize_rejects_too_small_c():
    net = grid_net([0, 1, 2])
    h = make_homotopy(net, [F(1), F(2), F(3)])
    with pytest.raises(CoarseError):
        normalize_homotopy(h, x0=0, L=2.0, C=0.5)


def test_normalize_preserves_endpoints():
    net = grid_net([0, 1, 2, 5])
    prof = [F(2), F(3), F(4), F(7)]
    h = make_homotopy(net, prof)
    norm, c = normalize_homotopy(h, x0=0, L=1.0)
    assert c == pytest.approx(1.0 + 2.0)
    for i in range(4):
        np.testing.assert_allclose(norm(i, F(0)), h(i, F(0)))
        np.testing.assert_allclose(
            norm(i, norm.cylinder.top(i)), h(i, h.cylinder.top(i))
        )


def test_normalize_time_change_shape():
    # at t <= 1 the clock runs C+1 times faster, then at rate L
    net = grid_net([0, 4])
    prof = [F(1), F(5)]
    h = make_homotopy(net, prof)
    norm, c = normalize_homotopy(h, x0=0, L=1.0)
    # x0 profile value is 1, so C = L + |q(x0)| = 2
    got = norm(1, F(1, 2))
    np.testing.assert_allclose(got, [1.5, 1.0])  # (C+1) * 1/2
    got2 = norm(1, F(2))
    np.testing.assert_allclose(got2, [4.0, 1.0])  # C+1+L*(2-1)


# ---------------------------------------------------------------------------
# excisive decompositions
# ---------------------------------------------------------------------------


def grid_points(n):
    xs, ys = np.meshgrid(np.arange(n), np.arange(n))
    return np.column_stack([xs.ravel(), ys.ravel()]).astype(float)


def half_plane_profile(n, radii):
    pts = grid_points(n)
    net = euclidean_net(pts)
    mid = (n - 1) // 2
    a = [i for i, p in enumerate(pts) if p[1] <= mid]
    b = [i for i, p in enumerate(pts) if p[1] >= mid]
    return excisive_profile(net, a, b, radii)


def test_excisive_trivial_cover_is_zero():
    net = euclidean_net(grid_points(4))
    idx = list(range(len(net)))
    prof = excisive_profile(net, idx, idx, [1.0, 2.0])
    assert prof.values == (0.0, 0.0)


def test_excisive_half_planes_track_radius():
    for n in (9, 17):
        prof = half_plane_profile(n, [1.0, 2.0, 3.0])
        for r, v in zip(prof.radii, prof.values):
            assert v <= r + 1.0 + 1e-9  # within one grid step


def test_excisive_requires_cover():
    net = euclidean_net(grid_points(3))
    with pytest.raises(CoarseError):
        excisive_profile(net, [0, 1], [2, 3], [1.0])


def parallel_rays(n):
    """Two horizontal rays glued only at their left ends."""
    top = [(float(i), 1.0) for i in range(n)]
    bot = [(float(i), 0.0) for i in range(n)]
    pts = np.array([(0.0, 0.5)] + top + bot)
    net = euclidean_net(pts)
    a = [0] + list(range(1, n + 1))
    b = [0] + list(range(n + 1, 2 * n + 1))
    return net, a, b


def test_excisive_parallel_rays_flagged_divergent():
    radii = [1.0]
    net1, a1, b1 = parallel_rays(10)
    net2, a2, b2 = parallel_rays(20)
    small = excisive_profile(net1, a1, b1, radii)
    large = excisive_profile(net2, a2, b2, radii)
    flags = co.divergence_flags(small, large)
    assert flags == (True,)
