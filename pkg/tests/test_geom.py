import math
from fractions import Fraction as F

import numpy as np
import pytest

from coarsekit import geom
from coarsekit.geom import (
    GeomError,
    affine_lipschitz,
    barycentric_exact,
    build_complex,
    diameter,
    frac,
    frac_sqrt,
    point,
    scale_complex,
    similarity_key,
    translate_complex,
    validate,
    volume_sq,
    width,
)
from coarsekit import shapes


def unit_triangle():
    return shapes.right_triangle()


def test_frac_rejects_non_dyadic_floats_roundtrip():
    assert frac(0.75) == F(3, 4)
    assert frac(3) == F(3)
    assert geom.is_dyadic(F(5, 8))
    assert not geom.is_dyadic(F(1, 3))
    num, exp = geom.dyadic_pair(F(5, 8))
    assert (num, exp) == (5, 3)
    assert geom.pair_value(5, 3) == F(5, 8)


def test_width_segment_is_one():
    c = shapes.unit_segment()
    assert width((0, 1), c) == pytest.approx(1.0)


def test_width_unit_right_triangle():
    # distance from the origin to the line x + y = 1
    c = unit_triangle()
    assert width((0, 1, 2), c) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-12)


def test_width_scales_linearly():
    c = unit_triangle()
    doubled = scale_complex(c, 2)
    assert width((0, 1, 2), doubled) == pytest.approx(2 * width((0, 1, 2), c))


def test_width_degenerate_simplex_raises():
    c = build_complex(
        [point(0, 0), point(1, 0), point(2, 0)],
        [(0, 1, 2)],
    )
    with pytest.raises(GeomError):
        width((0, 1, 2), c)


def test_diameter_vertex_zero_and_triangle():
    c = unit_triangle()
    assert diameter((0,), c) == 0.0
    assert diameter((0, 1, 2), c) == pytest.approx(math.sqrt(2.0))


def test_diameter_translation_invariant():
    c = unit_triangle()
    moved = translate_complex(c, (5, -3))
    assert diameter((0, 1, 2), moved) == pytest.approx(diameter((0, 1, 2), c))


def test_width_never_exceeds_diameter_random_simplices():
    rng = np.random.default_rng(11)
    for _ in range(25):
        # random dyadic triangles on the 1/8 grid, skip degenerate draws
        pts = [point(*(F(int(x), 8) for x in rng.integers(-16, 16, size=2)))
               for _ in range(3)]
        if not geom.affinely_independent(pts):
            continue
        c = build_complex(pts, [(0, 1, 2)])
        w = width((0, 1, 2), c)
        d = diameter((0, 1, 2), c)
        assert 0 < w <= d + 1e-12


def test_affine_lipschitz_identity_constant_and_scaling():
    c = unit_triangle()
    coords = [np.array([0.0, 0.0]), np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    assert affine_lipschitz((0, 1, 2), c, coords) == pytest.approx(1.0)
    const = [np.array([2.0, 2.0])] * 3
    assert affine_lipschitz((0, 1, 2), c, const) == pytest.approx(0.0)
    tripled = [3 * p for p in coords]
    assert affine_lipschitz((0, 1, 2), c, tripled) == pytest.approx(3.0)


def test_affine_lipschitz_lower_bound_by_image_spread():
    rng = np.random.default_rng(3)
    c = unit_triangle()
    d = diameter((0, 1, 2), c)
    for _ in range(20):
        images = rng.normal(size=(3, 2))
        lip = affine_lipschitz((0, 1, 2), c, images)
        spread = max(
            np.linalg.norm(images[i] - images[j])
            for i in range(3)
            for j in range(i + 1, 3)
        )
        assert lip >= spread / d - 1e-9


def test_affine_lipschitz_degenerate_raises():
    c = build_complex([point(0, 0), point(1, 0), point(2, 0)], [(0, 1, 2)])
    with pytest.raises(GeomError):
        affine_lipschitz((0, 1, 2), c, np.zeros((3, 2)))


def test_similarity_key_invariant_under_translation_and_scaling():
    c = unit_triangle()
    k0 = similarity_key((0, 1, 2), c)
    assert similarity_key((0, 1, 2), translate_complex(c, (5, 7))) == k0
    assert similarity_key((0, 1, 2), scale_complex(c, F(7, 2))) == k0


def test_similarity_key_detects_point_reflection():
    c = unit_triangle()
    reflected = build_complex(
        [point(1, 1), point(0, 1), point(1, 0)],
        [(0, 1, 2)],
    )
    assert similarity_key((0, 1, 2), c) != similarity_key((0, 1, 2), reflected)


def test_strongly_similar_matches_exhaustive_matching_oracle():
    """Key equality must agree with trying every vertex matching directly."""
    rng = np.random.default_rng(17)
    for _ in range(40):
        a = [point(*(F(int(x), 4) for x in rng.integers(-8, 8, size=2)))
             for _ in range(3)]
        if not geom.affinely_independent(a):
            continue
        if rng.random() < 0.5:
            lam = F(int(rng.integers(1, 5)), int(rng.integers(1, 5)))
            off = [F(int(x), 2) for x in rng.integers(-4, 4, size=2)]
            b = [tuple(lam * x + o for x, o in zip(p, off)) for p in a]
            rng.shuffle(b)
        else:
            b = [point(*(F(int(x), 4) for x in rng.integers(-8, 8, size=2)))
                 for _ in range(3)]
            if not geom.affinely_independent(b):
                continue
        expected = geom.strongly_similar(a, b)
        got = geom.simplex_similarity_key(a) == geom.simplex_similarity_key(b)
        assert got == expected


def test_vertex_simplices_share_one_class():
    c = build_complex([point(0, 0), point(9, -4)], [(0,), (1,)])
    assert similarity_key((0,), c) == similarity_key((1,), c)


def test_validate_accepts_well_formed_triangle():
    assert validate(unit_triangle()) == []


def test_validate_reports_missing_face():
    c = build_complex([point(0, 0), point(1, 0), point(0, 1)], [(0, 1, 2)])
    broken = geom.GeoComplex(
        vertices=c.vertices,
        simplices=frozenset(s for s in c.simplices if s != (0, 1)),
        order=c.order,
    )
    assert any("face" in p for p in validate(broken))


def test_validate_reports_interior_overlap():
    c = build_complex(
        [point(0, 0), point(2, 0), point(0, 2), point(1, 2)],
        [(0, 1, 2), (0, 1, 3)],
    )
    assert any("overlap" in p for p in validate(c))


def test_volume_sq_unit_triangle_and_segment():
    c = unit_triangle()
    assert volume_sq((0, 1, 2), c) == F(1, 4)  # area 1/2
    seg = shapes.unit_segment()
    assert volume_sq((0, 1), seg) == F(1)


def test_frac_sqrt_exact_squares_only():
    assert frac_sqrt(F(9, 4)) == F(3, 2)
    assert frac_sqrt(F(2)) is None
    assert frac_sqrt(F(0)) == F(0)


def test_barycentric_exact_recovers_inside_point():
    c = unit_triangle()
    coords = [c.vertices[i] for i in (0, 1, 2)]
    lam = barycentric_exact(point(F(1, 4), F(1, 4)), coords)
    assert lam == [F(1, 2), F(1, 4), F(1, 4)]
    outside = barycentric_exact(point(2, 2), coords)
    assert outside is not None and any(x < 0 for x in outside)
