"""Standard example complexes used across the CLI and tests."""

from __future__ import annotations

from fractions import Fraction

from .geom import GeoComplex, build_complex

__all__ = [
    "unit_simplex",
    "unit_segment",
    "right_triangle",
    "triangle_boundary",
    "tetrahedron",
]


def unit_simplex(n: int) -> GeoComplex:
    """The n-simplex spanned by the origin and the standard basis vectors."""
    if n < 0:
        raise ValueError("dimension must be nonnegative")
    zero = tuple(Fraction(0) for _ in range(max(n, 1)))
    verts = [zero]
    for i in range(n):
        v = list(zero)
        v[i] = Fraction(1)
        verts.append(tuple(v))
    return build_complex(verts, [tuple(range(n + 1))])


def unit_segment() -> GeoComplex:
    return build_complex([(Fraction(0),), (Fraction(1),)], [(0, 1)])


def right_triangle() -> GeoComplex:
    return unit_simplex(2)


def triangle_boundary() -> GeoComplex:
    """The three edges of the unit right triangle: a piecewise-linear circle."""
    verts = [
        (Fraction(0), Fraction(0)),
        (Fraction(1), Fraction(0)),
        (Fraction(0), Fraction(1)),
    ]
    return build_complex(verts, [(0, 1), (1, 2), (0, 2)])


def tetrahedron() -> GeoComplex:
    return unit_simplex(3)
