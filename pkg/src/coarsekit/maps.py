"""Ready-made maps used by the demos, CLI scenarios and tests.

The running example base space is the boundary of the unit right triangle,
a piecewise-linear circle with basepoint at the origin.  Cone maps built here
stay on the cone over that boundary, so they can be fed to the triangulation
and approximation machinery directly.
"""

from __future__ import annotations

import numpy as np

from .radialize import ConeMap, join_cone, split_cone

__all__ = [
    "TRIANGLE_VERTICES",
    "TRIANGLE_PERIMETER",
    "triangle_loop",
    "triangle_param",
    "spiral_ray",
    "spiral_cone_map",
    "seeded_cone_map",
    "seeded_base_map",
    "cube_boundary_bases",
    "bump_base_map",
]

TRIANGLE_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
_EDGE_LENS = np.array([1.0, float(np.sqrt(2.0)), 1.0])
TRIANGLE_PERIMETER = float(_EDGE_LENS.sum())
_EDGE_STARTS = np.array([0.0, 1.0, 1.0 + float(np.sqrt(2.0))])


def triangle_loop(s) -> np.ndarray:
    """Arc-length loop around the triangle boundary: s in [0, 1) starts and
    ends at the origin, passing (1,0) then (0,1)."""
    s = np.atleast_1d(np.asarray(s, dtype=float)) % 1.0
    arc = s * TRIANGLE_PERIMETER
    out = np.empty((len(s), 2))
    for k in range(3):
        a = TRIANGLE_VERTICES[k]
        b = TRIANGLE_VERTICES[(k + 1) % 3]
        lo = _EDGE_STARTS[k]
        sel = (arc >= lo - 1e-12) & (arc <= lo + _EDGE_LENS[k] + 1e-12)
        t = np.clip((arc[sel] - lo) / _EDGE_LENS[k], 0.0, 1.0)
        out[sel] = a + t[:, None] * (b - a)
    return out


def triangle_param(points: np.ndarray) -> np.ndarray:
    """Inverse of the loop: nearest-edge projection to the arc-length
    parameter in [0, 1)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    best_d = np.full(len(pts), np.inf)
    best_s = np.zeros(len(pts))
    for k in range(3):
        a = TRIANGLE_VERTICES[k]
        b = TRIANGLE_VERTICES[(k + 1) % 3]
        ab = b - a
        t = np.clip((pts - a) @ ab / (ab @ ab), 0.0, 1.0)
        proj = a + t[:, None] * ab
        d = np.linalg.norm(pts - proj, axis=1)
        closer = d < best_d
        best_d[closer] = d[closer]
        best_s[closer] = (_EDGE_STARTS[k] + t[closer] * _EDGE_LENS[k]) / TRIANGLE_PERIMETER
    return best_s % 1.0


def spiral_ray(ts) -> np.ndarray:
    """The coarse ray t -> (t cos log(1+t), t sin log(1+t)) in the plane."""
    t = np.atleast_1d(np.asarray(ts, dtype=float))
    ang = np.log1p(t)
    return np.stack([t * np.cos(ang), t * np.sin(ang)], axis=1)


def spiral_cone_map(twist: float = 0.25) -> ConeMap:
    """A cone self-map of the triangle-boundary cone that slides points around
    the loop by twist * log(1+h) at height h: radial plus a slow rotation, so
    it is Lipschitz but not radial."""

    def func(pts: np.ndarray) -> np.ndarray:
        z, h = split_cone(pts)
        s = triangle_param(z / h[:, None])
        s2 = (s + twist * np.log1p(h) / TRIANGLE_PERIMETER) % 1.0
        return join_cone(triangle_loop(s2) * h[:, None], h)

    return ConeMap(func, name=f"spiral({twist})")


def seeded_cone_map(seed: int, wobble: float = 0.2) -> ConeMap:
    """A reproducible Lipschitz cone map into the plane cone: a random affine
    base map composed with a height wobble rho(h) = h (1 + wobble sin log h),
    so values stay at height comparable to h while being non-radial."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, size=(2, 2))
    a /= max(1.0, float(np.linalg.norm(a, 2)))
    b = rng.uniform(0.0, 1.0, size=2)

    def func(pts: np.ndarray) -> np.ndarray:
        z, h = split_cone(pts)
        x = z / h[:, None]
        base = x[:, :2] @ a.T + b if x.shape[1] >= 2 else np.hstack([x, x]) @ a.T + b
        rho = h * (1.0 + wobble * np.sin(np.log(h)))
        return join_cone(base * rho[:, None], rho)

    return ConeMap(func, name=f"seeded({seed})")


def seeded_base_map(seed: int, terms: int = 3):
    """A reproducible smooth base map [0,1]^2 -> R^2 as a short sine series;
    bounded with bounded gradient, for Lipschitz-constant experiments."""
    rng = np.random.default_rng(seed)
    amp = rng.uniform(-0.5, 0.5, size=(terms, 2))
    freq = rng.integers(1, 4, size=(terms, 2)).astype(float)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=terms)

    def func(x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros((len(x), 2))
        for k in range(terms):
            arg = np.pi * (x[:, :2] * freq[k]).sum(axis=1) + phase[k]
            out += amp[k] * np.sin(arg)[:, None]
        return out

    return func


def cube_boundary_bases(n: int, per_face: int, rng: np.random.Generator) -> np.ndarray:
    """Random points on the boundary of the unit n-cube."""
    rows = []
    for axis in range(n):
        for side in (0.0, 1.0):
            pts = rng.random((per_face, n))
            pts[:, axis] = side
            rows.append(pts)
    return np.vstack(rows)


def bump_base_map(x0: np.ndarray, direction: np.ndarray, scale: float = 1.0):
    """A base map on the unit cube that sends the whole boundary to x0 and
    bulges inside along the given direction (a product-of-sines bump)."""
    x0 = np.asarray(x0, dtype=float)
    direction = np.asarray(direction, dtype=float)

    def func(x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        bump = np.prod(np.sin(np.pi * x), axis=1)
        return x0 + scale * bump[:, None] * direction

    return func
