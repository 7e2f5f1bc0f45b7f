"""Reading and writing complexes and reports.

Complex JSON keeps vertex coordinates as exact dyadic pairs [numerator,
exponent] meaning num / 2**exp, so a load/save round trip is lossless and the
canonical byte encoding is stable across runs.
"""

from __future__ import annotations

import json
from pathlib import Path

from .geom import GeoComplex, GeomError, build_complex, dyadic_pair, pair_value

__all__ = [
    "complex_to_dict",
    "complex_from_dict",
    "dumps_canonical",
    "save_complex",
    "load_complex",
    "complex_to_off",
    "save_off",
]


def complex_to_dict(c: GeoComplex) -> dict:
    return {
        "ambient_dim": c.ambient_dim,
        "vertices": [[list(dyadic_pair(x)) for x in v] for v in c.vertices],
        "simplices": sorted(list(s) for s in c.simplices),
        "order": sorted(list(p) for p in c.order),
    }


def complex_from_dict(data: dict) -> GeoComplex:
    try:
        vertices = [
            tuple(pair_value(int(num), int(exp)) for num, exp in v)
            for v in data["vertices"]
        ]
        simplices = [tuple(int(i) for i in s) for s in data["simplices"]]
        order = frozenset((int(a), int(b)) for a, b in data["order"])
    except (KeyError, TypeError, ValueError) as exc:
        raise GeomError(f"malformed complex data: {exc}") from exc
    return build_complex(vertices, simplices, order=order)


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def save_complex(c: GeoComplex, path) -> Path:
    path = Path(path)
    path.write_text(dumps_canonical(complex_to_dict(c)))
    return path


def load_complex(path) -> GeoComplex:
    raw = Path(path).read_text()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise GeomError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    return complex_from_dict(data)


def complex_to_off(c: GeoComplex) -> str:
    """OFF mesh text for complexes embedded in up to three dimensions;
    2-simplices become faces, plus bare edges for wireframes."""
    if c.ambient_dim > 3:
        raise GeomError(f"OFF export needs ambient dimension <= 3, got {c.ambient_dim}")
    coords = c.coords
    pad = 3 - c.ambient_dim
    faces = sorted(s for s in c.simplices if len(s) == 3)
    face_set = {frozenset(s) for s in faces}
    edges = sorted(
        s
        for s in c.simplices
        if len(s) == 2 and not any(set(s) <= f for f in face_set)
    )
    lines = ["OFF", f"{len(coords)} {len(faces) + len(edges)} 0"]
    for row in coords:
        vals = list(row) + [0.0] * pad
        lines.append(" ".join(repr(float(v)) for v in vals))
    for s in faces:
        lines.append("3 " + " ".join(str(i) for i in s))
    for s in edges:
        lines.append("2 " + " ".join(str(i) for i in s))
    return "\n".join(lines) + "\n"


def save_off(c: GeoComplex, path) -> Path:
    path = Path(path)
    path.write_text(complex_to_off(c))
    return path
