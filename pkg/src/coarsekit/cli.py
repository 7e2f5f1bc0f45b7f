"""Command-line interface.

Each scenario writes a JSON report (schema 1), a CSV copy, and one or more
PNG figures into the output directory, prints one PASS/FAIL line per
assertion, and exits 0 exactly when everything passed.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import approx as apx
from . import coarse as co
from . import cone as cn
from . import geom, io, maps, shapes, subdivide as sub, viz
from . import radialize as rad
from .report import Report

DEFAULT_RADII = (1.0, 2.0, 4.0, 8.0)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_or_default(path: str | None, default) -> geom.GeoComplex:
    if path is None:
        return default()
    return io.load_complex(path)


def _parse_radii(text: str) -> list[float]:
    try:
        radii = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise SystemExit(f"bad --radii value: {exc}")
    if any(b <= a for a, b in zip(radii, radii[1:])) or not radii:
        raise SystemExit("--radii must be a strictly increasing comma list")
    return radii


def _finish(report: Report, out: Path, name: str) -> int:
    report.write_json(out / f"{name}.json")
    report.write_csv(out / f"{name}.csv")
    for line in report.summary_lines():
        print(line)
    print(f"report: {out / (name + '.json')}")
    return 0 if report.all_passed else 1


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------


def run_subdivide(args) -> int:
    out = _outdir(args)
    c = _load_or_default(args.input, shapes.right_triangle)
    report = Report(scenario="subdivide")
    current = c
    for _ in range(args.iterations):
        current = sub.standard_subdivision(current)
    problems = geom.validate(current)
    report.add(
        "valid", "subdivided complex passes structural validation",
        "definition", len(problems), 0, len(problems) == 0,
    )
    tops = sorted(c.top_simplices)
    pure_dim = {len(s) for s in tops}
    if len(pure_dim) == 1:
        n = pure_dim.pop() - 1
        expect = len(tops) * (2 ** (n * args.iterations))
        got = len(current.top_simplices)
        report.add(
            "cells", f"top cell count after {args.iterations} rounds",
            "oracle", got, expect, got == expect,
        )
        conserved = _volume_conserved(c, args.iterations)
        report.add(
            "volume", "children of each cell have volume ratios summing to 1",
            "oracle", "exact" if conserved else "broken", "exact", conserved,
        )
    report.extras["vertices"] = len(current.vertices)
    report.extras["top_cells"] = len(current.top_simplices)
    io.save_complex(current, out / "subdivided.json")
    if current.ambient_dim <= 3:
        viz.plot_complex(current, out / "subdivided.png", title="subdivided complex")
    return _finish(report, out, "report")


def _volume_conserved(c: geom.GeoComplex, iterations: int) -> bool:
    current = c
    for _ in range(iterations):
        nxt, carriers = sub.standard_subdivision_detailed(current)
        for parent, children in carriers.items():
            pv = geom.volume_sq(parent, current)
            if pv == 0:
                continue
            total = Fraction(0)
            for child in children:
                ratio = geom.volume_sq(child, nxt) / pv
                root = geom.frac_sqrt(ratio)
                if root is None:
                    return False
                total += root
            if total != 1:
                return False
        current = nxt
    return True


def run_cone(args) -> int:
    out = _outdir(args)
    base = shapes.triangle_boundary() if args.base == "triangle" else shapes.unit_segment()
    t = cn.build_cone_triangulation(base, args.height)
    stats = cn.edge_statistics(t)
    report = Report(scenario="cone")
    report.add(
        "min-edge", "shortest edge is bounded away from zero",
        "stated-bound", stats.min_edge, "> 0", stats.min_edge > 0,
    )
    report.add(
        "max-edge", "longest edge is finite",
        "stated-bound", stats.max_edge, "< inf", np.isfinite(stats.max_edge),
    )
    report.add(
        "classes", "cross-section similarity classes form a finite pool",
        "stated-bound", stats.cross_class_count, "finite", stats.cross_class_count > 0,
    )
    report.extras = stats.as_dict()
    report.extras["vertices"] = len(t.vertices)
    report.extras["top_cells"] = len(t.top_simplices)
    io.save_complex(t, out / "cone.json")
    if t.ambient_dim <= 3:
        io.save_off(t, out / "cone.off")
        viz.plot_complex(t, out / "cone.png", title=f"cone triangulation K={args.height}")
    return _finish(report, out, "report")


def _random_entourage(net, rng, max_pairs=25):
    n = len(net)
    k = int(rng.integers(1, max_pairs + 1))
    pairs = {(int(rng.integers(0, n)), int(rng.integers(0, n))) for _ in range(k)}
    return co.entourage(net, pairs)


def run_coarse_zcheck(args) -> int:
    out = _outdir(args)
    rng = np.random.default_rng(args.seed)
    report = Report(scenario="coarse-z-check", seed=args.seed)
    cases = 50
    idempotent = 0
    oracle_ok = 0
    for _ in range(cases):
        size = int(rng.integers(4, 41))
        vals = sorted(rng.choice(200, size=size, replace=False).tolist())
        net = co.grid_net(vals)
        m = _random_entourage(net, rng)
        z1 = co.z_operator(m)
        z2 = co.z_operator(z1)
        if z1.pairs == z2.pairs:
            idempotent += 1
        grid = net.grid
        expected = set()
        for a, b in m.pairs:
            if grid[a] <= grid[b]:
                members = [i for i in range(size) if grid[a] <= grid[i] <= grid[b]]
                expected.update((u, v) for u in members for v in members)
        if z1.pairs == frozenset(expected):
            oracle_ok += 1
    report.add(
        "z-idempotent", f"Z(Z(M)) = Z(M) on {cases} random grids",
        "stated-bound", idempotent, cases, idempotent == cases,
    )
    report.add(
        "z-oracle", "Z matches the brute-force sandwich enumeration",
        "oracle", oracle_ok, cases, oracle_ok == cases,
    )
    return _finish(report, out, "report")


def run_coarse_profile(args) -> int:
    out = _outdir(args)
    radii = _parse_radii(args.radii)
    if args.map != "spiral":
        raise SystemExit(f"unknown --map {args.map!r} (available: spiral)")
    values = list(range(0, 121))
    net = co.grid_net(values)
    images = maps.spiral_ray([float(v) for v in values])
    f = co.SampledMap(source=net, images=images)
    profile = co.control_profile(f, radii)
    proper = co.properness_profile(f, radii)
    report = Report(scenario="coarse-profile")
    report.add(
        "monotone", "control staircase is non-decreasing",
        "definition", "ok" if profile.is_monotone() else "violated", "monotone",
        profile.is_monotone(),
    )
    finite = all(np.isfinite(v) for v in profile.values)
    report.add(
        "finite", "control values are finite at every radius",
        "definition", max(profile.values), "< inf", finite,
    )
    fit = profile.linear_fit()
    report.add(
        "linear-fit", "smallest c with S(R) <= c R + c on the sampled radii",
        "oracle", round(fit, 6), "reported", True,
    )
    report.extras = {
        "radii": list(profile.radii),
        "S": [round(v, 9) for v in profile.values],
        "flags": [],
        "properness": [round(v, 9) for v in proper.values],
    }
    viz.plot_staircase(profile.radii, profile.values, out / "control.png",
                       title="spiral control profile")
    viz.plot_points(images, out / "spiral.png", title="spiral ray sample")
    return _finish(report, out, "report")


def _radialize_sample(args, rng) -> tuple[rad.ConeMap, rad.ConeSample]:
    squares = [k * k for k in range(1, int(np.sqrt(args.height)) + 1)]
    s = rng.random(args.samples)
    bases = maps.triangle_loop(s)
    heights = np.array([squares[i % len(squares)] for i in range(args.samples)], dtype=float)
    sample = rad.make_sample(bases, heights)
    if args.map == "spiral":
        return maps.spiral_cone_map(), sample
    if args.map.startswith("seeded"):
        seed = int(args.map.split(":", 1)[1]) if ":" in args.map else args.seed
        return maps.seeded_cone_map(seed), sample
    raise SystemExit(f"unknown --map {args.map!r} (available: spiral, seeded[:N])")


def run_radialize(args) -> int:
    out = _outdir(args)
    rng = np.random.default_rng(args.seed)
    f, sample = _radialize_sample(args, rng)
    bundle = rad.radialization_bundle(f, sample)
    report = Report(scenario="radialize", seed=args.seed)
    for key, value in bundle.residuals.items():
        report.add(
            f"endpoint-{key}", f"endpoint identity {key} residual",
            "stated-bound", float(value), args.tol, value <= args.tol,
        )
    gsr = rad.g_slice_report(f, sample, n=20_000, rng=rng)
    report.add(
        "g-slice", "scaling homotopy time-slice ratio against 2 L^2",
        "stated-bound", round(gsr.max_ratio, 6), round(gsr.bound, 6), gsr.passed,
    )
    check = rad.slice_lipschitz_check(
        bundle.g_homotopy,
        C=max(
            1e-9,
            _premeasure_slice_constant(bundle.g_homotopy),
        ) * (1 + 1e-9),
    )
    report.add(
        "slice-criterion", "global constant within twice the slice constant",
        "stated-bound", round(check.global_max, 6), round(check.bound, 6), check.passed,
    )
    report.extras = {
        "lip": bundle.stats.lip,
        "constant": bundle.stats.constant,
        "height_scale": bundle.height_scale,
        "profile_max": float(bundle.profile.max()),
    }
    viz.plot_residuals(
        list(bundle.residuals.keys()),
        [max(v, 1e-18) for v in bundle.residuals.values()],
        out / "residuals.png",
        bound=args.tol,
        title=f"endpoint residuals ({f.name})",
    )
    return _finish(report, out, "report")


def _premeasure_slice_constant(hs: rad.HomotopySample) -> float:
    probe = rad.slice_lipschitz_check(hs, C=np.inf)
    return max(probe.slice_max, probe.line_max)


def run_approx(args) -> int:
    out = _outdir(args)
    codomain = cn.build_cone_triangulation(shapes.triangle_boundary(), args.height)
    domain = sub.iterate_subdivision(codomain, args.refine)
    phi = maps.spiral_cone_map(args.twist)
    assignment, f = apx.simplicial_approximation(
        domain, codomain, phi, density=args.density
    )
    report = Report(scenario="approx", seed=args.seed)
    report.add(
        "simplicial", "vertex images span codomain simplices",
        "definition", "yes" if assignment.simplicial else "no", "yes",
        assignment.simplicial,
    )
    report.add(
        "distance", "sup |f - phi| within the largest codomain cell diameter",
        "stated-bound", round(assignment.sup_difference, 6),
        round(assignment.codomain_max_diameter, 6), assignment.within_bound,
    )
    rng = np.random.default_rng(args.seed)
    n_pts = min(600, len(domain.vertices))
    pick = rng.choice(len(domain.vertices), size=n_pts, replace=False)
    pts = domain.coords[pick]
    phi_vals = phi(pts)
    f_vals = f(pts)
    hom = apx.straight_line_homotopy(codomain, pts, phi_vals, f_vals)
    cert = apx.homotopy_certificate(hom, assignment.codomain_max_diameter, rng=rng)
    report.add(
        "homotopy", "straight-line homotopy constant within K + D",
        "stated-bound", round(cert.lipschitz, 6), round(cert.bound, 6),
        cert.passed,
    )
    report.extras = {
        "domain_cells": len(domain.top_simplices),
        "codomain_cells": len(codomain.top_simplices),
        "assignment_changed": int((assignment.mapping != np.arange(len(domain.vertices))).sum()),
        "lipschitz": assignment.lipschitz,
    }
    viz.plot_complex(domain, out / "domain.png", title="approximation domain")
    return _finish(report, out, "report")


def run_demo(args) -> int:
    out = _outdir(args)
    codes = []
    for name, runner, kwargs in [
        ("profile", run_coarse_profile,
         dict(radii="1,2,4,8", map="spiral", out=str(out / "profile"))),
        ("radialize", run_radialize,
         dict(map="spiral", height=64, samples=300, seed=args.seed,
              tol=1e-9, out=str(out / "radialize"))),
        ("cone", run_cone, dict(base="triangle", height=16, out=str(out / "cone"))),
    ]:
        print(f"--- demo step: {name} ---")
        codes.append(runner(argparse.Namespace(**kwargs)))
    return max(codes)


def run_export(args) -> int:
    c = io.load_complex(args.input)
    if args.format == "json":
        io.save_complex(c, args.out)
    elif args.format == "off":
        io.save_off(c, args.out)
    else:
        raise SystemExit(f"unknown format {args.format!r}")
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="coarsekit",
        description="subdivisions, cone triangulations, entourages and "
        "radialization experiments with file reports",
    )
    subs = p.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("subdivide", help="iterate the midpoint subdivision")
    sp.add_argument("--input", help="complex JSON (default: unit right triangle)")
    sp.add_argument("--iterations", type=int, default=1)
    sp.add_argument("--out", default="out/subdivide")
    sp.set_defaults(func=run_subdivide)

    cp = subs.add_parser("cone", help="triangulate a cone and report edge stats")
    cp.add_argument("--base", choices=["triangle", "segment"], default="triangle")
    cp.add_argument("--height", type=int, default=16)
    cp.add_argument("--out", default="out/cone")
    cp.set_defaults(func=run_cone)

    gp = subs.add_parser("coarse", help="entourage and profile scenarios")
    gsubs = gp.add_subparsers(dest="subcommand", required=True)
    zp = gsubs.add_parser("z-check", help="interval hull idempotence on random grids")
    zp.add_argument("--seed", type=int, default=0)
    zp.add_argument("--out", default="out/z-check")
    zp.set_defaults(func=run_coarse_zcheck)
    pp = gsubs.add_parser("profile", help="control/properness staircases")
    pp.add_argument("--map", default="spiral")
    pp.add_argument("--radii", default="1,2,4,8")
    pp.add_argument("--out", default="out/profile")
    pp.set_defaults(func=run_coarse_profile)

    rp = subs.add_parser("radialize", help="three-stage radialization scenarios")
    rsubs = rp.add_subparsers(dest="subcommand", required=True)
    rr = rsubs.add_parser("run", help="evaluate stages, homotopies and bounds")
    rr.add_argument("--map", default="spiral", help="spiral or seeded[:N]")
    rr.add_argument("--height", type=int, default=64)
    rr.add_argument("--samples", type=int, default=400)
    rr.add_argument("--seed", type=int, default=0)
    rr.add_argument("--tol", type=float, default=1e-9)
    rr.add_argument("--out", default="out/radialize")
    rr.set_defaults(func=run_radialize)

    ap = subs.add_parser("approx", help="simplicial approximation scenarios")
    asubs = ap.add_subparsers(dest="subcommand", required=True)
    ar = asubs.add_parser("run", help="approximate the spiral map on a cone")
    ar.add_argument("--height", type=int, default=8)
    ar.add_argument("--twist", type=float, default=0.1)
    ar.add_argument("--density", type=int, default=3)
    ar.add_argument("--refine", type=int, default=2)
    ar.add_argument("--seed", type=int, default=0)
    ar.add_argument("--out", default="out/approx")
    ar.set_defaults(func=run_approx)

    dp = subs.add_parser("demo", help="bundled demonstration scenarios")
    dsubs = dp.add_subparsers(dest="subcommand", required=True)
    ds = dsubs.add_parser("spiral", help="profile + radialize + cone in one run")
    ds.add_argument("--seed", type=int, default=0)
    ds.add_argument("--out", default="out/demo")
    ds.set_defaults(func=run_demo)

    ep = subs.add_parser("export", help="convert a complex file")
    ep.add_argument("--input", required=True)
    ep.add_argument("--format", choices=["json", "off"], required=True)
    ep.add_argument("--out", required=True)
    ep.set_defaults(func=run_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (geom.GeomError, co.CoarseError, apx.ApproxError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
