"""Command-line driver: frontier, wulff, classify, enumerate, surface, flow, convexity.

Exit codes: 0 success, 2 validation error, 3 numerical-tolerance failure,
4 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import curves as cm
from . import frontier as fm
from . import reporting as rep
from .errors import CamcError, ResourceCapError, ToleranceError, ValidationError
from .flow import FlowFamily, PolylineShape, dissipation_check, family_at, flow_residual
from .integrand import BUILTIN_KINDS, Integrand, convexity_report
from .surfaces import (classify_surface, energy_of_surface, mesh_frontier_surface,
                       profile_of, rotational_lift, surface_to_rows,
                       surface_verdict_to_json)

FRONTIER_CSV_HEADER = ["theta", "nu_x", "nu_y", "xi_x", "xi_y", "detA"]
CURVE_CSV_HEADER = ["s", "x", "y", "nu_x", "nu_y", "Lambda", "excluded"]
SURFACE_CSV_HEADER = ["i", "j", "theta", "rho", "Lambda", "k1", "k2", "H2", "excluded"]


def load_integrand(spec: str, n: int | None = None) -> Integrand:
    if os.path.exists(spec):
        return Integrand.from_file(spec)
    if spec in BUILTIN_KINDS:
        return Integrand.builtin(spec, n=n if spec == "isotropic" else None)
    raise ValidationError(f"--integrand {spec!r} is neither a file nor one of {BUILTIN_KINDS}")


def _crossings_json(crossings):
    return [{"point": list(map(float, c.point)), "params": list(map(float, c.params)),
             "inner": c.inner, "corner_coincidence": c.corner_coincidence}
            for c in crossings]


def cmd_frontier(args) -> int:
    integrand = load_integrand(args.integrand, n=1)
    if integrand.n != 1:
        integrand = profile_of(integrand)
    out = rep.ensure_dir(args.out)
    fr = fm.sample_frontier(integrand, args.res)
    sing = fm.singular_set(integrand, tol_sing=args.tol or 1e-10)
    crossings = fm.self_intersections(fr, sing)
    rows = [[s.parameter, s.nu[0], s.nu[1], s.xi[0], s.xi[1], s.A] for s in fr]
    rep.write_csv(os.path.join(out, "frontier.csv"), FRONTIER_CSV_HEADER, rows)
    report = {
        "kind": integrand.kind,
        "resolution": args.res,
        "singular": {
            "roots": sing.roots,
            "roots_over_pi": sing.roots / np.pi,
            "images": sing.images,
            "identifications": [list(p) for p in sing.identifications],
            "degenerate": sing.degenerate,
        },
        "crossings": _crossings_json(crossings),
    }
    if len(sing.roots):
        report["theta1_over_pi"] = float(np.min(np.mod(sing.roots, np.pi / 2)) / np.pi)
    inner = [c for c in crossings if c.inner]
    if inner:
        rel = np.mod(np.array([p for c in inner for p in c.params]), np.pi / 2)
        report["rho1_over_pi"] = float(np.min(rel) / np.pi)
        report["rho2_over_pi"] = float(np.max(rel) / np.pi)
        report["alpha"] = float(np.mean([np.linalg.norm(c.point) for c in inner]))
    rep.write_json(os.path.join(out, "singular.json"), report["singular"])
    rep.write_json(os.path.join(out, "crossings.json"), _crossings_json(crossings))
    if args.report:
        rep.write_json(os.path.join(out, "frontier_report.json"), report)
    if args.svg:
        rep.render_frontier_svg(os.path.join(out, "frontier.svg"), fr, sing, crossings)
    return 0


def cmd_wulff(args) -> int:
    integrand = load_integrand(args.integrand, n=1)
    if integrand.n != 1:
        integrand = profile_of(integrand)
    out = rep.ensure_dir(args.out)
    res = fm.wulff_dual_hausdorff(integrand, args.res)
    shape, arcs = res["halfspace"], res["arcs"]
    rep.write_json(os.path.join(out, "wulff.json"), {
        "vertices": shape.vertices,
        "vertex_params": shape.vertex_params,
        "arc_intervals": [list(iv) for iv in arcs.intervals],
        "hausdorff": res["hausdorff"],
    })
    if args.svg:
        rep.render_wulff_svg(os.path.join(out, "wulff.svg"), shape, arcs.polyline(1024))
    gate = args.tol if args.tol is not None else 1e-6
    if res["hausdorff"] > gate:
        raise ToleranceError(
            f"dual Wulff constructions disagree: hausdorff {res['hausdorff']:.3e} > {gate:.3e}")
    return 0


def cmd_classify(args) -> int:
    integrand = load_integrand(args.integrand, n=1)
    if integrand.n != 1:
        integrand = profile_of(integrand)
    out = rep.ensure_dir(args.out)
    if args.arcspec:
        import json
        with open(args.arcspec) as fh:
            spec = cm.ArcSpec.from_json(json.load(fh))
        name = os.path.splitext(os.path.basename(args.arcspec))[0]
    else:
        catalogue = cm.builtin_catalogue(integrand)
        key = args.curve.lower()
        if key not in catalogue:
            raise ValidationError(f"unknown catalogue curve {args.curve!r}; "
                                  f"choose from {sorted(catalogue)}")
        spec = catalogue[key]
        name = key
    curve = cm.stitch(integrand, spec, resolution=args.res)
    verdict = cm.classify(curve, tol_camc=args.tol or cm.TOL_CAMC)
    payload = cm.verdict_to_json(verdict)
    payload["curve"] = name
    payload["self_crossing"] = curve.self_crossing
    payload["energy"] = cm.energy_of_curve(curve)
    rep.write_json(os.path.join(out, f"classify_{name}.json"), payload)
    rep.write_csv(os.path.join(out, f"curve_{name}.csv"), CURVE_CSV_HEADER,
                  cm.curve_to_rows(curve))
    if args.svg:
        rep.render_curve_svg(os.path.join(out, f"curve_{name}.svg"), curve,
                             title=f"{name}: {verdict.status}")
    return 0


def cmd_enumerate(args) -> int:
    integrand = load_integrand(args.integrand, n=1)
    if integrand.n != 1:
        integrand = profile_of(integrand)
    out = rep.ensure_dir(args.out)
    classes = cm.enumerate_closed_camc(integrand, resolution=args.res, cap=args.cap)
    payload = {
        "n_classes": len(classes),
        "classes": [{
            "class_id": c.class_id,
            "n_arcs": len(c.arcs.intervals),
            "n_members": c.n_members,
            "lambda": c.verdict.lam,
            "max_deviation": c.verdict.max_deviation,
            "arcs": [list(iv) for iv in c.arcs.intervals],
        } for c in classes],
    }
    rep.write_json(os.path.join(out, "camc_classes.json"), payload)
    if args.svg:
        rep.render_classes_sheet(os.path.join(out, "camc_classes.svg"), classes)
        for c in classes:
            rep.render_curve_svg(os.path.join(out, f"camc_class_{c.class_id}.svg"),
                                 c.curve, title=f"class {c.class_id}")
    return 0


def cmd_surface(args) -> int:
    integrand = load_integrand(args.integrand, n=2)
    if integrand.n == 1:
        integrand = rotational_lift(integrand)
    profile = profile_of(integrand)
    if args.arcs == "sphere" or (args.arcs == "wulff" and profile.kind == "isotropic"):
        spec = cm.ArcSpec([(-np.pi / 2, np.pi / 2)])
        name = "sphere"
    else:
        catalogue = cm.builtin_catalogue(profile)
        key = args.arcs.lower()
        if key not in catalogue:
            raise ValidationError(f"unknown catalogue curve {args.arcs!r}; "
                                  f"choose from {sorted(catalogue) + ['sphere']}")
        spec = catalogue[key]
        name = key
    out = rep.ensure_dir(args.out)
    ngrid = tuple(int(v) for v in args.grid.split("x"))
    mesh = mesh_frontier_surface(integrand, spec, grid=ngrid)
    verdict = classify_surface(mesh, tol_camc=args.tol or 1e-2)
    payload = surface_verdict_to_json(verdict)
    payload["surface"] = name
    payload["energy"] = energy_of_surface(mesh)
    payload["grid"] = list(ngrid)
    rep.write_json(os.path.join(out, f"surface_{name}.json"), payload)
    rep.write_csv(os.path.join(out, f"surface_{name}.csv"), SURFACE_CSV_HEADER,
                  surface_to_rows(mesh))
    if args.obj:
        rep.write_obj(os.path.join(out, f"surface_{name}.obj"), mesh)
    return 0


def cmd_flow(args) -> int:
    integrand = load_integrand(args.integrand, n=1)
    if integrand.n != 1:
        integrand = profile_of(integrand)
    out = rep.ensure_dir(args.out)
    if args.base == "circle-isotropic":
        integrand = Integrand.builtin("isotropic", n=1)
        t = np.linspace(0, 2 * np.pi, args.res, endpoint=False)
        base = PolylineShape(integrand, np.stack([np.cos(t), np.sin(t)], axis=-1))
    elif args.base == "ellipse-isotropic":
        integrand = Integrand.builtin("isotropic", n=1)
        t = np.linspace(0, 2 * np.pi, args.res, endpoint=False)
        base = PolylineShape(integrand, np.stack([1.5 * np.cos(t), 0.75 * np.sin(t)], axis=-1))
    else:
        catalogue = cm.builtin_catalogue(integrand)
        if args.base.lower() not in catalogue:
            raise ValidationError(f"unknown flow base {args.base!r}")
        base = cm.stitch(integrand, catalogue[args.base.lower()], resolution=args.res)
    family = FlowFamily(base=base, c=args.c)
    snap = family_at(family, args.t)
    r1 = flow_residual(family, args.t, args.dt)
    r2 = flow_residual(family, args.t, args.dt / 2.0)
    payload = {
        "t": args.t, "dt": args.dt, "scale": snap.scale,
        "residual": r1, "residual_half_dt": r2,
        "order_ratio": r1 / r2 if r2 > 0 else float("inf"),
        "lambda_expected": snap.lam_expected,
        "lambda_measured_minmax": [snap.lam_measured_min, snap.lam_measured_max],
    }
    if args.dissipation:
        d = dissipation_check(family, args.t, args.dt)
        payload["lhs"] = d["lhs"]
        payload["rhs"] = d["rhs"]
        payload["lhs_analytic"] = d["lhs_analytic"]
        rel = abs(d["lhs"] - d["rhs"]) / max(1e-300, abs(d["rhs"]))
        payload["lhs_rhs_relative_gap"] = rel
        if rel > (args.tol if args.tol is not None else 1e-4):
            rep.write_json(os.path.join(out, "flow_report.json"), payload)
            raise ToleranceError(f"dissipation identity off by relative {rel:.3e}")
    rep.write_json(os.path.join(out, "flow_report.json"), payload)
    return 0


def cmd_convexity(args) -> int:
    integrand = load_integrand(args.integrand, n=args.n)
    out = rep.ensure_dir(args.out)
    report = convexity_report(integrand, grid_resolution=args.res)
    rep.write_json(os.path.join(out, "convexity.json"), {
        "kind": integrand.kind,
        "n": integrand.n,
        "is_convex": report.is_convex,
        "min_eigenvalue": report.min_eigenvalue,
        "witness": report.witness.components,
        "midpoint_convex": report.midpoint_convex,
        "grid_resolution": report.grid_resolution,
    })
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="camc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, res_default):
        sp.add_argument("--integrand", required=True,
                        help="integrand spec JSON path or a builtin kind name")
        sp.add_argument("--res", type=int, default=res_default)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--out", default=".")
        sp.add_argument("--report", action="store_true")
        sp.add_argument("--svg", action="store_true")

    sp = sub.add_parser("frontier", help="sample the Cahn-Hoffman image, singular set, crossings")
    common(sp, 4096)
    sp.set_defaults(func=cmd_frontier)

    sp = sub.add_parser("wulff", help="dual Wulff constructions and their Hausdorff gap")
    common(sp, 4096)
    sp.set_defaults(func=cmd_wulff)

    sp = sub.add_parser("classify", help="stitch and classify a catalogue curve or ArcSpec")
    common(sp, 1024)
    sp.add_argument("--curve", default="wulff")
    sp.add_argument("--arcspec", default=None, help="path to an ArcSpec JSON")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("enumerate", help="enumerate all closed CAMC curves up to congruence")
    common(sp, 256)
    sp.add_argument("--cap", type=int, default=1_000_000)
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("surface", help="revolve a catalogue curve and classify the surface")
    common(sp, 256)
    sp.add_argument("--arcs", default="wulff")
    sp.add_argument("--grid", default="256x256")
    sp.add_argument("--obj", action="store_true")
    sp.set_defaults(func=cmd_surface)

    sp = sub.add_parser("flow", help="verify the self-similar shrinking family")
    common(sp, 1024)
    sp.add_argument("--base", default="wulff")
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--t", type=float, default=0.0)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--dissipation", action="store_true")
    sp.set_defaults(func=cmd_flow)

    sp = sub.add_parser("convexity", help="convexity verdict for an integrand")
    common(sp, 256)
    sp.add_argument("--n", type=int, default=None, help="dimension for the isotropic builtin")
    sp.set_defaults(func=cmd_convexity)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ResourceCapError as exc:
        print(f"camc: resource cap: {exc}", file=sys.stderr)
        return 4
    except ToleranceError as exc:
        print(f"camc: tolerance failure: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"camc: invalid input: {exc}", file=sys.stderr)
        return 2
    except CamcError as exc:
        print(f"camc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
