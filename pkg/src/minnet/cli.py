"""Command-line frontend: generation pipelines, verification and export.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 numeric/input failure.  MINNET_THREADS is accepted as an upper bound on
worker parallelism; the current implementation evaluates everything
sequentially, which trivially respects any bound >= 1.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import bvp
from .errors import MinnetError, NotReflectable, ParseError
from .holomorphic import power_function, read_grid, write_grid
from .minimal import (MinimalPair, is_asymptotic, mixed_area,
                      quad_curvatures, tangent_normals)
from .mobius import Isometry, stereographic_lift
from .net import (CheckReport, Net3, _dump, are_parallel_meshes,
                  is_circular, is_isothermic, read_net, write_net)
from .reflection import (SymmetryOrbit, analyze_boundary_asymptotic,
                         analyze_boundary_isothermic, build_orbit,
                         reflect_isothermic, rotate_extend_asymptotic)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


@dataclass
class PipelineConfig:
    """Parsed invocation: family parameters, tolerances and output paths."""

    command: str
    family: str | None = None
    params: dict = field(default_factory=dict)
    tol: float = 1e-9
    out: str | None = None
    report: str | None = None
    orbit: bool = False
    max_word: int = 16
    threads: int = 1


def _read_threads() -> int:
    raw = os.environ.get("MINNET_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise MinnetError(f"MINNET_THREADS must be an integer, got {raw!r}")
    if value < 1:
        raise MinnetError("MINNET_THREADS must be at least 1")
    return value


# ---------------------------------------------------------------------------
# Verification battery
# ---------------------------------------------------------------------------

def _report_entry(report: CheckReport) -> dict:
    return {"ok": bool(report.ok),
            "max_residual": float(report.max_residual),
            "worst": list(report.worst) if report.worst is not None else None}


def _minimality_check(net: Net3, normals: Net3, tol: float) -> dict:
    """Max |H| over quads; geometric failures name the offending quad."""
    worst_h, worst_q = 0.0, None
    for q in net.domain.quads:
        try:
            h = abs(quad_curvatures(net.quad_points(q), normals.quad_points(q)).H)
        except MinnetError as exc:
            return {"ok": False, "max_residual": float("inf"),
                    "worst": list(q), "error": str(exc)}
        if h > worst_h:
            worst_h, worst_q = h, q
    return {"ok": worst_h <= tol, "max_residual": worst_h,
            "worst": list(worst_q) if worst_q else None}


def verify_pair(pair: MinimalPair, tol: float = 1e-9) -> dict:
    """All invariants of a generated isothermic/asymptotic/gauss triple."""
    checks: dict[str, dict] = {}
    f, ft, n, grid = pair.isothermic, pair.asymptotic, pair.gauss, pair.grid

    worst_c, worst_q = 0.0, None
    for q in f.domain.quads:
        _, res = is_circular(f, q, tol)
        rel = res / max(np.linalg.norm(np.ptp(np.asarray(f.quad_points(q)), axis=0)), 1e-300)
        if rel > worst_c:
            worst_c, worst_q = rel, q
    checks["circularity"] = {"ok": worst_c <= tol, "max_residual": worst_c,
                             "worst": list(worst_q) if worst_q else None}

    checks["isothermic"] = _report_entry(is_isothermic(f, grid.labels, tol))

    checks["minimality"] = _minimality_check(f, n, tol)

    ok_par, ang = are_parallel_meshes(f, n, max(tol, 1e-9))
    checks["gauss_parallel"] = {"ok": ok_par, "max_residual": ang, "worst": None}

    rng = np.random.default_rng(20240214)
    worst_s = 0.0
    for q in f.domain.quads:
        t = float(rng.uniform(-1.0, 1.0))
        qf, qn = f.quad_points(q), n.quad_points(q)
        qc = quad_curvatures(qf, qn)
        offset = [p + t * v for p, v in zip(qf, qn)]
        af = mixed_area(qf, qf)
        nhat = af / np.linalg.norm(af)
        a_t = float(mixed_area(offset, offset, 1e-6) @ nhat)
        predicted = (1.0 - 2.0 * t * qc.H + t * t * qc.K) * qc.areaF
        worst_s = max(worst_s, abs(a_t - predicted) / abs(qc.areaF))
    checks["steiner"] = {"ok": worst_s <= tol, "max_residual": worst_s, "worst": None}

    rep = is_asymptotic(ft, tol)
    checks["asymptotic_stars"] = _report_entry(rep)

    normals = tangent_normals(ft)
    worst_n = max(min(float(np.linalg.norm(normals[v] - n.positions[v])),
                      float(np.linalg.norm(normals[v] + n.positions[v])))
                  for v in ft.domain.vertices)
    checks["conjugate_normals"] = {"ok": worst_n <= tol, "max_residual": worst_n,
                                   "worst": None}

    dom = f.domain
    duality_ok = True
    for axis, index in (("row", dom.n0), ("row", dom.n1),
                        ("col", dom.m0), ("col", dom.m1)):
        iso = analyze_boundary_isothermic(f, n, index, axis, tol)
        asym = analyze_boundary_asymptotic(ft, index, axis, tol)
        agree = ((iso.kind == "planar_curvature_line")
                 == (asym.kind == "straight_asymptotic_line"))
        duality_ok = duality_ok and agree
        checks[f"boundary_{axis}_{index}"] = {
            "ok": agree, "max_residual": iso.residuals["congruence_plane"],
            "worst": None, "isothermic_kind": iso.kind, "asymptotic_kind": asym.kind}
    checks["conjugate_duality"] = {"ok": duality_ok, "max_residual": 0.0, "worst": None}

    return {"ok": all(c["ok"] for c in checks.values()), "checks": checks}


def verify_net_file(path: str, tol: float, as_isothermic: bool = False,
                    conjugate: str | None = None, grid_path: str | None = None) -> dict:
    """Verification battery for a single net file (plus optional companions)."""
    bundle = read_net(path)
    net = bundle.net
    checks: dict[str, dict] = {}

    looks_asymptotic = is_asymptotic(net, tol).ok and not as_isothermic
    if bundle.normals is not None or as_isothermic or not looks_asymptotic:
        worst_c, worst_q = 0.0, None
        for q in net.domain.quads:
            _, res = is_circular(net, q, tol)
            rel = res / max(np.linalg.norm(np.ptp(np.asarray(net.quad_points(q)), axis=0)), 1e-300)
            if rel > worst_c:
                worst_c, worst_q = rel, q
        checks["circularity"] = {"ok": worst_c <= tol, "max_residual": worst_c,
                                 "worst": list(worst_q) if worst_q else None}
        if bundle.labels is not None and checks["circularity"]["ok"]:
            checks["isothermic"] = _report_entry(is_isothermic(net, bundle.labels, tol))
    else:
        checks["asymptotic_stars"] = _report_entry(is_asymptotic(net, tol))

    if bundle.normals is not None:
        normals = Net3(net.domain, bundle.normals, check_edges=False)
        checks["minimality"] = _minimality_check(net, normals, tol)
        ok_par, ang = are_parallel_meshes(net, normals, max(tol, 1e-9))
        checks["gauss_parallel"] = {"ok": ok_par, "max_residual": ang, "worst": None}

    if grid_path is not None:
        grid = read_grid(grid_path)
        lift = {v: stereographic_lift(grid.values[v]) for v in grid.domain.vertices}
        if bundle.normals is not None:
            worst = max(float(np.linalg.norm(bundle.normals[v] - lift[v]))
                        for v in net.domain.vertices)
            checks["gauss_matches_grid"] = {"ok": worst <= tol,
                                            "max_residual": worst, "worst": None}

    if conjugate is not None:
        other = read_net(conjugate).net
        rep = is_asymptotic(other, tol)
        checks["conjugate_asymptotic"] = _report_entry(rep)
        if bundle.normals is not None:
            normals_other = tangent_normals(other)
            worst = max(min(float(np.linalg.norm(normals_other[v] - bundle.normals[v])),
                            float(np.linalg.norm(normals_other[v] + bundle.normals[v])))
                        for v in other.domain.vertices)
            checks["shared_normals"] = {"ok": worst <= tol, "max_residual": worst,
                                        "worst": None}

    return {"ok": all(c["ok"] for c in checks.values()), "checks": checks}


# ---------------------------------------------------------------------------
# OBJ export
# ---------------------------------------------------------------------------

def export_net_obj(net: Net3, path: str) -> None:
    """Quad OBJ with deterministic m-major vertex order."""
    verts = net.domain.vertices
    index = {v: i + 1 for i, v in enumerate(verts)}
    with open(path, "w") as fh:
        for v in verts:
            p = net.positions[v]
            fh.write(f"v {p[0]:.17g} {p[1]:.17g} {p[2]:.17g}\n")
        for q in net.domain.quads:
            i, j, k, l = (index[w] for w in net.domain.quad_vertices(q))
            fh.write(f"f {i} {j} {k} {l}\n")


def export_orbit_obj(orbit: SymmetryOrbit, path: str) -> None:
    with open(path, "w") as fh:
        for p in orbit.vertices:
            fh.write(f"v {p[0]:.17g} {p[1]:.17g} {p[2]:.17g}\n")
        for face in orbit.faces:
            fh.write("f " + " ".join(str(i + 1) for i in face) + "\n")


def orbit_to_json(orbit: SymmetryOrbit) -> dict:
    return {
        "kind": "orbit",
        "vertices": [[float(c) for c in p] for p in orbit.vertices],
        "faces": [list(f) for f in orbit.faces],
        "elements": [{"matrix": [[float(c) for c in row] for row in e.matrix],
                      "translation": [float(c) for c in e.translation]}
                     for e in orbit.elements],
        "weld_residual": float(orbit.weld_residual),
    }


def export_obj(path_in: str, path_out: str) -> None:
    """OBJ export of a net file or an orbit JSON file."""
    try:
        with open(path_in) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise ParseError(f"cannot read {path_in}: {exc}") from exc
    if isinstance(doc, dict) and doc.get("kind") == "orbit":
        with open(path_out, "w") as fh:
            for p in doc["vertices"]:
                fh.write(f"v {p[0]:.17g} {p[1]:.17g} {p[2]:.17g}\n")
            for face in doc["faces"]:
                fh.write("f " + " ".join(str(i + 1) for i in face) + "\n")
        return
    from .net import json_to_bundle
    bundle = json_to_bundle(doc)
    export_net_obj(bundle.net, path_out)


# ---------------------------------------------------------------------------
# Generation pipelines
# ---------------------------------------------------------------------------

def _boundary_reflections(pair: MinimalPair, tol: float) -> list[Isometry]:
    """Plane reflections of every reflectable boundary line of the piece."""
    f, n = pair.isothermic, pair.gauss
    dom = f.domain
    generators = []
    for axis, index in (("row", dom.n0), ("col", dom.m0), ("row", dom.n1),
                        ("col", dom.m1)):
        analysis = analyze_boundary_isothermic(f, n, index, axis, tol)
        if analysis.kind == "planar_curvature_line":
            generators.append(Isometry.plane_reflection(analysis.plane))
    return generators


def _family_pair(config: PipelineConfig) -> tuple[MinimalPair, dict]:
    family = config.family
    info: dict = {"family": family}
    if family == "enneper":
        k = config.params["k"]
        size = config.params["size"]
        if k < 1:
            raise MinnetError("enneper requires k >= 1")
        grid = power_function(2.0 * k / (k + 1.0), size, size)
        info["gamma"] = 2.0 * k / (k + 1.0)
    elif family == "planar_enneper":
        grid = power_function(3.0, config.params["size"], config.params["size"])
        info["gamma"] = 3.0
    elif family == "knoid":
        spec = bvp.BoundarySpec(config.params["k"], config.params["nmax"],
                                config.params["mmax"])
        seed = None
        if config.params.get("seed_file"):
            with open(config.params["seed_file"]) as fh:
                seed = np.array(json.load(fh)["params"], dtype=float)
        result = bvp.solve_knoid(spec, tol=config.params.get("solver_tol", 1e-10),
                                 max_iter=config.params.get("max_iter", 500),
                                 seed_params=seed, strict=True)
        grid = result.grid
        info["solver"] = {"iterations": result.iterations,
                          "residuals": {k2: float(v) for k2, v in result.residuals.items()}}
    elif family == "platonic":
        result = bvp.solve_platonic(config.params["preset"],
                                    config.params["resolution"],
                                    tol=config.params.get("solver_tol", 1e-10),
                                    max_iter=config.params.get("max_iter", 500),
                                    strict=True)
        grid = result.grid
        info["solver"] = {"iterations": result.iterations,
                          "residuals": {k2: float(v) for k2, v in result.residuals.items()}}
    else:
        raise MinnetError(f"unknown family {family!r}")
    return MinimalPair.from_grid(grid), info


def _write_pair(base: str, pair: MinimalPair) -> list[str]:
    paths = []
    normals = {v: pair.gauss.positions[v] for v in pair.gauss.domain.vertices}
    for suffix, writer in (
        ("iso", lambda p: write_net(p, pair.isothermic, pair.grid.labels, normals)),
        ("asym", lambda p: write_net(p, pair.asymptotic, pair.grid.labels)),
        ("gauss", lambda p: write_net(p, pair.gauss)),
        ("grid", lambda p: write_grid(p, pair.grid)),
    ):
        path = f"{base}.{suffix}.dnet.json"
        writer(path)
        paths.append(path)
    return paths


def cmd_generate(config: PipelineConfig) -> int:
    pair, info = _family_pair(config)
    base = config.out or config.family
    files = _write_pair(base, pair)

    report = verify_pair(pair, config.tol)
    report["info"] = info
    report["files"] = files

    if config.orbit:
        generators = _boundary_reflections(pair, max(config.tol, 1e-7))
        if not generators:
            raise NotReflectable("no reflectable boundary lines found")
        loose = config.family in ("knoid", "platonic")
        dedup = 1e-6 if loose else 1e-9
        orbit = build_orbit(pair.isothermic, generators, max_word=config.max_word,
                            dedup_tol=dedup, weld_tol=max(dedup, 1e-9))
        orbit_path = f"{base}.orbit.json"
        with open(orbit_path, "w") as fh:
            fh.write(_dump(orbit_to_json(orbit)))
            fh.write("\n")
        export_orbit_obj(orbit, f"{base}.orbit.obj")
        files.extend([orbit_path, f"{base}.orbit.obj"])
        report["orbit"] = {"elements": len(orbit.elements),
                           "vertices": int(len(orbit.vertices)),
                           "weld_residual": float(orbit.weld_residual),
                           "closure_residual": float(orbit.closure_residual())}

    _emit_report(report, config.report)
    return EXIT_OK if report["ok"] else EXIT_VERIFY


def cmd_conjugate(args) -> int:
    from .minimal import weierstrass_asymptotic
    grid = read_grid(args.grid)
    net = weierstrass_asymptotic(grid)
    write_net(args.out, net, grid.labels)
    return EXIT_OK


def cmd_reflect(args) -> int:
    bundle = read_net(args.net)
    if bundle.labels is None:
        raise ParseError("reflection requires edge labels in the net file")
    axis = "row" if args.row is not None else "col"
    index = args.row if args.row is not None else args.col
    if index is None:
        raise MinnetError("one of --row/--col is required")
    if args.asymptotic:
        net_ext, labels_ext = rotate_extend_asymptotic(bundle.net, index, axis,
                                                       args.tol, bundle.labels)
        write_net(args.out, net_ext, labels_ext)
    else:
        if bundle.normals is None:
            raise ParseError("isothermic reflection requires normals in the net file")
        normals = Net3(bundle.net.domain, bundle.normals, check_edges=False)
        net_ext, normals_ext, labels_ext = reflect_isothermic(
            bundle.net, normals, index, axis, args.tol, bundle.labels)
        write_net(args.out, net_ext, labels_ext,
                  {v: normals_ext.positions[v] for v in net_ext.domain.vertices})
    return EXIT_OK


def cmd_orbit(args) -> int:
    bundle = read_net(args.net)
    if bundle.normals is None:
        raise ParseError("orbit construction requires normals in the net file")
    normals = Net3(bundle.net.domain, bundle.normals, check_edges=False)
    dom = bundle.net.domain
    generators = []
    for axis, index in (("row", dom.n0), ("col", dom.m0), ("row", dom.n1),
                        ("col", dom.m1)):
        analysis = analyze_boundary_isothermic(bundle.net, normals, index, axis,
                                               args.tol)
        if analysis.kind == "planar_curvature_line":
            generators.append(Isometry.plane_reflection(analysis.plane))
    if not generators:
        raise NotReflectable("no reflectable boundary lines found")
    orbit = build_orbit(bundle.net, generators, max_word=args.max_word,
                        dedup_tol=max(args.tol, 1e-9), weld_tol=max(args.tol, 1e-9))
    with open(args.out, "w") as fh:
        fh.write(_dump(orbit_to_json(orbit)))
        fh.write("\n")
    if args.obj:
        export_orbit_obj(orbit, args.obj)
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify_net_file(args.net, args.tol, as_isothermic=args.as_isothermic,
                             conjugate=args.conjugate, grid_path=args.grid)
    _emit_report(report, args.report)
    return EXIT_OK if report["ok"] else EXIT_VERIFY


def _emit_report(report: dict, path: str | None) -> None:
    text = json.dumps(report, indent=2, default=_json_default)
    if path:
        with open(path, "w") as fh:
            fh.write(text)
            fh.write("\n")
    else:
        print(text)
    failures = [name for name, chk in report.get("checks", {}).items()
                if not chk.get("ok", True)]
    if failures:
        print("FAILED checks: " + ", ".join(failures), file=sys.stderr)
    else:
        print("all checks passed", file=sys.stderr)


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj)}")


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minnet",
        description="Discrete minimal nets: generation, reflection, verification")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="build a fundamental piece (and orbit)")
    gen_sub = gen.add_subparsers(dest="family", required=True)

    p_enn = gen_sub.add_parser("enneper")
    p_enn.add_argument("--k", type=int, required=True)
    p_enn.add_argument("--size", type=int, default=8)
    p_plan = gen_sub.add_parser("planar-enneper")
    p_plan.add_argument("--size", type=int, default=8)
    p_kno = gen_sub.add_parser("knoid")
    p_kno.add_argument("--k", type=int, required=True)
    p_kno.add_argument("--nmax", type=int, default=3)
    p_kno.add_argument("--mmax", type=int, default=10)
    p_kno.add_argument("--solver-tol", type=float, default=1e-10)
    p_kno.add_argument("--max-iter", type=int, default=500)
    p_kno.add_argument("--seed-file", type=str, default=None)
    p_pla = gen_sub.add_parser("platonic")
    p_pla.add_argument("--preset", choices=sorted(bvp.PLATONIC_PRESETS),
                       required=True)
    p_pla.add_argument("--resolution", type=int, default=3)
    p_pla.add_argument("--solver-tol", type=float, default=1e-10)
    p_pla.add_argument("--max-iter", type=int, default=500)
    for p in (p_enn, p_plan, p_kno, p_pla):
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--report", type=str, default=None)
        p.add_argument("--orbit", action="store_true")
        p.add_argument("--max-word", type=int, default=16)

    con = sub.add_parser("conjugate", help="asymptotic net from a grid file")
    con.add_argument("grid")
    con.add_argument("--out", required=True)

    ref = sub.add_parser("reflect", help="extend a net across a boundary line")
    ref.add_argument("net")
    ref.add_argument("--row", type=int, default=None)
    ref.add_argument("--col", type=int, default=None)
    ref.add_argument("--asymptotic", action="store_true",
                     help="use the 180-degree line rotation extension")
    ref.add_argument("--tol", type=float, default=1e-9)
    ref.add_argument("--out", required=True)

    orb = sub.add_parser("orbit", help="symmetry orbit of a net file")
    orb.add_argument("net")
    orb.add_argument("--out", required=True)
    orb.add_argument("--obj", default=None)
    orb.add_argument("--tol", type=float, default=1e-9)
    orb.add_argument("--max-word", type=int, default=16)

    ver = sub.add_parser("verify", help="run all applicable invariant checks")
    ver.add_argument("net")
    ver.add_argument("--tol", type=float, default=1e-9)
    ver.add_argument("--as-isothermic", action="store_true")
    ver.add_argument("--conjugate", default=None)
    ver.add_argument("--grid", default=None)
    ver.add_argument("--report", default=None)

    exp = sub.add_parser("export", help="export a net or orbit file to OBJ")
    exp.add_argument("path_in")
    exp.add_argument("path_out")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        threads = _read_threads()
        if args.command == "generate":
            params = {}
            if args.family == "enneper":
                params = {"k": args.k, "size": args.size}
            elif args.family == "planar-enneper":
                params = {"size": args.size}
            elif args.family == "knoid":
                params = {"k": args.k, "nmax": args.nmax, "mmax": args.mmax,
                          "solver_tol": args.solver_tol, "max_iter": args.max_iter,
                          "seed_file": args.seed_file}
            elif args.family == "platonic":
                params = {"preset": args.preset, "resolution": args.resolution,
                          "solver_tol": args.solver_tol, "max_iter": args.max_iter}
            config = PipelineConfig(
                command="generate",
                family=args.family.replace("-", "_"),
                params=params, tol=args.tol, out=args.out, report=args.report,
                orbit=args.orbit, max_word=args.max_word, threads=threads)
            return cmd_generate(config)
        if args.command == "conjugate":
            return cmd_conjugate(args)
        if args.command == "reflect":
            return cmd_reflect(args)
        if args.command == "orbit":
            return cmd_orbit(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "export":
            export_obj(args.path_in, args.path_out)
            return EXIT_OK
        return EXIT_USAGE
    except MinnetError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
