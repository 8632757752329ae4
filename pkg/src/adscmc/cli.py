"""Command-line front end.

Subcommands: classify, causal, curve, hull, barriers, torus, solve, fuzz.
Structured output is JSON (sorted keys), tables are CSV, meshes are OBJ;
all outputs are deterministic given the configuration and seed.

Exit codes: 0 success, 2 input error, 3 pipeline or solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import barriers as bar
from . import hull as hl
from . import solver as sol
from . import surfaces as sf
from . import torus as tor
from .causal import Plane2, causal_relation, classify_plane
from .core import LinearPoint, ProjPoint
from .errors import AdsError, FlatCurve, PipelineFailed

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PIPELINE = 3


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def heightfield_to_obj(field: bar.HeightField) -> str:
    """Triangulated OBJ of the valid grid quads of a height field."""
    xx, yy = field.meshgrid()
    m = field.mask & np.isfinite(field.values)
    index = -np.ones(m.shape, dtype=int)
    verts = []
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            if m[i, j]:
                index[i, j] = len(verts)
                verts.append((xx[i, j], yy[i, j], field.values[i, j]))
    lines = [f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}" for v in verts]
    for i in range(m.shape[0] - 1):
        for j in range(m.shape[1] - 1):
            if m[i, j] and m[i + 1, j] and m[i, j + 1] and m[i + 1, j + 1]:
                a, b, c, d = index[i, j], index[i + 1, j], index[i + 1, j + 1], index[i, j + 1]
                lines.append(f"f {a + 1} {b + 1} {c + 1}")
                lines.append(f"f {a + 1} {c + 1} {d + 1}")
    return "\n".join(lines) + "\n"


def _curve_from_config(cfg: dict) -> sf.BoundaryCurve:
    a = {int(k): float(v) for k, v in cfg.get("a", {}).items()}
    b = {int(k): float(v) for k, v in cfg.get("b", {}).items()}
    return sf.synth_boundary_curve(
        a=a,
        b=b,
        a0=float(cfg.get("a0", 0.0)),
        lambda_max=float(cfg.get("lambda_max", 0.8)),
        n_samples=int(cfg.get("n_samples", 64)),
    )


def _parse_reals(tokens, count, what) -> list[float]:
    try:
        vals = [float(v) for v in tokens]
    except ValueError as exc:
        raise ValueError(f"{what}: {exc}") from exc
    if len(vals) != count:
        raise ValueError(f"{what} expects {count} reals, got {len(vals)}")
    return vals


def cmd_classify(args) -> int:
    try:
        vals = _parse_reals(args.coords, 8, "classify (two spanning vectors)")
        plane = Plane2(vals[:4], vals[4:])
        cls = classify_plane(plane)
    except (ValueError, AdsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(cls.value)
    return EXIT_OK


def cmd_causal(args) -> int:
    try:
        vals = _parse_reals(args.coords, 12, "causal (base point p, then q, then r)")
        p = LinearPoint(vals[:4])
        q = ProjPoint(vals[4:8])
        r = ProjPoint(vals[8:12])
        rel = causal_relation(q, r, p)
    except (ValueError, AdsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(rel.value)
    return EXIT_OK


def cmd_curve(args) -> int:
    try:
        cfg = _load_config(args)
        curve = _curve_from_config(cfg.get("curve", cfg))
    except (AdsError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    grid = sf.PolarGrid(int(cfg.get("n_r", 17)), curve.n_samples)
    surface = sf.graph_surface_from_curve(curve, grid)
    out = Path(args.out) / "surface.json"
    out.write_text(sf.surface_to_json(surface))
    report = {
        "lipschitz": float(sf.lipschitz_constant(surface)),
        "spacelike": sf.is_spacelike(surface),
        "curve_lipschitz": float(curve.lipschitz_bound()),
        "flat": bool(curve.is_flat),
        "surface_file": out.name,
    }
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def cmd_hull(args) -> int:
    try:
        cfg = _load_config(args)
        curve = _curve_from_config(cfg.get("curve", cfg))
    except (AdsError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        split = hl.hull_of_boundary_curve(curve)
    except FlatCurve:
        print(json.dumps({"flat": True}, sort_keys=True))
        return EXIT_OK
    except AdsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    out = Path(args.out)
    (out / "hull_upper.obj").write_text(split.upper.to_obj())
    (out / "hull_lower.obj").write_text(split.lower.to_obj())
    (out / "hull_upper.json").write_text(split.upper.to_json())
    (out / "hull_lower.json").write_text(split.lower.to_json())
    ok_u, _ = hl.spacelike_support_planes(split.upper)
    ok_l, _ = hl.spacelike_support_planes(split.lower)
    print(
        json.dumps(
            {
                "flat": False,
                "upper_faces": split.upper.n_faces,
                "lower_faces": split.lower.n_faces,
                "support_planes_spacelike": ok_u and ok_l,
            },
            sort_keys=True,
        )
    )
    return EXIT_OK if (ok_u and ok_l) else EXIT_PIPELINE


def cmd_barriers(args) -> int:
    try:
        cfg = _load_config(args)
        curve = _curve_from_config(cfg["curve"])
        eps = float(cfg.get("eps", 0.15))
        delta = float(cfg.get("delta", 0.05))
        eta = float(cfg.get("eta", 0.02))
        eps2 = float(cfg.get("eps2", 0.05))
        grid_cfg = cfg.get("grid", {})
        nx = int(grid_cfg.get("nx", 96))
        ny = int(grid_cfg.get("ny", 96))
        r_max = float(cfg.get("r_max", 0.9))
    except (KeyError, ValueError, AdsError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out = Path(args.out)

    if hl.curve_is_flat(curve):
        field, h = bar.flat_fast_path(nx=nx, ny=ny, r_max=r_max)
        (out / "sigma_minus.obj").write_text(heightfield_to_obj(field))
        (out / "sigma_plus.obj").write_text(heightfield_to_obj(field))
        cert = {
            "mode": "flat",
            "h_abs_max": float(np.nanmax(np.abs(h))),
            "h_minus_max": 0.0,
            "h_plus_min": 0.0,
            "ok": True,
        }
        (out / "certificate.json").write_text(json.dumps(cert, sort_keys=True))
        print(json.dumps(cert, sort_keys=True))
        return EXIT_OK

    try:
        result = bar.build_barriers(
            curve, eps=eps, delta=delta, eta=eta, eps2=eps2, nx=nx, ny=ny, r_max=r_max
        )
    except PipelineFailed as exc:
        print(json.dumps({"failed_stage": exc.stage, "error": str(exc)}, sort_keys=True))
        return EXIT_PIPELINE
    except AdsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    (out / "sigma_minus.obj").write_text(heightfield_to_obj(result.sigma_minus))
    (out / "sigma_plus.obj").write_text(heightfield_to_obj(result.sigma_plus))
    cert = dict(result.certificate.to_dict())
    cert["mode"] = "generic"
    (out / "certificate.json").write_text(json.dumps(cert, sort_keys=True))
    print(json.dumps(cert, sort_keys=True))
    return EXIT_OK if result.certificate.ok else EXIT_PIPELINE


def cmd_torus(args) -> int:
    try:
        lattice = _parse_lattice(args.lattice)
        theta_lo, theta_hi = (float(v) for v in args.theta_range.split(","))
        steps = int(args.steps)
        if not (0.0 < theta_lo < theta_hi < np.pi / 2):
            raise ValueError("theta range must satisfy 0 < lo < hi < pi/2")
    except (ValueError, AdsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    thetas = np.linspace(theta_lo, theta_hi, steps)
    table = tor.foliation_table(thetas, lattice)
    out = Path(args.out) / "foliation.csv"
    lines = ["theta,kappa,k1,k2,area_density"]
    for row in table:
        lines.append(",".join(_fmt(v) for v in row))
    out.write_text("\n".join(lines) + "\n")
    print(json.dumps({"rows": len(table), "file": out.name}, sort_keys=True))
    return EXIT_OK


def cmd_solve(args) -> int:
    try:
        lattice = _parse_lattice(args.lattice)
        n = int(args.grid)
        lo, hi = (float(v) for v in args.barriers.split(","))
        tol = float(args.tol)
        init = args.init
    except (ValueError, AdsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if init.startswith("const:"):
        u0 = np.full((n, n), float(init.split(":")[1]))
    elif init.startswith("sine:"):
        amp, k = (float(v) for v in init.split(":")[1].split(","))
        u0 = np.pi / 4 + amp * np.sin(2 * np.pi * int(k) * np.arange(n) / n)[:, None] * np.ones((1, n))
    else:
        print(f"error: unknown init {init!r}", file=sys.stderr)
        return EXIT_INPUT
    try:
        graph = sol.TorusGraph(lattice, u0)
        report = sol.relax_to_maximal(graph, lo, hi, tol_h=tol)
    except (ValueError, AdsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    out = Path(args.out)
    (out / "solve_report.json").write_text(json.dumps(report.to_dict(), sort_keys=True))
    rows = [",".join(_fmt(v) for v in row) for row in report.u]
    (out / "solution_u.csv").write_text("\n".join(rows) + "\n")
    print(json.dumps(report.to_dict(), sort_keys=True))
    return EXIT_OK


def cmd_fuzz(args) -> int:
    rng = np.random.default_rng(int(args.seed))
    n_surf = int(args.surfaces)
    n_rays = int(args.rays)
    double_hits = 0
    achronal_bad = 0
    for _ in range(n_surf):
        surface, curve = sf.random_spacelike_surface(rng)
        report = sf.check_achronal(surface)
        achronal_bad += len(report.violations)
        for _ in range(n_rays):
            ray = sf.LightRay(
                phi0=float(rng.uniform(0, 2 * np.pi)),
                psi=float(rng.uniform(0.15, np.pi - 0.15)),
                t0=float(rng.uniform(-np.pi, np.pi)),
                slope=int(rng.choice([-1, 1])),
            )
            if sf.lightlike_once(surface, ray) > 1:
                double_hits += 1
    summary = {
        "surfaces": n_surf,
        "rays_per_surface": n_rays,
        "achronal_violations": achronal_bad,
        "double_intersections": double_hits,
        "ok": achronal_bad == 0 and double_hits == 0,
    }
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK if summary["ok"] else EXIT_PIPELINE


def _parse_lattice(text: str) -> tor.LatticePair:
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 4:
        raise ValueError("lattice expects t1,s1,t2,s2")
    return tor.LatticePair((vals[0], vals[1]), (vals[2], vals[3]))


def _load_config(args) -> dict:
    if getattr(args, "config", None):
        return json.loads(Path(args.config).read_text())
    cfg: dict = {}
    if getattr(args, "a2", None) is not None:
        cfg = {"curve": {"a": {"2": args.a2}}}
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adscmc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify the 2-plane spanned by two 4-vectors")
    p.add_argument("coords", nargs="*", help="8 reals: u1 u2 u3 u4 v1 v2 v3 v4")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("causal", help="causal relation of q and r in the affine domain of p")
    p.add_argument("coords", nargs="*", help="12 reals: p, q, r")
    p.set_defaults(func=cmd_causal)

    p = sub.add_parser("curve", help="synthesize a spacelike boundary curve and spanning surface")
    p.add_argument("--config", help="JSON config path")
    p.add_argument("--a2", type=float, help="shortcut: cos(2 phi) coefficient")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("hull", help="split hull of a boundary curve")
    p.add_argument("--config", help="JSON config path")
    p.add_argument("--a2", type=float)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_hull)

    p = sub.add_parser("barriers", help="run the barrier pipeline")
    p.add_argument("--config", required=True, help="JSON config path")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_barriers)

    p = sub.add_parser("torus", help="CMC foliation table")
    p.add_argument("--lattice", default="1,0,0,1")
    p.add_argument("--theta-range", default="0.1,1.47", dest="theta_range")
    p.add_argument("--steps", default=28)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_torus)

    p = sub.add_parser("solve", help="relax a torus graph to the maximal leaf")
    p.add_argument("--lattice", default="1,0,0,1")
    p.add_argument("--grid", default=64)
    p.add_argument("--barriers", default="0.3,1.2")
    p.add_argument("--tol", default="1e-6")
    p.add_argument("--init", default="const:0.5")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("fuzz", help="randomized achronality and intersection properties")
    p.add_argument("--seed", default=0)
    p.add_argument("--surfaces", default=20)
    p.add_argument("--rays", default=20)
    p.set_defaults(func=cmd_fuzz)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except json.JSONDecodeError as exc:
        print(f"error: bad JSON: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
