"""Command-line front end.

Exit codes: 0 success, 1 a verification threshold was exceeded (or a seed is
degenerate), 2 bad input or a point outside the domain.  Errors are reported
as one JSON object on standard error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import contour, coords, curvature, joyce, series, twistor

TOLERANCES = {
    "ode": 1e-10,
    "g-pde": 1e-8,
    "cp": 1e-7,
    "joyce": 1e-7,
    "asd": 1e-6,
    "einstein": 1e-6,
    "twistor": 1e-10,
}
CHECKS = list(TOLERANCES)
DEFAULT_GRID = "-0.3:0.3:5,1.5:2.5:5"
Z_GRID = "-0.4:0.4:5,-0.4:0.4:5"


class InputError(ValueError):
    """Malformed command-line input."""


# configuration ---------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    x0: float
    x1: float
    nx: int
    y0: float
    y1: float
    ny: int

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        try:
            xs, ys = text.split(",")
            x0, x1, nx = xs.split(":")
            y0, y1, ny = ys.split(":")
            g = cls(float(x0), float(x1), int(nx), float(y0), float(y1), int(ny))
        except ValueError as exc:
            raise InputError(f"grid must look like x0:x1:nx,y0:y1:ny (got {text!r})") from exc
        if g.nx < 1 or g.ny < 1:
            raise InputError("grid counts must be positive")
        return g

    def points(self) -> list[tuple[float, float]]:
        xs = np.linspace(self.x0, self.x1, self.nx) if self.nx > 1 else np.array([self.x0])
        ys = np.linspace(self.y0, self.y1, self.ny) if self.ny > 1 else np.array([self.y0])
        return [(float(x), float(y)) for y in ys for x in xs]

    def text(self) -> str:
        return f"{self.x0}:{self.x1}:{self.nx},{self.y0}:{self.y1}:{self.ny}"


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: str | None = None
    grid: GridSpec | None = None
    tolerance: float | None = None
    nodes: int = 512
    rho: float | None = None
    safety: float = 0.9
    mode: str = "real"
    out: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.nodes < 64 or self.nodes & (self.nodes - 1):
            raise InputError("--nodes must be a power of two, at least 64")
        if self.mode not in ("real", "complexified"):
            raise InputError("--mode must be real or complexified")

    def digest(self) -> str:
        payload = {
            "command": self.command,
            "seed": self.seed,
            "seed_sha256": _file_digest(self.seed),
            "grid": self.grid.text() if self.grid else None,
            "tolerance": self.tolerance,
            "nodes": self.nodes,
            "rho": self.rho,
            "safety": self.safety,
            "mode": self.mode,
            "extra": self.extra,
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def _file_digest(path):
    if not path or path.startswith("builtin:"):
        return None
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def thread_count() -> int:
    try:
        n = int(os.environ.get("FORGE_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else min(8, os.cpu_count() or 1)


def grid_map(fn, items):
    """``fn`` over ``items`` on a worker pool; results come back in input order."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# seeds and fields --------------------------------------------------------------


@dataclass(frozen=True)
class Seed:
    phi1: series.ParitySeries
    phi2: series.ParitySeries
    truncation: int


def load_seed(path: str) -> Seed:
    try:
        phi1, n = series.load_seed(path)
    except FileNotFoundError as exc:
        raise InputError(f"seed file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"seed file is not valid JSON: {exc}") from exc
    return Seed(phi1, series.solve_phi2(phi1, n), n)


def load_field(cfg: RunConfig) -> joyce.HarmonicField:
    if cfg.seed.startswith("builtin:"):
        name = cfg.seed[len("builtin:") :]
        cat = joyce.builtin_seeds()
        if name not in cat:
            raise InputError(f"unknown builtin field {name!r}; see 'seeds list'")
        return cat[name]
    s = load_seed(cfg.seed)
    return joyce.SeedPipeline(s.phi1, s.phi2, _evaluator(cfg, s)).field(Path(cfg.seed).stem)


def _evaluator(cfg: RunConfig, s: Seed) -> contour.GEvaluator:
    return contour.GEvaluator((s.phi1, s.phi2), nodes=cfg.nodes, rho=cfg.rho, safety=cfg.safety)


# serialization ---------------------------------------------------------------------


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _flatten(row: dict) -> dict:
    out = {}
    for k, v in row.items():
        if isinstance(v, (complex, np.complexfloating)):
            out[k + "_re"], out[k + "_im"] = _fmt(v.real), _fmt(v.imag)
        elif isinstance(v, (bool, np.bool_)):
            out[k] = str(bool(v)).lower()
        elif isinstance(v, (int, float, np.integer, np.floating)):
            out[k] = _fmt(v)
        else:
            out[k] = str(v)
    return out


def write_csv(rows: list[dict]) -> str:
    rows = [_flatten(r) for r in rows]
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


def cjson(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def emit(cfg: RunConfig, name: str, table: str, summary: dict | None = None) -> None:
    if cfg.out:
        d = Path(cfg.out)
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{name}.csv").write_text(table)
        if summary is not None:
            (d / f"{name}_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
            print(json.dumps(summary, sort_keys=True))
        return
    sys.stdout.write(table)
    if summary is not None:
        sys.stderr.write(json.dumps(summary, sort_keys=True) + "\n")


# per-point checks ------------------------------------------------------------------


def _point(x, y) -> coords.JoycePoint:
    return coords.JoycePoint(float(x), float(y))


def _check_ode(s: Seed, z: complex) -> dict:
    return {"residual": series.ode_residual(s.phi1, s.phi2, [z])}


def _check_twistor(s: Seed, z: complex) -> dict:
    fp = twistor.FramePoint(z, phi=(s.phi1, s.phi2))
    d = twistor.involution_defects(fp)
    span = twistor.span_residual(fp, 2.0, "both")
    return {"involution": d["product"], "det": d["det"], "span": span, "residual": max(d["product"], d["det"], span)}


def _joyce_data(F, p, order):
    fj = F.f_jet(p, order + 1)
    return fj, coords.pq_jet(fj, p)


def run_verify(cfg: RunConfig, check: str) -> int:
    tol = cfg.tolerance if cfg.tolerance is not None else TOLERANCES[check]
    grid = cfg.grid or GridSpec.parse(Z_GRID if check in ("ode", "twistor") else DEFAULT_GRID)
    pts = grid.points()
    if check in ("ode", "twistor", "g-pde"):
        s = load_seed(cfg.seed)
    if check in ("ode", "twistor"):
        fn = _check_ode if check == "ode" else _check_twistor
        rows = grid_map(lambda xy: {"x": xy[0], "y": xy[1], **fn(s, complex(*xy))}, pts)
    elif check == "g-pde":
        ev = _evaluator(cfg, s)

        def one(xy):
            r, sv = coords.joyce_to_twistor(_point(*xy))
            return {"x": xy[0], "y": xy[1], "residual": contour.g_consistency_residual(ev, r, sv)}

        rows = grid_map(one, pts)
    else:
        F = load_field(cfg)
        form = cfg.extra.get("form", "chain")

        def one(xy):
            p = _point(*xy)
            row = {"x": p.x, "y": p.y}
            if check == "cp":
                fj = F.f_jet(p, 1)
                row["residual"] = coords.cp_residual(fj, p, form)
            elif check == "joyce":
                row["residual"] = joyce.joyce_residual(_joyce_data(F, p, 1)[1])
            elif check == "asd":
                rep = curvature.curvature_report(joyce.metric_at(F, p, 2, cfg.mode))
                row.update(wplus=rep.wplus_norm, wminus=rep.wminus_norm, conformally_flat=rep.conformally_flat)
                row["residual"] = rep.asd_residual
            else:
                gr = curvature.einstein_gauge(joyce.metric_at(F, p, 3, cfg.mode))
                row.update(scalar_sign=gr.scalar_sign, residual=gr.residual)
            return row

        rows = grid_map(one, pts)
    res = np.array([r["residual"] for r in rows], dtype=float)
    ok = bool(np.all(res < tol))
    summary = {
        "check": check,
        "max": float(res.max()),
        "mean": float(res.mean()),
        "pass": ok,
        "tolerance": tol,
        "points": len(rows),
        "config_hash": cfg.digest(),
    }
    if check == "cp":
        summary["form"] = cfg.extra.get("form", "chain")
    emit(cfg, f"verify_{check}", write_csv(rows), summary)
    return 0 if ok else 1


def metric_row(F, p: coords.JoycePoint, mode: str) -> dict:
    row = joyce.grid_row(F, p, mode)
    mj = joyce.metric_at(F, p, 3, mode)
    rep = curvature.curvature_report(mj)
    gr = curvature.einstein_gauge(mj)
    row.update(
        scalar=rep.scalar,
        ricci0_norm=rep.ricci0_norm,
        wplus=rep.wplus_norm,
        wminus=rep.wminus_norm,
        asd_residual=rep.asd_residual,
        gauge_residual=gr.residual,
        scalar_sign=gr.scalar_sign,
    )
    if mode == "real":
        row = {k: (v.real if isinstance(v, complex) else v) for k, v in row.items()}
    return row


def run_metric_grid(cfg: RunConfig) -> int:
    F = load_field(cfg)
    rows = grid_map(lambda xy: metric_row(F, _point(*xy), cfg.mode), (cfg.grid or GridSpec.parse(DEFAULT_GRID)).points())
    emit(cfg, "metric_grid", write_csv(rows))
    return 0


def run_plotdata(cfg: RunConfig) -> int:
    F = load_field(cfg)
    q = cfg.extra["quantity"]

    def one(xy):
        row = metric_row(F, _point(*xy), cfg.mode)
        if q not in row:
            raise InputError(f"unknown quantity {q!r}; choose from {sorted(row)}")
        return {"x": xy[0], "y": xy[1], "value": row[q]}

    rows = grid_map(one, (cfg.grid or GridSpec.parse(DEFAULT_GRID)).points())
    emit(cfg, f"plot_{q}", write_csv(rows))
    return 0


def run_g_eval(cfg: RunConfig) -> int:
    s = load_seed(cfg.seed)
    r, sv = complex(cfg.extra["r"]), complex(cfg.extra["s"])
    gj = contour.eval_G_jet(_evaluator(cfg, s), r, sv, cfg.extra["order"])
    rows = []
    for (m, n), v in sorted(gj.partials.items()):
        rows.append(
            {
                "re_r": r.real, "im_r": r.imag, "re_s": sv.real, "im_s": sv.imag, "m": m, "n": n,
                "re_G1": v[0].real, "im_G1": v[0].imag, "re_G2": v[1].real, "im_G2": v[1].imag,
                "err": gj.error_estimate,
            }
        )
    emit(cfg, "g_eval", write_csv(rows))
    return 0


def run_transform(args) -> int:
    if args.x is not None or args.y is not None:
        if args.x is None or args.y is None:
            raise InputError("--x and --y go together")
        p = _point(args.x, args.y)
        try:
            r, s = coords.joyce_to_twistor(p)
            out = {"x": p.x, "y": p.y, "zeta": cjson(p.zeta), "xi": cjson(p.xi), "r": cjson(r), "s": cjson(s)}
            out["slice_defect"] = abs(s * r.conjugate() - 1) if r != 0 else None
        except coords.PoleAtInfinity as exc:
            out = {"x": p.x, "y": p.y, "zeta": cjson(p.zeta), "xi": cjson(p.xi), "r": cjson(exc.r), "s": "infinity"}
    elif args.r is not None and args.s is not None:
        img = coords.twistor_to_joyce(complex(args.r), complex(args.s))
        out = {"r": cjson(args.r), "s": cjson(args.s), "zeta": cjson(img.zeta), "xi": cjson(img.xi),
               "on_real_slice": img.on_real_slice}
        if img.point is not None:
            out.update(x=img.point.x, y=img.point.y)
    else:
        raise InputError("transform needs --x/--y or --r/--s")
    print(json.dumps(out, sort_keys=True))
    return 0


def run_seed(args) -> int:
    s = load_seed(args.file)
    if args.action == "validate":
        rep = series.validate_seed(s.phi1, s.phi2, args.tol)
        print(json.dumps(rep.to_json(), sort_keys=True))
        return 0 if rep.nondegenerate else 1
    n = args.terms or s.truncation
    phi2 = series.solve_phi2(s.phi1, n)
    pts = sample_disc(0.5, 50)
    res = series.ode_residual(s.phi1, phi2, pts)
    payload = {"phi2": series.series_to_dict(phi2), "terms": n, "ode_residual": res}
    if args.output:
        Path(args.output).write_text(json.dumps(payload, indent=2) + "\n")
        print(json.dumps({"ode_residual": res}))
    else:
        print(json.dumps(payload))
    return 0


def sample_disc(radius: float, n: int) -> np.ndarray:
    """Deterministic points filling the closed disc (a sunflower pattern)."""
    k = np.arange(1, n + 1)
    golden = math.pi * (3 - math.sqrt(5))
    return radius * np.sqrt(k / n) * np.exp(1j * golden * k)


def run_seeds_list() -> int:
    out = [{"name": k, "components": list(joyce.PAIRS[k])} for k in joyce.builtin_seeds()]
    print(json.dumps(out, indent=2))
    return 0


# argument parsing --------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, grid=True):
    if grid:
        p.add_argument("--grid", type=GridSpec.parse, help="x0:x1:nx,y0:y1:ny")
    p.add_argument("--nodes", type=int, default=512, help="initial quadrature nodes (power of two)")
    p.add_argument("--rho", type=float, default=None, help="fixed inner quadrature radius")
    p.add_argument("--safety", type=float, default=0.9)
    p.add_argument("--mode", choices=["real", "complexified"], default="real")
    p.add_argument("--out", default=None, help="directory for CSV and summary files")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="toricasd", description="Toric anti-self-dual Einstein metrics from odd seeds."
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("seed", help="validate a seed or solve for phi2")
    sp.add_argument("action", choices=["validate", "solve"])
    sp.add_argument("file")
    sp.add_argument("--terms", type=int, default=None)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--output", default=None)

    gp = sub.add_parser("g", help="evaluate G partials")
    gp.add_argument("action", choices=["eval"])
    gp.add_argument("file")
    gp.add_argument("--r", required=True)
    gp.add_argument("--s", required=True)
    gp.add_argument("--order", type=int, default=1)
    _common(gp, grid=False)

    vp = sub.add_parser("verify", help="residual checks over a grid")
    vp.add_argument("check", choices=CHECKS)
    vp.add_argument("file", help="seed JSON or builtin:<name>")
    vp.add_argument("--tol", type=float, default=None)
    vp.add_argument("--form", choices=["chain", "printed"], default="chain", help="cp equation variant")
    _common(vp)

    mp = sub.add_parser("metric", help="metric and curvature over a grid")
    mp.add_argument("action", choices=["grid"])
    mp.add_argument("file")
    _common(mp)

    tp = sub.add_parser("transform", help="Joyce <-> twistor coordinates")
    tp.add_argument("--x", type=float)
    tp.add_argument("--y", type=float)
    tp.add_argument("--r", type=complex)
    tp.add_argument("--s", type=complex)

    lp = sub.add_parser("seeds", help="builtin harmonic fields")
    lp.add_argument("action", choices=["list"])

    pp = sub.add_parser("plotdata", help="(x, y, value) table of one metric-grid column")
    pp.add_argument("file")
    pp.add_argument("--quantity", required=True)
    _common(pp)
    return ap


def _config(args, command, **extra) -> RunConfig:
    return RunConfig(
        command=command,
        seed=args.file,
        grid=getattr(args, "grid", None),
        tolerance=getattr(args, "tol", None),
        nodes=args.nodes,
        rho=args.rho,
        safety=args.safety,
        mode=args.mode,
        out=args.out,
        extra=extra,
    )


DOMAIN_ERRORS = (
    InputError,
    ValueError,
    ArithmeticError,
    OSError,
)


def _glue_values(argv):
    # "--grid -0.3:0.3:5,..." would otherwise read the value as an option
    out, it = [], iter(argv)
    for a in it:
        if a in ("--grid", "--r", "--s", "--x", "--y"):
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _glue_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        if args.command == "seed":
            return run_seed(args)
        if args.command == "g":
            return run_g_eval(_config(args, "g eval", r=args.r, s=args.s, order=args.order))
        if args.command == "verify":
            extra = {"form": args.form} if args.check == "cp" else {}
            return run_verify(_config(args, f"verify {args.check}", **extra), args.check)
        if args.command == "metric":
            return run_metric_grid(_config(args, "metric grid"))
        if args.command == "transform":
            return run_transform(args)
        if args.command == "seeds":
            return run_seeds_list()
        if args.command == "plotdata":
            return run_plotdata(_config(args, "plotdata", quantity=args.quantity))
    except DOMAIN_ERRORS as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
