"""Command-line entry point.

Exit codes: 0 when every verdict passes, 2 when a verdict fails, 1 on usage or
numerical errors.  Reports go to ``<output root>/<command>-<config hash>/`` where the
output root is ``--out``, else ``$DRIFTGEOM_OUTPUT``, else ``./runs``.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import experiments as ex
from . import reports as rp
from .config import build_drift, build_manifold, build_nonlinearity, load_config, parse_list, parse_params
from .errors import DriftGeomError, UsageError

__all__ = ["main", "build_parser", "format_number"]

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """Argument errors raise :class:`UsageError` (exit 1) with the help text attached."""

    def error(self, message):
        raise UsageError(f"{message}\n\n{self.format_help()}")


def format_number(v: float) -> str:
    """Shortest round-trip decimal; integral values print without a fractional part."""
    v = float(v)
    if math.isfinite(v) and v.is_integer() and abs(v) < 2**53:
        return str(int(v))
    return repr(v)


# -----------------------------------------------------------------------------
# parser
# -----------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--config", metavar="PATH", help="key = value configuration file; flags override it")
    g.add_argument("--out", metavar="DIR", help=f"output root (default ${rp.OUTPUT_ENV} or ./runs)")
    g.add_argument("--threads", type=int, default=None, help="kernel threads; 1 is serial and bit-exact")
    g.add_argument("--quiet", action="store_true", help="print only the primary result")
    return p


def _geometry_flags(p):
    p.add_argument("--manifold", choices=["euclidean", "hyperbolic", "paraboloid", "rotational"])
    p.add_argument("--curvature", type=float)
    p.add_argument("--warp", choices=["sinh", "sin", "linear"])
    p.add_argument("--drift", choices=["zero", "constant", "linear", "rotation", "grad_phi", "axis"])
    p.add_argument("--drift-direction", dest="drift_direction", type=float, nargs="+", metavar="V")
    p.add_argument("--omega", type=float)
    p.add_argument("--variant", choices=["literal", "alternate"])
    p.add_argument("--delta", type=float)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    top = _Parser(prog="driftgeom", description="Drifted-Laplacian geometry checks and experiments.")
    top.add_argument("--version", action="version", version=f"driftgeom {__version__}")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    verify = sub.add_parser("verify", help="identity and closed-form checks")
    vsub = verify.add_subparsers(dest="target", required=True, parser_class=_Parser)
    b = vsub.add_parser("bochner", parents=[common], help="Bochner identity over the fixture matrix")
    b.add_argument("--points", type=int, help="sample points per axis (default 5)")
    c = vsub.add_parser("comparison", parents=[common], help="comparison bound along shot geodesics")
    _geometry_flags(c)
    c.add_argument("--radii", type=parse_list, metavar="R1,R2,...")
    c.add_argument("--dirs", type=int)
    c.add_argument("--origin", type=float, nargs="+", metavar="X")
    c.add_argument("--step", type=float)
    a = vsub.add_parser("appendix", parents=[common], help="paraboloid closed forms against AD")
    a.add_argument("--grid", type=int, help="grid points per axis on [-3, 3]^2 (default 41)")
    ce = vsub.add_parser("counterexample", parents=[common], help="one-dimensional unbounded-drift family")
    ce.add_argument("--delta", type=float)
    ce.add_argument("--x-list", dest="x_list", type=parse_list, metavar="X1,X2,...")
    ce.add_argument("--samples", type=int)

    s = sub.add_parser("solve", parents=[common], help="finite-difference solve on a chart rectangle")
    _geometry_flags(s)
    s.add_argument("--nl", choices=["zero", "linear", "rational"])
    s.add_argument("--nl-c", dest="nl_c", type=float)
    s.add_argument("--nl-a", dest="nl_a", type=float)
    s.add_argument("--nl-b", dest="nl_b", type=float)
    s.add_argument("--nl-sigma", dest="nl_sigma", type=float)
    s.add_argument("--rect", type=float, nargs=4, metavar=("X0", "X1", "Y0", "Y1"))
    s.add_argument("--h", type=float)
    s.add_argument("--cells", type=int)
    s.add_argument("--boundary", help="constant | exp_x | linear | exp_cos | file")
    s.add_argument("--boundary-params", dest="boundary_params", type=parse_params, metavar="K=V,...")
    s.add_argument("--boundary-file", dest="boundary_file", metavar="CSV",
                   help="x,y,u table covering the boundary nodes (with --boundary file)")
    s.add_argument("--newton-tol", dest="newton_tol", type=float)
    s.add_argument("--max-iter", dest="max_iter", type=int)
    s.add_argument("--require-positive", dest="require_positive", action="store_true", default=None)

    e = sub.add_parser("estimate", parents=[common], help="bracket, cubic and Harnack factor from parameters")
    e.add_argument("--n", type=int)
    e.add_argument("--alpha", type=float)
    e.add_argument("--K", type=float)
    e.add_argument("--beta", type=float)
    e.add_argument("--lambda", dest="Lambda", type=float)
    e.add_argument("--R", type=float, help="radius (default inf)")
    e.add_argument("--Cn", type=float, help="constant C(n) (default 8n)")
    e.add_argument("--A", type=float, help="cubic A (default 2n alpha~ + 2n Lambda^2)")
    e.add_argument("--distance", type=float, help="also evaluate the Harnack factor at this distance")
    e.add_argument("--C1", type=float)
    e.add_argument("--C2", type=float)
    e.add_argument("--raw-bracket", dest="raw_bracket", action="store_true", help="print the bracket without Cn")

    exp = sub.add_parser("experiment", help="solver-backed experiments")
    esub = exp.add_subparsers(dest="target", required=True, parser_class=_Parser)
    g = esub.add_parser("gradient-sweep", parents=[common], help="measured gradient bound on all fixtures")
    g.add_argument("--cells", type=int)
    g.add_argument("--Cn", type=float)
    lv = esub.add_parser("liouville", parents=[common], help="paraboloid decay experiment with Euclidean control")
    lv.add_argument("--R-list", dest="R_list", type=parse_list, metavar="R1,R2,...")
    lv.add_argument("--cells", type=int)
    lv.add_argument("--variant", choices=["literal", "alternate"])

    acc = sub.add_parser("acceptance", parents=[common], help="run every acceptance criterion")
    acc.add_argument("--only", type=lambda t: [int(v) for v in t.split(",")], metavar="N,N,...",
                     help="run a subset of criteria")
    return top


# -----------------------------------------------------------------------------
# helpers
# -----------------------------------------------------------------------------

class _Ctx:
    """Resolved settings: explicit flags override the config file, which overrides defaults."""

    def __init__(self, args, command: str):
        self.args = args
        self.command = command
        self.cfg = load_config(args.config) if getattr(args, "config", None) else {}
        self.resolved: dict = {}
        self.timings: dict = {}

    def get(self, key, default=None):
        v = getattr(self.args, key, None)
        if v is None:
            v = self.cfg.get(key, default)
        self.resolved[key] = v
        return v

    @property
    def threads(self) -> int:
        t = self.get("threads", 1)
        if t < 1:
            raise UsageError("--threads must be >= 1")
        return t

    def say(self, text: str):
        if not getattr(self.args, "quiet", False):
            print(text)

    def finish(self, measured: dict, verdicts: list, csvs=(), echo: bool = True) -> int:
        from .solver.kernels import BACKEND

        threads = self.resolved.get("threads", 1)
        config = dict(self.resolved)
        report = rp.build_report(self.command, config, measured, verdicts, version=__version__,
                                 backend=BACKEND, threads=threads)
        root = rp.output_root(getattr(self.args, "out", None))
        run_dir = rp.run_directory(root, self.command, config)
        rp.write_report(run_dir, report)
        rp.write_timing(run_dir, self.timings)
        for name, header, rows in csvs:
            rp.write_csv(run_dir / name, header, rows)
        for v in verdicts if echo else ():
            tag = "info" if v.get("informational") else ("PASS" if v["passed"] else "FAIL")
            self.say(f"[{tag}] {v['name']}: {_short(v['value'])} (tolerance {_short(v['tolerance'])})")
        self.say(f"report: {run_dir / 'report.json'}")
        return EXIT_PASS if report["passed"] else EXIT_FAIL


def _short(v, width: int = 72) -> str:
    if isinstance(v, float):
        return format_number(v)
    text = str(rp.to_jsonable(v))
    return text if len(text) <= width else text[: width - 3] + "..."


def _geometry(ctx: _Ctx):
    spec = {k: ctx.get(k) for k in ("manifold", "curvature", "warp", "drift", "drift_direction", "omega",
                                    "variant", "delta", "domain", "dim")}
    spec = {k: v for k, v in spec.items() if v is not None}
    m = build_manifold(spec)
    return m, build_drift(spec, m)


def _timed(ctx: _Ctx, key: str, fn, *a, **kw):
    t0 = time.perf_counter()
    out = fn(*a, **kw)
    ctx.timings[key] = time.perf_counter() - t0
    return out


# -----------------------------------------------------------------------------
# commands
# -----------------------------------------------------------------------------

def _verify_bochner(ctx: _Ctx) -> int:
    points = ctx.get("points", 5)
    suite = _timed(ctx, "bochner", ex.bochner_suite, points=points)
    rows = [(r["manifold"], r["drift"], r["field"], r["max_relative_residual"]) for r in suite["rows"]]
    return ctx.finish({"rows": suite["rows"], "max_relative_residual": suite["max_relative_residual"]},
                      suite["verdicts"], [("bochner.csv", ("manifold", "drift", "field", "max_relative_residual"),
                                           rows)])


def _verify_comparison(ctx: _Ctx) -> int:
    from .geodesics import comparison_check

    radii = ctx.get("radii", [0.5, 1.0, 2.0])
    dirs = ctx.get("dirs", 16)
    step = ctx.get("step", 1e-3)
    if ctx.get("manifold") is None:
        suite = _timed(ctx, "comparison", ex.comparison_suite, radii=tuple(radii), directions=dirs, step=step)
        return ctx.finish({"fixtures": suite["fixtures"]}, suite["verdicts"],
                          [("comparison.csv", suite["columns"], suite["rows"])])
    m, x = _geometry(ctx)
    origin = ctx.get("origin", [0.0, 1.0] if m.kind == "hyperbolic_halfplane" else [0.0] * m.dim)
    rep = _timed(ctx, "comparison", comparison_check, m, x, origin, radii, dirs, step)
    measured = {"K": rep.K, "Lambda": rep.Lambda, "scan": rep.measured, "min_slack_sharp": rep.min_slack_sharp,
                "min_slack_simple": rep.min_slack_simple}
    verdicts = [ex.verdict("sharp-bound slack", rep.min_slack_sharp, -rep.tol, rep.min_slack_sharp >= -rep.tol),
                ex.verdict("simplified-bound slack", rep.min_slack_simple, -rep.tol,
                           rep.min_slack_simple >= -rep.tol)]
    return ctx.finish(measured, verdicts, [("comparison.csv", rep.columns, rep.rows)])


def _verify_appendix(ctx: _Ctx) -> int:
    grid = ctx.get("grid", 41)
    suite = _timed(ctx, "appendix", ex.appendix_suite, count=grid)
    rep = suite["report"]
    rows = [(e["quantity"], e["expected_consistent"], e["deviation"], e["deviation_alternate"])
            for e in rep["entries"]]
    return ctx.finish({"entries": rep["entries"], "christoffel": rep["christoffel"],
                       "spot_values": rep["spot_values"], "discrepancies": rep["discrepancies"]},
                      suite["verdicts"],
                      [("appendix.csv", ("quantity", "expected_consistent", "deviation_literal",
                                         "deviation_alternate"), rows)])


def _verify_counterexample(ctx: _Ctx) -> int:
    delta = ctx.get("delta", 0.5)
    x_list = ctx.get("x_list", [5.0, 10.0, 20.0])
    samples = ctx.get("samples", 200)
    suite = _timed(ctx, "counterexample", ex.counterexample_suite, delta=delta, x_list=tuple(x_list),
                   samples=samples)
    g = suite["growth"]
    rows = list(zip(g["x"], g["loggrad"], g["b"], g["gap"], g["log_u"]))
    return ctx.finish({"bound": suite["bound"], "growth": g, "control": suite["control"]}, suite["verdicts"],
                      [("counterexample.csv", ("x", "loggrad", "b", "gap", "log_u"), rows)])


def _boundary(ctx: _Ctx):
    from .solver.boundary import Boundary, boundary_preset

    name = ctx.get("boundary", "constant")
    params = ctx.get("boundary_params", {}) or {}
    if name != "file":
        return boundary_preset(name, **params)
    path = ctx.get("boundary_file")
    if not path:
        raise UsageError("--boundary file needs --boundary-file")
    header, rows = rp.read_csv(path)
    if [h.strip() for h in header[:3]] != ["x", "y", "u"]:
        raise UsageError(f"{path}: expected header x,y,u")
    table = {(round(float(r[0]), 12), round(float(r[1]), 12)): float(r[2]) for r in rows}

    def fn(x, y):
        out = np.full(np.broadcast(x, y).shape, np.nan)
        X, Y = np.broadcast_arrays(x, y)
        for idx in np.ndindex(out.shape):
            out[idx] = table.get((round(float(X[idx]), 12), round(float(Y[idx]), 12)), np.nan)
        return out

    def checked(x, y):
        v = fn(x, y)
        edge = np.concatenate([v[0], v[-1], v[:, 0], v[:, -1]]) if v.ndim == 2 else v
        if np.any(np.isnan(edge)):
            raise UsageError(f"{path} does not cover every boundary node")
        return np.nan_to_num(v)

    return Boundary(checked, "file", {"path": str(path)})


def _solve(ctx: _Ctx) -> int:
    from .solver.fd2d import log_gradient_sup, solve_elliptic_2d

    m, x = _geometry(ctx)
    nl = build_nonlinearity({k: ctx.get(k) for k in ("nl", "nl_c", "nl_a", "nl_b", "nl_sigma")
                             if ctx.get(k) is not None})
    rect = ctx.get("rect", [0.0, 1.0, 0.0, 1.0])
    if len(rect) != 4:
        raise UsageError("--rect needs X0,X1,Y0,Y1")
    h, cells = ctx.get("h"), ctx.get("cells")
    if h is None and cells is None:
        cells = ctx.resolved["cells"] = 64
    tol = ctx.get("newton_tol", 1e-8)
    sol = _timed(ctx, "solve", solve_elliptic_2d, m, x, nl, np.reshape(rect, (2, 2)), _boundary(ctx), h=h,
                 cells=cells, newton_tol=tol, max_iter=ctx.get("max_iter", 50),
                 require_positive=bool(ctx.get("require_positive", False)), threads=ctx.threads)
    measured = {"solver": sol.summary(), "newton_history": sol.history, "linear_iterations": sol.linear_iterations}
    if sol.values.min() > 0:
        q, at = log_gradient_sup(sol)
        measured["log_gradient_sup_sq"] = q
        measured["log_gradient_argmax"] = at
    rinf = sol.recompute_residual_inf()
    verdicts = [ex.verdict("recomputed residual", rinf, tol, rinf <= tol)]
    mesh = sol.mesh
    rows = zip(mesh[0].ravel(), mesh[1].ravel(), sol.values.ravel())
    return ctx.finish(measured, verdicts, [("grid.csv", ("x", "y", "u"), rows)])


def _estimate(ctx: _Ctx) -> int:
    from .estimates import (EstimateParams, cubic_from_params, depressed_cubic_discriminant, depressed_cubic_roots,
                            gradient_bound_bracket, harnack_factor)

    n = ctx.get("n")
    if n is None:
        raise UsageError("estimate needs --n")
    params = EstimateParams(n, ctx.get("K", 0.0), ctx.get("Lambda", 0.0), ctx.get("alpha", 0.0),
                            ctx.get("beta", 0.0), ctx.get("R", math.inf), ctx.get("Cn"))
    raw = gradient_bound_bracket(params, raw=True)
    if ctx.get("raw_bracket", False):
        print(format_number(raw))
        return EXIT_PASS
    cubic = cubic_from_params(params, ctx.get("A"))
    disc = depressed_cubic_discriminant(cubic)
    measured = {"params": params.as_dict(), "bracket_raw": raw, "bracket": gradient_bound_bracket(params),
                "gamma": params.gamma, "cubic": {"p": cubic.p, "q": cubic.q, "A": cubic.A, "discriminant": disc}}
    verdicts = []
    if disc >= -1e-12 * max(1.0, abs(cubic.p) ** 3) and cubic.p < 0:
        roots = depressed_cubic_roots(cubic)
        measured["cubic"]["roots"] = list(roots)
        cap = 2 / math.sqrt(3) * math.sqrt(-cubic.p)
        verdicts.append(ex.verdict("largest root <= (2/sqrt 3) sqrt(-p)", roots[-1], cap + 1e-12,
                                   roots[-1] <= cap + 1e-12))
    d = ctx.get("distance")
    if d is not None:
        measured["harnack_factor"] = harnack_factor(params, d, ctx.get("C1"), ctx.get("C2", 1.0))
    if not ctx.args.quiet:
        print(f"bracket {format_number(measured['bracket'])} (raw {format_number(raw)}, Cn {format_number(params.Cn)})")
    return ctx.finish(measured, verdicts)


def _gradient_sweep(ctx: _Ctx) -> int:
    cells = ctx.get("cells", 128)
    sweep = _timed(ctx, "gradient_sweep", ex.gradient_sweep, cells=cells, Cn=ctx.get("Cn"), threads=ctx.threads)
    sharp = _timed(ctx, "sharpness", ex.sharpness_suite)
    rows = [(r["fixture"], r["R"], r["measured"], r["bracket"], r["Cn"] * r["bracket"], r["K"], r["Lambda"],
             r["passed"]) for r in sweep["rows"]]
    return ctx.finish({"rows": sweep["rows"], "empirical_constant": sweep["empirical_constant"],
                       "sharpness": sharp["report"]}, sweep["verdicts"] + sharp["verdicts"],
                      [("gradient_sweep.csv", ("fixture", "R", "measured", "bracket", "bound", "K", "Lambda",
                                               "passed"), rows)])


def _liouville(ctx: _Ctx) -> int:
    R_list = ctx.get("R_list", [1.0, 2.0, 4.0])
    cells = ctx.get("cells", 128)
    variant = ctx.get("variant", "literal")
    suite = _timed(ctx, "liouville", ex.liouville_suite, R_list=tuple(R_list), cells=cells, variant=variant,
                   threads=ctx.threads)
    rows = [("paraboloid", r, q) for r, q in zip(suite["paraboloid"]["R"], suite["paraboloid"]["Q_sup"])]
    rows += [("euclidean", r, q) for r, q in zip(suite["euclidean_control"]["R"], suite["euclidean_control"]["Q_sup"])]
    return ctx.finish({"paraboloid": suite["paraboloid"], "euclidean_control": suite["euclidean_control"]},
                      suite["verdicts"], [("liouville.csv", ("fixture", "R", "Q_sup"), rows)])


def _acceptance(ctx: _Ctx) -> int:
    from .acceptance import criterion_line, run_acceptance

    only = ctx.get("only")
    progress = (lambda res: ctx.say(criterion_line(res))) if not ctx.args.quiet else None
    results, timings = run_acceptance(threads=ctx.threads, only=only, progress=progress)
    ctx.timings.update(timings)
    verdicts = [ex.verdict(f"criterion {r['criterion']}: {r['title']}", r["failed_checks"], r["tolerance"],
                           r["passed"]) for r in results]
    return ctx.finish({"criteria": results}, verdicts, echo=False)


COMMANDS = {
    ("verify", "bochner"): _verify_bochner,
    ("verify", "comparison"): _verify_comparison,
    ("verify", "appendix"): _verify_appendix,
    ("verify", "counterexample"): _verify_counterexample,
    ("solve", None): _solve,
    ("estimate", None): _estimate,
    ("experiment", "gradient-sweep"): _gradient_sweep,
    ("experiment", "liouville"): _liouville,
    ("acceptance", None): _acceptance,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        target = getattr(args, "target", None)
        name = args.command if target is None else f"{args.command} {target}"
        ctx = _Ctx(args, name)
        ctx.threads
        return COMMANDS[(args.command, target)](ctx)
    except UsageError as exc:
        print(f"driftgeom: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (DriftGeomError, ArithmeticError, ValueError, OSError) as exc:
        print(f"driftgeom: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
