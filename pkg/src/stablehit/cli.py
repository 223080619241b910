"""Command-line front end.

Every subcommand takes ``--alpha`` and ``--rho`` and writes CSV (header row, '.' decimal,
'\\n' line ends) or JSON (sorted keys, a ``schema`` field). Exit status: 0 on success,
2 on usage or parameter errors, 1 when a numerical routine fails to converge or a
self-test threshold is missed.

Defaults can come from a key=value file given by ``--config``; keys are option names
without the leading dashes ('-' or '_' both accepted) and flags on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

SCHEMA_VERSION = 1
THREADS_ENV = "STABLEHIT_THREADS"


class UsageError(ValueError):
    pass


# --- parsing helpers ----------------------------------------------------------------------

def parse_grid(text: str) -> list[float]:
    """``a,b,c`` or ``geom:lo:hi:n`` or ``lin:lo:hi:n``."""
    text = text.strip()
    if text.startswith(("geom:", "lin:")):
        kind, lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
        if n < 1:
            raise UsageError("grid needs at least one point")
        pts = np.geomspace(lo, hi, n) if kind == "geom" else np.linspace(lo, hi, n)
        return [float(p) for p in pts]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {text!r}") from exc


def read_config(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            k, v = (p.strip() for p in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def emit(rows: list[dict], columns: list[str], meta: dict, fmt: str, output: str | None,
         schema: str) -> None:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])
        text = buf.getvalue()
    else:
        doc = {"schema": f"stablehit.{schema}/{SCHEMA_VERSION}", "meta": meta, "columns": columns,
               "rows": [[r[c] for c in columns] for r in rows]}
        text = dump_json(doc)
    write_text(text, output)


def dump_json(doc) -> str:
    return json.dumps(_plain(doc), indent=2, sort_keys=True, allow_nan=True) + "\n"


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def write_text(text: str, output: str | None) -> None:
    if output and output != "-":
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- subcommands ---------------------------------------------------------------------------

def _model(args):
    from .model import make_model
    return make_model(args.alpha, args.rho)


def _policy(args):
    from .quadrature import DEFAULT_POLICY, QuadPolicy
    kw = {}
    if args.rel_tol is not None:
        kw["rel_tol"] = args.rel_tol
    if args.abs_tol is not None:
        kw["abs_tol"] = args.abs_tol
    if args.max_evals is not None:
        kw["max_evals"] = args.max_evals
    return QuadPolicy(**{**DEFAULT_POLICY.__dict__, **kw})


def _model_meta(m) -> dict:
    return {"alpha": m.alpha, "rho": m.rho, "theta": m.theta}


def cmd_eigen(args) -> int:
    from .eigen import MINUS, PLUS, EigenEvaluator, f_eigen, g_eigen
    m = _model(args)
    e = EigenEvaluator(m, PLUS if args.side == "plus" else MINUS)
    xs = parse_grid(args.x)
    if any(x == 0 for x in xs):
        raise UsageError("x = 0 is excluded (G jumps there)")
    F = f_eigen(e, np.array(xs))
    G = g_eigen(e, np.array(xs))
    rows = [{"x": x, "F": float(f), "G": float(g)} for x, f, g in zip(xs, F, G)]
    emit(rows, ["x", "F", "G"], {**_model_meta(m), "side": args.side}, args.format, args.output,
         "eigen")
    return 0


def _t_values(args) -> list[float]:
    if args.t is not None and args.t_grid is not None:
        raise UsageError("--t and --t-grid are mutually exclusive")
    if args.t is None and args.t_grid is None:
        raise UsageError("one of --t or --t-grid is required")
    return [args.t] if args.t is not None else parse_grid(args.t_grid)


def _survival_like(args, kind: str) -> int:
    from .hitting import survival_curve
    m = _model(args)
    ts = _t_values(args)
    rows = []
    for x in parse_grid(args.x):
        c = survival_curve(m, x, ts, args.constant_mode, kind, _policy(args))
        for ti, v, er in zip(c.t, c.values, c.abs_err):
            rows.append({"x": x, "t": float(ti), "value": float(v), "abs_err": float(er),
                         "constant_used": c.constant_used})
    emit(rows, ["x", "t", "value", "abs_err", "constant_used"],
         {**_model_meta(m), "kind": kind, "constant_mode": args.constant_mode},
         args.format, args.output, kind)
    return 0


def cmd_survival(args) -> int:
    return _survival_like(args, "survival")


def cmd_density(args) -> int:
    return _survival_like(args, "density")


def cmd_resolvent(args) -> int:
    from .resolvent import hitting_laplace, u_lambda
    m = _model(args)
    rows = []
    for lam in parse_grid(args.lam):
        for x in parse_grid(args.x):
            u = float(u_lambda(m, lam, x, args.method))
            h = hitting_laplace(m, lam, x, args.method) if x != 0 else 1.0
            rows.append({"lambda": lam, "x": x, "u_lambda": u, "hitting_laplace": h})
    emit(rows, ["lambda", "x", "u_lambda", "hitting_laplace"],
         {**_model_meta(m), "method": args.method}, args.format, args.output, "resolvent")
    return 0


PAIR_FIXTURES = {
    "right-left": ("explog(side=+,s=1)", "explog(side=-,s=1)"),
    "mixed": ("explog(side=+,s=1)+explog(side=-,s=2)", "explog(side=+,s=1.5)"),
    "right-right": ("explog(side=+,s=1)", "explog(side=+,s=2)"),
}


def _pair(args, m):
    from .testfn import RayTransformPair, parse_test_function
    if args.f or args.g:
        if not (args.f and args.g):
            raise UsageError("--f and --g must be given together")
        fs, gs = args.f, args.g
    else:
        if args.pair not in PAIR_FIXTURES:
            raise UsageError(f"unknown pair fixture {args.pair!r}; choose from {sorted(PAIR_FIXTURES)}")
        fs, gs = PAIR_FIXTURES[args.pair]
    return RayTransformPair(parse_test_function(fs), parse_test_function(gs), m)


def spectral_report(m, pair, lams, ss, ts, verify: bool = True) -> dict:
    from . import spectral as sp
    rep = {"model": _model_meta(m), "f": str(pair.f), "g": str(pair.g), "routes": [],
           "cut": [], "bilinear": []}
    for lam in lams:
        ray = sp.phi_ray_all(pair, m, lam).value
        row = {"lambda": lam, "phi_ray": [float(np.real(v)) for v in ray],
               "phi4_ray": sp.phi_ray(pair, m, lam, 4).real}
        if verify:
            four = sp.phi_fourier_all(pair, m, lam).value
            rel = np.abs(np.asarray(four) - np.real(ray)) / np.abs(np.real(ray))
            f4 = sp.phi_fourier(pair, m, lam, 4).real
            row["route_rel_residual"] = [float(r) for r in rel] + [abs(f4 - row["phi4_ray"]) / abs(f4)]
            row["phi0_closed_rel_residual"] = abs(ray[0].real - sp.phi0_closed(m, lam).real) / ray[0].real
        rep["routes"].append(row)
    for s in ss:
        res = sp.identity_residuals(pair, m, s)
        tab = sp.kl_table(pair, m, [s])
        lim = sp.boundary_limit(pair, m, s)
        bv = tab.boundary_values()[:, 0]
        res["sokhotski_abs_residual"] = float(np.max(np.abs(lim - bv)))
        res["K"] = [float(v) for v in tab.K[:, 0]]
        res["L"] = [float(v) for v in tab.L[:, 0]]
        rep["cut"].append(res)
    if ts:
        eig = sp.eigenform_table(pair, m, min(ts))
        ref = sp.time_domain_table(pair, m, min(ts)).value(ts)
        pre = sp.calibrated_prefactor()
        for ti, r in zip(ts, ref):
            v = float(eig.value(ti, pre)[0])
            rep["bilinear"].append({"t": ti, "reference": float(r), "eigenform": v,
                                    "prefactor": pre, "rel_residual": abs(v - r) / abs(r)})
    return rep


def cmd_spectral_check(args) -> int:
    m = _model(args)
    pair = _pair(args, m)
    rep = spectral_report(m, pair, parse_grid(args.lam), parse_grid(args.s),
                          parse_grid(args.t) if args.t else [], verify=args.verify)
    write_text(dump_json({"schema": f"stablehit.spectral-check/{SCHEMA_VERSION}", **rep}), args.output)
    return 0


def cmd_mc(args) -> int:
    from .montecarlo import McConfig, compare_with_quadrature, estimate_survival
    m = _model(args)
    cfg = McConfig(m, args.paths, args.dt, tuple(parse_grid(args.eps)), args.horizon or args.t,
                   args.seed)
    meta = {**_model_meta(m), "x": args.x, "t": args.t, "paths": args.paths, "dt": args.dt,
            "eps": list(cfg.eps_levels), "seed": args.seed}
    if args.action == "compare":
        body = compare_with_quadrature(cfg, args.x, args.t, workers=args.threads)
    else:
        body = {"estimate": estimate_survival(cfg, args.x, args.t, workers=args.threads).as_dict()}
    write_text(dump_json({"schema": f"stablehit.mc/{SCHEMA_VERSION}", "meta": meta, **body}),
               args.output)
    return 0


def cmd_calibrate(args) -> int:
    from .hitting import calibrate_constant
    m = _model(args)
    rep = calibrate_constant(m, write=args.output is None)
    out = {"schema": f"stablehit.calibrate/{SCHEMA_VERSION}", "survival_constant": rep}
    if args.prefactor:
        from . import spectral as sp
        path = sp.PREFACTOR_REPORT if args.output is None else None
        out["bilinear_prefactor"] = sp.calibrate_prefactor(sp.default_calibration_cases(),
                                                           report_path=path)
    write_text(dump_json(out), args.output)
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest
    rep = run_selftest(_model(args))
    write_text(dump_json({"schema": f"stablehit.selftest/{SCHEMA_VERSION}", **rep}), args.output)
    return 0 if rep["passed"] else 1


# --- parser ----------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, required=True, help="stability index, 1 < alpha < 2")
    common.add_argument("--rho", type=float, required=True, help="positivity parameter P(X_1 > 0)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", "-o", default=None, help="output file (default: stdout)")
    common.add_argument("--config", default=None, help="key=value file with defaults")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker count (default: ${THREADS_ENV} or 1)")
    common.add_argument("--rel-tol", type=float, default=None)
    common.add_argument("--abs-tol", type=float, default=None)
    common.add_argument("--max-evals", type=int, default=None)
    common.add_argument("--verbose", "-v", action="store_true")

    p = argparse.ArgumentParser(prog="stablehit", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eigen", parents=[common], help="F and G on an x-grid")
    e.add_argument("--side", choices=("plus", "minus"), default="plus")
    e.add_argument("--x", required=True, help="grid: a,b,c | lin:lo:hi:n | geom:lo:hi:n")
    e.set_defaults(func=cmd_eigen)

    for name, func in (("survival", cmd_survival), ("density", cmd_density)):
        s = sub.add_parser(name, parents=[common], help=f"hitting-time {name}")
        s.add_argument("--x", required=True)
        s.add_argument("--t", type=float, default=None)
        s.add_argument("--t-grid", default=None)
        s.add_argument("--constant-mode", choices=("calibrated", "candidate_1", "candidate_asin"),
                       default="calibrated")
        s.set_defaults(func=func)

    r = sub.add_parser("resolvent", parents=[common], help="u_lambda(x) and E^x exp(-lambda tau_0)")
    r.add_argument("--lam", required=True)
    r.add_argument("--x", required=True)
    r.add_argument("--method", choices=("fourier", "rotated"), default="fourier")
    r.set_defaults(func=cmd_resolvent)

    sc = sub.add_parser("spectral-check", parents=[common], help="JSON report of spectral identities")
    sc.add_argument("--pair", default="right-left", help=f"fixture: {', '.join(sorted(PAIR_FIXTURES))}")
    sc.add_argument("--f", default=None, help="test function, e.g. explog(side=+,s=1)")
    sc.add_argument("--g", default=None)
    sc.add_argument("--lam", default="1")
    sc.add_argument("--s", default="0.5,1,2")
    sc.add_argument("--t", default=None, help="times for the bilinear comparison (slow)")
    sc.add_argument("--verify", action="store_true", help="also evaluate the Fourier route")
    sc.set_defaults(func=cmd_spectral_check)

    mc = sub.add_parser("mc", parents=[common], help="Monte Carlo survival estimate")
    mc.add_argument("action", nargs="?", choices=("estimate", "compare"), default="estimate")
    mc.add_argument("--x", type=float, required=True)
    mc.add_argument("--t", type=float, required=True)
    mc.add_argument("--paths", type=int, default=100_000)
    mc.add_argument("--dt", type=float, default=1e-4)
    mc.add_argument("--eps", default="0.02,0.01")
    mc.add_argument("--horizon", type=float, default=None)
    mc.add_argument("--seed", type=int, default=0)
    mc.set_defaults(func=cmd_mc)

    c = sub.add_parser("calibrate", parents=[common], help="resolve the normalizing constants")
    c.add_argument("--prefactor", action="store_true", help="also calibrate the bilinear prefactor")
    c.set_defaults(func=cmd_calibrate)

    st = sub.add_parser("selftest", parents=[common], help="run the identity suite")
    st.set_defaults(func=cmd_selftest)
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cfg = read_config(known.config)
        # give subparsers the values as defaults; explicit flags still override
        sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
        for sp in sub_action.choices.values():
            valid = {a.dest: a for a in sp._actions}
            sp.set_defaults(**{k: (valid[k].type(v) if valid[k].type else v)
                               for k, v in cfg.items() if k in valid})
            for a in sp._actions:
                if a.dest in cfg:
                    a.required = False
    return parser.parse_args(argv)


def run(argv: list[str] | None = None) -> int:
    from .model import ParameterError
    from .quadrature import QuadratureError

    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    except (UsageError, OSError, ValueError) as exc:
        print(f"stablehit: error: {exc}", file=sys.stderr)
        return 2
    if args.threads is None:
        args.threads = int(os.environ.get(THREADS_ENV, "1"))
    if args.threads < 1:
        print("stablehit: error: --threads must be at least 1", file=sys.stderr)
        return 2
    if args.verbose:
        import logging
        logging.basicConfig(level=logging.INFO)
    try:
        return args.func(args)
    except (ParameterError, UsageError) as exc:
        print(f"stablehit: error: {exc}", file=sys.stderr)
        return 2
    except QuadratureError as exc:
        print(f"stablehit: numerical failure: {exc}", file=sys.stderr)
        return 1
    except ArithmeticError as exc:
        print(f"stablehit: numerical failure: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"stablehit: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
