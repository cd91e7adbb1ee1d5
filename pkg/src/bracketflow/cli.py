"""Command-line front end.

    bracketflow flow   (--bracket FILE | --matrix FILE | --example NAME) [flow options]
    bracketflow aa     (--matrix FILE | --example NAME | --jordan-type D0,D1,..) [--classify] [--construct] [--flow]
    bracketflow verify SUITE [--example NAME] [--seed N] [--t-end R]

Exit codes: 0 success, 2 input error, 3 integration aborted.  ``verify``
exits 1 when a property fails.
"""

from __future__ import annotations

import argparse
import inspect
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import almost_abelian as aa
from . import io
from .brackets import Bracket, is_lie, is_nilpotent, jacobi_residual, make_almost_abelian
from .flows import (
    detect_fixed_point,
    growth_envelope_check,
    integrate_bracket_flow,
    integrate_gauged_flow,
    integrate_normalized_flow,
    integrate_split_normalized_flow,
)
from .integrate import FlowConfig, IntegrationAborted
from .library import EXAMPLE_NAMES, example_bracket, example_matrix, parse_jordan_type
from .suites import SUITES

log = logging.getLogger("bracketflow")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_ABORT = 0, 1, 2, 3
EXAMPLE_TOL = 1e-12   # library brackets must satisfy Jacobi to this relative level


class InputError(Exception):
    pass


# ---------------------------------------------------------------- input

def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def load_bracket(args) -> Bracket:
    try:
        if args.bracket:
            mu = io.parse_bracket(_read_text(args.bracket), args.bracket)
        elif args.matrix:
            mu = make_almost_abelian(io.parse_matrix(_read_text(args.matrix), args.matrix))
        else:
            mu = example_bracket(args.example)
            if jacobi_residual(mu) >= EXAMPLE_TOL * max(mu.norm_sq(), 1.0):
                raise InputError(f"library example {args.example} fails validation")
    except io.FormatError as exc:
        raise InputError(str(exc)) from None
    except KeyError:
        raise InputError(f"unknown example {args.example!r}; known: "
                         f"{', '.join(EXAMPLE_NAMES)}") from None
    if not np.isfinite(mu.norm_sq()):
        raise InputError("bracket too large: its squared norm overflows")
    if not is_lie(mu):
        raise InputError(f"input violates the Jacobi identity (residual "
                         f"{jacobi_residual(mu):.3g})")
    return mu


def load_matrix(args) -> np.ndarray:
    try:
        if args.matrix:
            A = io.parse_matrix(_read_text(args.matrix), args.matrix)
        elif args.example:
            A = example_matrix(args.example)
        else:
            A = aa.nilpotent_soliton_canonical(parse_jordan_type(args.jordan_type)).A
    except io.FormatError as exc:
        raise InputError(str(exc)) from None
    except KeyError:
        raise InputError(f"unknown matrix example {args.example!r}; known: e12, jordan2, "
                         f"diag12, rot2, canonical:<d0,d1,...>") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    with np.errstate(over="ignore"):
        if not np.isfinite(np.sum(np.abs(A) ** 2)):
            raise InputError("matrix too large: its squared norm overflows")
    return A


def flow_config(args) -> FlowConfig:
    kw = dict(t_end=args.t_end, record_stride=args.record_stride)
    if args.step is not None:
        kw.update(integrator="rk4", step=args.step)
    if args.tol is not None:
        kw.update(abs_tol=args.tol, rel_tol=args.tol)
    try:
        return FlowConfig(**kw)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _out_dir(args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


def _emit(out: Path, name: str, record: dict):
    text = io.format_report(record)
    (out / name).write_text(text)
    sys.stdout.write(text)


# ---------------------------------------------------------------- flow

def _summary(trace, cfg: FlowConfig, extra=None) -> dict:
    fp = detect_fixed_point(trace, cfg.eps_fix, cfg.dwell)
    rec = {
        "kind": trace.kind,
        "status": trace.status,
        "t_final": trace.t_final,
        "samples": len(trace),
        "final_norm_sq": float(trace["norm_sq"][-1]),
        "final_field_norm": float(trace["field_norm"][-1]),
        "lambda_hat": float(trace["lambda_hat"][-1]),
        "soliton_residual": float(trace["soliton_residual"][-1]),
        "fixed_point": "none" if fp is None else f"t={io.fmt(fp[0])}",
    }
    if extra:
        rec.update(extra)
    if trace.warnings:
        rec["warnings"] = "; ".join(trace.warnings)
    return rec


def cmd_flow(args) -> int:
    mu = load_bracket(args)
    cfg = flow_config(args)
    out = _out_dir(args)
    modes = [m for m in ("normalized", "gauged", "split") if getattr(args, m)]
    if len(modes) > 1:
        raise InputError("choose at most one of --normalized, --gauged, --split")
    mode = modes[0] if modes else "bracket"
    try:
        if mode == "bracket":
            trace = integrate_bracket_flow(mu, cfg)
        elif mode == "normalized":
            trace = integrate_normalized_flow(mu, cfg)
        elif mode == "gauged":
            trace = integrate_gauged_flow(mu, cfg)
        else:
            run = integrate_split_normalized_flow(mu, cfg)
            trace = run.eta0
            io.write_trace_csv(out / "trace_eta1.csv", run.eta1)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    except IntegrationAborted as exc:
        if exc.trace is not None:
            io.write_trace_csv(out / "trace.csv", exc.trace)
            _emit(out, "summary.txt", _summary(exc.trace, cfg, {"error": str(exc)}))
        else:
            log.error("%s", exc)
        return EXIT_ABORT
    io.write_trace_csv(out / "trace.csv", trace, ("centre_angle",) if mode == "gauged" else ())
    extra = {}
    if mode == "bracket":
        env = growth_envelope_check(trace)
        if env.applicable:
            extra = {"envelope_sup_t_norm_sq": env.sup_t_norm_sq,
                     "envelope_bounded": env.bounded,
                     "envelope_c_hat": env.c_hat,
                     "envelope_lower": env.lower_envelope}
        else:
            extra = {"envelope": "inapplicable (not nilpotent)"}
    if mode == "split":
        extra = {"final_phi": float(trace["phi"][-1])}
    _emit(out, "summary.txt", _summary(trace, cfg, extra))
    return EXIT_OK


# ---------------------------------------------------------------- almost abelian

def _report_record(rep: aa.SolitonReport) -> dict:
    rec = {
        "class": rep.matrix_class,
        "exists": rep.exists,
        "type": rep.soliton_type,
        "lambda": rep.lam,
        "residual": rep.residual,
        "rel_tol": rep.rel_tol,
        "conditioning_warning": rep.warning,
    }
    if rep.jordan_type is not None:
        rec["jordan_type"] = str(rep.jordan_type)
    rec["representative"] = rep.representative.A if rep.representative is not None else None
    if rep.notes:
        rec["notes"] = "; ".join(rep.notes)
    return rec


def cmd_aa(args) -> int:
    sources = [s for s in (args.matrix, args.example, args.jordan_type) if s]
    if len(sources) != 1:
        raise InputError("give exactly one of --matrix, --example, --jordan-type")
    A = load_matrix(args)
    out = _out_dir(args)
    if not (args.classify or args.construct or args.flow):
        args.classify = True
    status = EXIT_OK
    if args.construct:
        if not args.jordan_type:
            raise InputError("--construct needs --jordan-type")
        chk = aa.verify_nilpotent_soliton(A)
        io.write_matrix(out / "canonical.txt", A)
        _emit(out, "construct.txt", {
            "jordan_type": args.jordan_type,
            "residual": chk.residual,
            "relation_residual": chk.relation_residual,
            "cross_residual": chk.cross_residual,
            "lambda": -1.0,
            "representative": A,
        })
    if args.classify:
        _emit(out, "report.txt", _report_record(aa.soliton_decision(A, args.rel_tol)))
    if args.flow:
        cfg = flow_config(args)
        extra_cols = ("normality_defect", "trace_power_drift")
        try:
            trace = aa.integrate_matrix_flow(A, cfg)
        except IntegrationAborted as exc:
            if exc.trace is not None:
                io.write_trace_csv(out / "trace.csv", exc.trace, extra_cols)
                _emit(out, "summary.txt", _summary(exc.trace, cfg, {"error": str(exc)}))
            log.error("%s", exc)
            return EXIT_ABORT
        io.write_trace_csv(out / "trace.csv", trace, extra_cols)
        io.write_matrix(out / "final_matrix.txt", trace.final)
        _emit(out, "summary.txt", _summary(trace, cfg, {
            "final_normality_defect": float(trace["normality_defect"][-1]),
            "trace_power_drift": aa.trace_power_drift(trace),
        }))
    return status


# ---------------------------------------------------------------- verify

def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        log.error("unknown suite %r; known: %s", args.suite, ", ".join(SUITES))
        return EXIT_INPUT
    fn = SUITES[args.suite]
    params = inspect.signature(fn).parameters
    kw = {}
    if args.seed is not None and "seed" in params:
        kw["seed"] = args.seed
    if args.t_end is not None and "t_end" in params:
        kw["t_end"] = args.t_end
    if args.example is not None or args.bracket is not None:
        if "mu" not in params:
            log.error("suite %r does not take an example", args.suite)
            return EXIT_INPUT
        kw["mu"] = load_bracket(args)
    results = fn(**kw)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print(f"suite {args.suite}: {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bracketflow", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add_flow_options(sp, default_t_end=10.0):
        sp.add_argument("--t-end", type=float, default=default_t_end)
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--step", type=float, help="fixed-step RK4 with this step")
        g.add_argument("--tol", type=float, help="adaptive 4(5) with abs = rel tolerance")
        sp.add_argument("--record-stride", type=float, default=0.1)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=".", help="output directory (default: current)")

    f = sub.add_parser("flow", help="integrate a bracket flow and write a trace CSV")
    src = f.add_mutually_exclusive_group(required=True)
    src.add_argument("--bracket", metavar="FILE")
    src.add_argument("--matrix", metavar="FILE", help="almost-abelian bracket of this matrix")
    src.add_argument("--example", metavar="NAME", help=", ".join(EXAMPLE_NAMES))
    f.add_argument("--normalized", action="store_true")
    f.add_argument("--gauged", action="store_true")
    f.add_argument("--split", action="store_true", help="centre-split normalized system")
    add_flow_options(f)
    f.set_defaults(func=cmd_flow)

    a = sub.add_parser("aa", help="almost-abelian matrix flow and soliton classification")
    a.add_argument("--matrix", metavar="FILE")
    a.add_argument("--example", metavar="NAME")
    a.add_argument("--jordan-type", metavar="D0,D1,...")
    a.add_argument("--classify", action="store_true")
    a.add_argument("--construct", action="store_true")
    a.add_argument("--flow", action="store_true")
    a.add_argument("--rel-tol", type=float, default=1e-10)
    add_flow_options(a)
    a.set_defaults(func=cmd_aa)

    v = sub.add_parser("verify", help="run a built-in property suite")
    v.add_argument("suite", help=", ".join(SUITES))
    v.add_argument("--example", metavar="NAME")
    v.add_argument("--bracket", metavar="FILE")
    v.add_argument("--seed", type=int)
    v.add_argument("--t-end", type=float)
    v.set_defaults(func=cmd_verify, matrix=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
