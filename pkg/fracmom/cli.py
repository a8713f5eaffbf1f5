"""Command-line front end.

Usage:
  fracmom forward --input problem.json [--emit-delta table.json]
  fracmom check   --input table.json
  fracmom kernel  --input problem.json "s*(1 + t1^2) - 1"
  fracmom psd     --input problem.json

Exit codes: 0 pass, 1 a condition failed (witness in the report),
2 nothing was verified (bad input or missing data).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from . import __version__
from .config import DEFAULT
from .errors import CoverageError, FracMomError, ProblemFileError
from .frac_poly import Mode
from .io import (
    ProblemFile,
    build_delta_table,
    build_gamma_table,
    build_log_measure,
    build_measure,
    build_problem_polys,
    build_tolerance,
    build_window,
    emit_delta_problem,
    load_problem,
    resolve_mode,
    write_json,
)
from .measures import AtomicMeasure, gamma, laplace_pushforward, support_check
from .moments import DeltaFamily, ComputedDelta, Window, build_basis, encode_exponent, encode_scalar, gram, psd_check, shifted_gram
from .parser import parse_extended
from .theta_kernel import ProblemPolys, kernel_test
from .verifier import continuity_probe, coverage_check, verify_all

logger = logging.getLogger(__name__)

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _window_arg(text: str) -> Window:
    try:
        return Window.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="problem file (JSON)")
    common.add_argument("--mode", choices=[m.value for m in Mode], help="override the file's mode")
    common.add_argument("--tolerance", type=float, help="float-mode tolerance (default 1e-9)")
    common.add_argument("--window", type=_window_arg, help="truncation window as D,N,B")
    common.add_argument("--report", choices=["json", "text"], default="json")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    ap = argparse.ArgumentParser(prog="fracmom", description="Verify fractional moment families on finite windows.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    forward = sub.add_parser("forward", parents=[common], help="build delta from a measure and verify it")
    forward.add_argument("--emit-delta", metavar="FILE", help="write the tabulated delta as a problem file")

    sub.add_parser("check", parents=[common], help="verify a tabulated delta family")

    kernel = sub.add_parser("kernel", parents=[common], help="test membership in the kernel of rho")
    kernel.add_argument("expression", help="polynomial in t1..tn and s")

    sub.add_parser("psd", parents=[common], help="print Gram matrices and PSD verdicts")
    return ap


class _Context:
    """Problem file, mode, polynomials, window and tolerance resolved from arguments."""

    def __init__(self, args: argparse.Namespace) -> None:
        self.problem: ProblemFile = load_problem(args.input)
        self.mode: Mode = resolve_mode(self.problem, args.mode)
        self.P: ProblemPolys = build_problem_polys(self.problem, self.mode)
        self.window: Window = build_window(self.problem, self.P, args.window)
        self.tolerance: Optional[float] = build_tolerance(self.problem, self.mode, args.tolerance)

    def measure(self) -> AtomicMeasure:
        if self.problem.measure is not None:
            return build_measure(self.problem, self.mode, self.window.D)
        if self.problem.log_measure is not None:
            if self.mode is Mode.EXACT:
                raise ProblemFileError("log_measure requires float mode", field="mode")
            return laplace_pushforward(build_log_measure(self.problem))
        raise ProblemFileError("a measure or log_measure is required", field="measure")

    def delta(self) -> DeltaFamily:
        if self.problem.delta_table is not None:
            return build_delta_table(self.problem, self.mode)
        return ComputedDelta(self.measure(), self.P)


def _emit(args: argparse.Namespace, payload: Dict[str, Any], text: str) -> None:
    if args.report == "json":
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    else:
        sys.stdout.write(text)


def cmd_forward(args: argparse.Namespace) -> int:
    ctx = _Context(args)
    mu = ctx.measure()
    support = support_check(mu, ctx.P, ctx.tolerance or 0)
    if not support.passed:
        logger.info("%d atoms lie outside the support set", len(support.violations))
    delta = ComputedDelta(mu, ctx.P)

    def gamma_source(alpha: Sequence[Any]) -> Any:
        return gamma(mu, alpha)

    probe = continuity_probe(lambda a: gamma(mu.to_float(), a), ctx.P.n, DEFAULT)
    logger.info("continuity probe: max relative jump %.4g at step %.4g", probe["max_relative_jump"], probe["step"])

    cert = verify_all(delta, gamma_source, ctx.P, ctx.window, ctx.mode, ctx.tolerance)
    if args.emit_delta:
        table = emit_delta_problem(ctx.problem, delta, gamma_source, ctx.P, ctx.window, ctx.mode, ctx.tolerance)
        write_json(args.emit_delta, table)
        logger.info("wrote %s", args.emit_delta)
    sys.stdout.write(cert.to_json() if args.report == "json" else cert.to_text())
    return EXIT_PASS if cert.passed else EXIT_FAIL


def cmd_check(args: argparse.Namespace) -> int:
    ctx = _Context(args)
    if ctx.problem.delta_table is None:
        raise ProblemFileError("check needs a delta_table", field="delta_table")
    delta = build_delta_table(ctx.problem, ctx.mode)
    cert = verify_all(delta, build_gamma_table(ctx.problem, ctx.mode), ctx.P, ctx.window, ctx.mode, ctx.tolerance)
    sys.stdout.write(cert.to_json() if args.report == "json" else cert.to_text())
    return EXIT_PASS if cert.passed else EXIT_FAIL


def cmd_kernel(args: argparse.Namespace) -> int:
    ctx = _Context(args)
    q = parse_extended(args.expression, ctx.P.n, ctx.mode)
    verdict = kernel_test(q, ctx.P)
    if verdict.in_kernel:
        text = "TRUE\n"
    else:
        point = ", ".join(str(x) for x in verdict.witness or ())
        text = f"FALSE\nwitness t = ({point}), rho(q)(t) = {verdict.value}\n"
    _emit(args, verdict.to_dict(), text)
    return EXIT_PASS if verdict.in_kernel else EXIT_FAIL


def _matrix_rows(M: Any) -> List[List[Any]]:
    return [[encode_scalar(x) for x in row] for row in M]


def cmd_psd(args: argparse.Namespace) -> int:
    ctx = _Context(args)
    delta = ctx.delta()
    coverage_check(delta, ctx.P, ctx.window)
    basis = build_basis(ctx.window, ctx.P.n)
    tol = DEFAULT.float_tolerance if ctx.tolerance is None else ctx.tolerance
    M = gram(delta, basis)
    base = psd_check(M, ctx.mode, tol)
    shifted = []
    for k, p in enumerate(ctx.P.polys, start=1):
        Mk = shifted_gram(delta, basis, p)
        shifted.append((k, Mk, psd_check(Mk, ctx.mode, tol)))

    payload = {
        "window": ctx.window.to_dict(),
        "basis": [{"alpha": encode_exponent(a), "beta": b} for a, b in basis],
        "base": {"matrix": _matrix_rows(M), **base.to_dict()},
        "shifted": [{"k": k, "matrix": _matrix_rows(Mk), **v.to_dict()} for k, Mk, v in shifted],
    }
    lines = [f"window {ctx.window}, basis size {len(basis)}"]
    for label, matrix, verdict in [("base", M, base)] + [(f"shifted k={k}", Mk, v) for k, Mk, v in shifted]:
        lines.append(f"{label}: {'PSD' if verdict.psd else 'not PSD'}")
        lines.extend("  [" + ", ".join(str(x) for x in row) + "]" for row in matrix)
        if not verdict.psd:
            lines.append(f"  witness v = {[str(x) for x in verdict.witness or ()]}, v^T M v = {verdict.quadratic_value}")
    _emit(args, payload, "\n".join(lines) + "\n")
    ok = base.psd and all(v.psd for _, _, v in shifted)
    return EXIT_PASS if ok else EXIT_FAIL


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        handler = {"forward": cmd_forward, "check": cmd_check, "kernel": cmd_kernel, "psd": cmd_psd}[args.command]
        return handler(args)
    except CoverageError as exc:
        logger.error("%s", exc)
        _emit(
            args,
            {"error": "coverage", "missing": [{"alpha": encode_exponent(a), "beta": b} for a, b in exc.missing]},
            f"error: {exc}\n",
        )
        return EXIT_INPUT
    except (FracMomError, ValidationError) as exc:
        logger.error("%s", exc)
        _emit(args, {"error": str(exc)}, f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
