"""Run the three moment-family conditions over a window and assemble a certificate.

A PASS means the data is consistent on the checked window only. A FAIL
always carries a finite witness that can be re-evaluated independently.
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .config import DEFAULT, Config
from .errors import CoverageError, MissingEntryError
from .frac_poly import Exponent, Mode, Scalar, add_exponents, as_exponent
from .moments import (
    DeltaFamily,
    GramVerdict,
    Index,
    TabulatedDelta,
    Window,
    build_basis,
    encode_exponent,
    encode_scalar,
    gram,
    index_key,
    psd_check,
    shifted_gram,
)
from .theta_kernel import ProblemPolys

logger = logging.getLogger(__name__)

GammaSource = Union[Callable[[Exponent], Scalar], Mapping[Exponent, Scalar], None]


def _index_dict(index: Optional[Index]) -> Optional[Dict[str, Any]]:
    if index is None:
        return None
    alpha, beta = index
    return {"alpha": encode_exponent(alpha), "beta": beta}


def _resolve_tolerance(mode: Mode, tol: Any, config: Config) -> Scalar:
    if mode is Mode.EXACT:
        return Fraction(0)
    return float(config.float_tolerance if tol is None else tol)


@dataclass(frozen=True)
class Condition1Report:
    passed: bool
    checked: int
    mismatches: Tuple[Tuple[Exponent, Scalar, Scalar], ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pass": self.passed,
            "checked": self.checked,
            "mismatches": [
                {"alpha": encode_exponent(a), "delta": encode_scalar(d), "gamma": encode_scalar(g)}
                for a, d, g in self.mismatches
            ],
        }


@dataclass(frozen=True)
class Condition2Report:
    passed: bool
    checked: int
    worst_residual: Scalar
    index: Optional[Index] = None
    worst_index: Optional[Index] = None
    failures: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pass": self.passed,
            "checked": self.checked,
            "failures": self.failures,
            "worst_residual": encode_scalar(self.worst_residual),
            "index": _index_dict(self.index),
            "worst_index": _index_dict(self.worst_index),
        }


@dataclass(frozen=True)
class Condition3Report:
    passed: bool
    verdicts: Tuple[Tuple[int, GramVerdict], ...] = ()

    def to_list(self) -> List[Dict[str, Any]]:
        return [{"k": k, **verdict.to_dict()} for k, verdict in self.verdicts]


@dataclass(frozen=True)
class Certificate:
    window: Window
    mode: Mode
    tolerance: Scalar
    base_psd: GramVerdict
    cond1: Condition1Report
    cond2: Condition2Report
    cond3: Condition3Report
    reasons: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return not self.reasons

    @property
    def overall(self) -> str:
        return "PASS" if self.passed else "FAIL"

    @property
    def scope(self) -> str:
        if self.passed:
            return f"consistent at window {self.window}; not a proof of representability"
        return f"refuted at window {self.window}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "overall": self.overall,
            "reasons": list(self.reasons),
            "scope": self.scope,
            "window": self.window.to_dict(),
            "mode": self.mode.value,
            "tolerance": encode_scalar(self.tolerance),
            "base_psd": self.base_psd.to_dict(),
            "cond1": self.cond1.to_dict(),
            "cond2": self.cond2.to_dict(),
            "cond3": self.cond3.to_list(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"{self.overall}: {self.scope}", f"mode {self.mode.value}, tolerance {self.tolerance}"]
        base = self.base_psd
        lines.append(f"  base PSD ({base.size}x{base.size}): {'pass' if base.psd else 'FAIL'}")
        if not base.psd:
            lines.append(f"    witness v = {list(map(str, base.witness or ()))}, v^T M v = {base.quadratic_value}")
        c1 = self.cond1
        lines.append(f"  condition 1 ({c1.checked} exponents): {'pass' if c1.passed else 'FAIL'}")
        for alpha, d, g in c1.mismatches:
            lines.append(f"    alpha {tuple(map(str, alpha))}: delta {d} != gamma {g}")
        c2 = self.cond2
        lines.append(
            f"  condition 2 ({c2.checked} indices): {'pass' if c2.passed else 'FAIL'}, worst residual {c2.worst_residual}"
        )
        if c2.index is not None:
            lines.append(f"    first failure at alpha {tuple(map(str, c2.index[0]))}, beta {c2.index[1]}")
        for k, verdict in self.cond3.verdicts:
            lines.append(f"  condition 3, k={k} ({verdict.size}x{verdict.size}): {'pass' if verdict.psd else 'FAIL'}")
            if not verdict.psd:
                lines.append(
                    f"    witness v = {list(map(str, verdict.witness or ()))}, v^T M v = {verdict.quadratic_value}"
                )
        return "\n".join(lines) + "\n"


def _gamma_lookup(gamma_source: GammaSource, n: int) -> Callable[[Exponent], Scalar]:
    if callable(gamma_source):
        return gamma_source
    table = {as_exponent(a, n): v for a, v in gamma_source.items()}

    def lookup(alpha: Exponent) -> Scalar:
        try:
            return table[alpha]
        except KeyError:
            raise MissingEntryError(alpha, 0, family="gamma") from None

    return lookup


def _close(lhs: Scalar, rhs: Scalar, tol: Scalar) -> bool:
    if isinstance(tol, Fraction) and tol == 0 and isinstance(lhs, Fraction) and isinstance(rhs, Fraction):
        return lhs == rhs
    return abs(float(lhs) - float(rhs)) <= float(tol) * (1.0 + abs(float(rhs)))


def check_condition1(
    delta: DeltaFamily,
    gamma_source: GammaSource,
    w: Window,
    mode: Optional[Mode] = None,
    tol: Any = None,
    config: Config = DEFAULT,
) -> Condition1Report:
    """Compare ``delta(alpha, 0)`` with ``gamma_alpha`` on every in-window exponent."""
    mode = Mode(mode or delta.mode)
    tol = _resolve_tolerance(mode, tol, config)
    if gamma_source is None:
        logger.info("condition 1: no gamma source, nothing to compare")
        return Condition1Report(passed=True, checked=0)
    lookup = _gamma_lookup(gamma_source, delta.n)
    mismatches = []
    alphas = w.alphas(delta.n)
    for alpha in alphas:
        d = delta.value(alpha, 0)
        g = lookup(alpha)
        if not _close(d, g, tol):
            logger.debug("condition 1 mismatch at %s: %s vs %s", alpha, d, g)
            mismatches.append((alpha, d, g))
    return Condition1Report(passed=not mismatches, checked=len(alphas), mismatches=tuple(mismatches))


def check_condition2(
    delta: DeltaFamily,
    P: ProblemPolys,
    w: Window,
    mode: Optional[Mode] = None,
    tol: Any = None,
    config: Config = DEFAULT,
) -> Condition2Report:
    """Check ``delta(a, b) = sum_xi c_xi delta(a + xi, b + 1)`` over ``theta_p^-1 = sum_xi c_xi t^xi``.

    The expansion of ``theta_p^-1 = 1 + sum t_j^2 + sum p_k^2`` carries the
    three sums of the recurrence in one polynomial. Only in-window indices
    with ``beta < B`` are asserted.
    """
    mode = Mode(mode or delta.mode)
    tol = _resolve_tolerance(mode, tol, config)
    theta_terms = [(xi, delta.mode.scalar(c)) for xi, c in P.theta_inv.real_coefficients().items()]
    checked = failures = 0
    first: Optional[Index] = None
    worst_index: Optional[Index] = None
    worst: Scalar = Fraction(0) if mode is Mode.EXACT else 0.0
    for beta in range(w.B):
        for alpha in w.alphas(delta.n):
            lhs = delta.value(alpha, beta)
            rhs = delta.mode.scalar(0)
            for xi, c in theta_terms:
                rhs += c * delta.value(add_exponents(alpha, xi), beta + 1)
            residual = abs(lhs - rhs)
            checked += 1
            if mode is Mode.EXACT and delta.mode is Mode.EXACT:
                ok = residual == 0
            else:
                residual = float(residual)
                ok = residual <= float(tol) * (1.0 + abs(float(lhs)))
            if residual > worst:
                worst, worst_index = residual, (alpha, beta)
            if not ok:
                failures += 1
                if first is None:
                    first = (alpha, beta)
                logger.debug("condition 2 residual %s at (%s, %d)", residual, alpha, beta)
    return Condition2Report(
        passed=failures == 0,
        checked=checked,
        worst_residual=worst,
        index=first,
        worst_index=worst_index,
        failures=failures,
    )


def check_condition3(
    delta: DeltaFamily,
    P: ProblemPolys,
    w: Window,
    mode: Optional[Mode] = None,
    tol: Any = None,
    basis: Optional[Sequence[Index]] = None,
    config: Config = DEFAULT,
) -> Condition3Report:
    """PSD test of every shifted Gram matrix ``sum_xi a_k,xi delta(. + xi, .)``."""
    mode = Mode(mode or delta.mode)
    tol = _resolve_tolerance(mode, tol, config)
    basis = build_basis(w, delta.n, config) if basis is None else basis
    verdicts = []
    for k, p in enumerate(P.polys, start=1):
        verdict = psd_check(shifted_gram(delta, basis, p), mode, float(tol))
        logger.info("condition 3, k=%d: %s", k, "pass" if verdict.psd else "FAIL")
        verdicts.append((k, verdict))
    return Condition3Report(passed=all(v.psd for _, v in verdicts), verdicts=tuple(verdicts))


def required_indices(P: ProblemPolys, w: Window) -> List[Index]:
    """Every ``(alpha, beta)`` the base Gram, shifted Grams and conditions 1 and 2 read."""
    n = P.n
    gram_alphas = Window(w.D, 2 * w.N, 2 * w.B).alphas(n)
    needed: Set[Index] = {(a, b) for b in range(2 * w.B + 1) for a in gram_alphas}
    shifts = {xi for p in P.polys for xi in p.terms}
    for xi in shifts:
        needed.update((add_exponents(a, xi), b) for b in range(2 * w.B + 1) for a in gram_alphas)
    theta_shifts = list(P.theta_inv.terms)
    for beta in range(w.B):
        for alpha in w.alphas(n):
            needed.add((alpha, beta))
            needed.update((add_exponents(alpha, xi), beta + 1) for xi in theta_shifts)
    return sorted(needed, key=index_key)


def coverage_check(delta: DeltaFamily, P: ProblemPolys, w: Window) -> None:
    """Raise ``CoverageError`` naming every index a tabulated family lacks."""
    if not isinstance(delta, TabulatedDelta):
        return
    missing = [idx for idx in required_indices(P, w) if not delta.covers(*idx)]
    if missing:
        raise CoverageError(missing)


def continuity_probe(
    gamma_fn: Callable[[Sequence[float]], Scalar], n: int, config: Config = DEFAULT, upper: float = 2.0
) -> Dict[str, float]:
    """Largest change of ``gamma`` between neighbouring points of a grid on ``[0, upper]^n``.

    Informational only; finite samples cannot decide continuity.
    """
    steps = config.continuity_steps
    grid = np.linspace(0.0, upper, steps + 1)
    values = np.empty((steps + 1,) * n, dtype=float)
    for idx in np.ndindex(*values.shape):
        values[idx] = float(gamma_fn(tuple(float(grid[i]) for i in idx)))
    jump = 0.0
    for axis in range(n):
        diffs = np.abs(np.diff(values, axis=axis))
        base = 1.0 + np.abs(np.take(values, range(steps), axis=axis))
        jump = max(jump, float(np.max(diffs / base)))
    return {"max_relative_jump": jump, "step": upper / steps}


def verify_all(
    delta: DeltaFamily,
    gamma_source: GammaSource,
    P: ProblemPolys,
    w: Window,
    mode: Optional[Mode] = None,
    tol: Any = None,
    config: Config = DEFAULT,
) -> Certificate:
    """Base PSD plus conditions 1-3 on window ``w``; PASS iff every check passes."""
    mode = Mode(mode or delta.mode)
    tol = _resolve_tolerance(mode, tol, config)
    w.validate_for(P)
    coverage_check(delta, P, w)
    basis = build_basis(w, P.n, config)
    logger.info("verifying window %s, basis size %d, mode %s", w, len(basis), mode.value)

    tasks = {
        "base_psd": lambda: psd_check(gram(delta, basis), mode, float(tol)),
        "cond1": lambda: check_condition1(delta, gamma_source, w, mode, tol, config),
        "cond2": lambda: check_condition2(delta, P, w, mode, tol, config),
        "cond3": lambda: check_condition3(delta, P, w, mode, tol, basis, config),
    }
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            futures = {name: pool.submit(task) for name, task in tasks.items()}
            results = {name: future.result() for name, future in futures.items()}
    else:
        results = {name: task() for name, task in tasks.items()}

    reasons = []
    if not results["base_psd"].psd:
        reasons.append("base_psd")
    if not results["cond1"].passed:
        reasons.append("cond1")
    if not results["cond2"].passed:
        reasons.append("cond2")
    reasons.extend(f"cond3: k={k}" for k, v in results["cond3"].verdicts if not v.psd)

    certificate = Certificate(
        window=w,
        mode=mode,
        tolerance=tol,
        base_psd=results["base_psd"],
        cond1=results["cond1"],
        cond2=results["cond2"],
        cond3=results["cond3"],
        reasons=tuple(reasons),
    )
    logger.info("overall %s %s", certificate.overall, reasons or "")
    return certificate
