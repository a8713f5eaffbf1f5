#!/usr/bin/env python3
"""
Walk through the fractional moment conditions on small exact examples.

The first part prints the Gram matrices for one measure and shows the
recurrence and the localizing matrices at work. The second part runs
randomized atomic measures through verify_all and reports how many pass.

Usage:
    python scripts/necessity_demo.py
    python scripts/necessity_demo.py --cases 20 --seed 7 --float
"""
from __future__ import annotations

import argparse
import logging
import random
import sys
import time
from fractions import Fraction
from typing import Tuple

from fracmom.frac_poly import Mode
from fracmom.measures import AtomicMeasure, gamma, support_check
from fracmom.moments import ComputedDelta, Window, build_basis, gram, psd_check, shifted_gram
from fracmom.parser import format_fracpoly, parse_fracpoly
from fracmom.theta_kernel import ProblemPolys, make_problem
from fracmom.verifier import check_condition2, verify_all

logging.basicConfig(level=logging.INFO, format="%(message)s")
logger = logging.getLogger(__name__)

P_LISTS = [[], ["t1 - 2"], ["t1^(1/2) - 1"], ["t1 - t2"]]


def problem(texts, n: int) -> ProblemPolys:
    return make_problem([parse_fracpoly(t, n) for t in texts], n=n)


def demonstrate_single_measure() -> None:
    logger.info("WORKED EXAMPLE: p_1 = t1^(1/2) - 1, mu = delta_(9/4) + 2 delta_4")
    logger.info("=" * 60)
    P = problem(["t1^(1/2) - 1"], 1)
    mu = AtomicMeasure.from_roots([[Fraction(3, 2)], [2]], [1, 2], power=2)
    w = Window(2, 2, 1)
    delta = ComputedDelta(mu, P)
    logger.info("theta_p^-1 = %s", format_fracpoly(P.theta_inv))
    logger.info("support check: %s", "inside" if support_check(mu, P).passed else "outside")

    basis = build_basis(w, 1)
    logger.info("\nbasis at window %s (%d elements):", w, len(basis))
    for alpha, beta in basis:
        logger.info("  t^%s s^%d", alpha[0], beta)

    M = gram(delta, basis)
    verdict = psd_check(M)
    logger.info("\nbase Gram matrix: %s", "PSD" if verdict.psd else "not PSD")
    for row in M:
        logger.info("  [%s]", ", ".join(str(x) for x in row))
    logger.info("LDL^T pivots: %s", ", ".join(str(p) for p in verdict.pivots))

    Mk = shifted_gram(delta, basis, P.polys[0])
    logger.info("\nlocalizing matrix for p_1: %s", "PSD" if psd_check(Mk).psd else "not PSD")

    report = check_condition2(delta, P, w)
    logger.info("\nrecurrence checked at %d indices, worst residual %s", report.checked, report.worst_residual)

    outside = AtomicMeasure.from_roots([[Fraction(1, 2)]], [1], power=2)
    cert = verify_all(ComputedDelta(outside, P), lambda a: gamma(outside, a), P, w)
    logger.info("\nsame window with an atom at t = 1/4:")
    logger.info(cert.to_text().rstrip())


def random_case(rng: random.Random) -> Tuple[ProblemPolys, AtomicMeasure, Window]:
    n = rng.choice([1, 2])
    texts = rng.choice([p for p in P_LISTS if n == 2 or "t2" not in "".join(p)])
    D = 2 if texts == ["t1^(1/2) - 1"] else rng.choice([1, 2, 3])
    P = problem(texts, n)
    while True:
        roots = [[Fraction(rng.randint(0, 12), 4) for _ in range(n)] for _ in range(rng.randint(1, 5))]
        weights = [Fraction(rng.randint(1, 8), rng.randint(1, 4)) for _ in roots]
        mu = AtomicMeasure.from_roots(roots, weights, power=D).restrict(P)
        if mu.atoms:
            return P, mu, Window(D, 2 * D, 2)


def run_suite(cases: int, seed: int, use_float: bool) -> int:
    logger.info("\nRANDOMIZED NECESSITY RUN: %d measures, seed %d", cases, seed)
    logger.info("=" * 60)
    rng = random.Random(seed)
    failures = 0
    start = time.perf_counter()
    for i in range(cases):
        P, mu, w = random_case(rng)
        if use_float:
            mu = mu.to_float()
        cert = verify_all(ComputedDelta(mu, P), lambda a, mu=mu: gamma(mu, a), P, w, tol=1e-9 if use_float else None)
        polys = ", ".join(format_fracpoly(p) for p in P.polys) or "none"
        logger.info("%3d  n=%d  atoms=%d  p: %-16s window %s  %s", i, P.n, len(mu.atoms), polys, w, cert.overall)
        if not cert.passed:
            failures += 1
            logger.warning(cert.to_text().rstrip())
    logger.info("\n%d/%d passed in %.2fs (%s mode)", cases - failures, cases, time.perf_counter() - start,
                Mode.FLOAT.value if use_float else Mode.EXACT.value)
    return failures


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--cases", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--float", dest="use_float", action="store_true", help="rerun the measures in float mode")
    ap.add_argument("--skip-example", action="store_true")
    args = ap.parse_args()

    if not args.skip_example:
        demonstrate_single_measure()
    failures = run_suite(args.cases, args.seed, args.use_float)
    if failures:
        logger.error("%d measures failed a necessary condition", failures)
        return 1
    logger.info("DEMONSTRATION COMPLETE")
    return 0


if __name__ == "__main__":
    sys.exit(main())
