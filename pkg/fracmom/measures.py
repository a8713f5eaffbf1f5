"""Finitely supported measures on the non-negative orthant and their moments.

In exact mode every atom is stored through rational roots ``r`` and a
common power ``D`` with ``t = r ** D``, so ``t ** alpha`` stays rational for
every exponent whose denominators divide ``D``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    DenominatorError,
    DimensionMismatchError,
    ModeMismatchError,
    NegativeComponentError,
)
from .frac_poly import Complex, FracPoly, Mode, Scalar, as_exponent, rational_root
from .theta_kernel import ProblemPolys, theta_at_roots, theta_eval

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Atom:
    point: Tuple[Scalar, ...]
    weight: Scalar
    roots: Optional[Tuple[Fraction, ...]] = None


@dataclass(frozen=True)
class AtomicMeasure:
    """A positive measure with finitely many atoms in the orthant."""

    atoms: Tuple[Atom, ...]
    n: int
    mode: Mode = Mode.EXACT
    power: int = 1

    def __post_init__(self) -> None:
        for i, atom in enumerate(self.atoms):
            if len(atom.point) != self.n:
                raise DimensionMismatchError(f"atom {i} has dimension {len(atom.point)}, expected {self.n}")
            if not atom.weight > 0:
                raise ValueError(f"atom {i} has non-positive weight {atom.weight}")
            if any(x < 0 for x in atom.point):
                raise NegativeComponentError(f"atom {i} at {atom.point} leaves the orthant")
            if self.mode is Mode.EXACT and atom.roots is None:
                raise ModeMismatchError(f"atom {i} has no exact roots")

    @classmethod
    def from_roots(
        cls, roots: Sequence[Sequence[Any]], weights: Sequence[Any], power: int, n: Optional[int] = None
    ) -> "AtomicMeasure":
        """Exact measure with atoms at ``t = r ** power`` componentwise."""
        if power < 1:
            raise ValueError("root power must be a positive integer")
        if len(roots) != len(weights):
            raise ValueError("roots and weights differ in length")
        dim = n if n is not None else (len(roots[0]) if roots else None)
        if dim is None:
            raise ValueError("dimension n is required for an empty measure")
        atoms = []
        for r, w in zip(roots, weights):
            rs = tuple(Mode.EXACT.scalar(x) for x in r)
            if any(x < 0 for x in rs):
                raise NegativeComponentError(f"negative root in {tuple(r)}")
            atoms.append(Atom(tuple(x ** power for x in rs), Mode.EXACT.scalar(w), rs))
        return cls(tuple(atoms), dim, Mode.EXACT, power)

    @classmethod
    def from_points(
        cls,
        points: Sequence[Sequence[Any]],
        weights: Sequence[Any],
        mode: Union[Mode, str] = Mode.FLOAT,
        n: Optional[int] = None,
    ) -> "AtomicMeasure":
        mode = Mode(mode)
        if mode is Mode.EXACT:
            return cls.from_roots(points, weights, power=1, n=n)
        if len(points) != len(weights):
            raise ValueError("points and weights differ in length")
        dim = n if n is not None else (len(points[0]) if points else None)
        if dim is None:
            raise ValueError("dimension n is required for an empty measure")
        atoms = tuple(Atom(tuple(float(x) for x in p), float(w)) for p, w in zip(points, weights))
        return cls(atoms, dim, Mode.FLOAT)

    def with_power(self, power: int) -> "AtomicMeasure":
        """Re-express an exact measure with common root power ``power``."""
        if self.mode is not Mode.EXACT:
            raise ModeMismatchError("only exact measures carry root powers")
        if power == self.power:
            return self
        roots = []
        for atom in self.atoms:
            new = [rational_root(r ** self.power, power) for r in atom.roots]
            if any(x is None for x in new):
                raise DenominatorError(
                    f"atom at {atom.point} has no rational {power}-th root; use float mode"
                )
            roots.append(new)
        return AtomicMeasure.from_roots(roots, [a.weight for a in self.atoms], power, n=self.n)

    def to_float(self) -> "AtomicMeasure":
        if self.mode is Mode.FLOAT:
            return self
        return AtomicMeasure.from_points(
            [a.point for a in self.atoms], [a.weight for a in self.atoms], Mode.FLOAT, n=self.n
        )

    def total_mass(self) -> Scalar:
        return sum((a.weight for a in self.atoms), self.mode.scalar(0))

    def points_array(self) -> np.ndarray:
        return np.array([[float(x) for x in a.point] for a in self.atoms], dtype=float).reshape(-1, self.n)

    def weights_array(self) -> np.ndarray:
        return np.array([float(a.weight) for a in self.atoms], dtype=float)

    def restrict(self, P: ProblemPolys) -> "AtomicMeasure":
        """Keep only the atoms inside the support set of ``P``."""
        report = support_check(self, P, 0)
        bad = {i for i, _, _ in report.violations}
        atoms = tuple(a for i, a in enumerate(self.atoms) if i not in bad)
        return AtomicMeasure(atoms, self.n, self.mode, self.power)


@dataclass(frozen=True)
class LogAtomicMeasure:
    """Atoms in R^n for the Laplace form ``gamma_alpha = sum w exp(-alpha . s)``."""

    atoms: Tuple[Tuple[Tuple[float, ...], float], ...]
    n: int

    def __post_init__(self) -> None:
        for i, (point, weight) in enumerate(self.atoms):
            if len(point) != self.n:
                raise DimensionMismatchError(f"atom {i} has dimension {len(point)}, expected {self.n}")
            if not weight > 0:
                raise ValueError(f"atom {i} has non-positive weight {weight}")

    @classmethod
    def from_points(cls, points: Sequence[Sequence[Any]], weights: Sequence[Any], n: Optional[int] = None) -> "LogAtomicMeasure":
        dim = n if n is not None else (len(points[0]) if points else 1)
        atoms = tuple((tuple(float(x) for x in p), float(w)) for p, w in zip(points, weights))
        return cls(atoms, dim)


def _check_dim(mu: AtomicMeasure, dim: int) -> None:
    if dim != mu.n:
        raise DimensionMismatchError(f"dimension {dim} for a measure on R_+^{mu.n}")


def _root_powers(mu: AtomicMeasure) -> Tuple[int, ...]:
    return (mu.power,) * mu.n


def integrate(mu: AtomicMeasure, f: FracPoly) -> Complex:
    """``sum_i w_i f(t_i)``; exact in exact mode."""
    _check_dim(mu, f.dim)
    if f.mode is not mu.mode:
        raise ModeMismatchError(f"{f.mode.value} polynomial against a {mu.mode.value} measure")
    total = Complex.coerce(0, mu.mode)
    for atom in mu.atoms:
        if mu.mode is Mode.EXACT:
            total = total + f.eval_at_roots(atom.roots, _root_powers(mu)) * atom.weight
        else:
            total = total + f.eval(atom.point) * atom.weight
    return total


def _exact_alpha(mu: AtomicMeasure, alpha: Sequence[Any]) -> Optional[Tuple[int, ...]]:
    """Integer powers of the roots for ``t ** alpha``, or None if not exact."""
    if mu.mode is not Mode.EXACT or not all(isinstance(a, Rational) for a in alpha):
        return None
    scaled = [Fraction(a) * mu.power for a in alpha]
    if any(k.denominator != 1 for k in scaled):
        return None
    return tuple(int(k) for k in scaled)


def gamma(mu: AtomicMeasure, alpha: Sequence[Any]) -> Scalar:
    """The moment ``gamma_alpha = sum_i w_i t_i ** alpha``; ``alpha`` may be irrational."""
    _check_dim(mu, len(alpha))
    if any(a < 0 for a in alpha):
        raise ValueError(f"negative exponent in {tuple(alpha)}")
    powers = _exact_alpha(mu, alpha)
    if powers is not None:
        total = Fraction(0)
        for atom in mu.atoms:
            value = atom.weight
            for r, k in zip(atom.roots, powers):
                value *= r ** k
            total += value
        return total
    if not mu.atoms:
        return 0.0
    values = np.prod(mu.points_array() ** np.asarray(alpha, dtype=float), axis=1)
    return float(mu.weights_array() @ values)


def _atom_theta(mu: AtomicMeasure, P: ProblemPolys, atom: Atom) -> Scalar:
    if mu.mode is Mode.EXACT:
        return theta_at_roots(P, atom.roots, _root_powers(mu))
    return theta_eval(P.to_float(), atom.point)


def delta_forward(mu: AtomicMeasure, P: ProblemPolys, alpha: Sequence[Any], beta: int) -> Scalar:
    """``delta_(alpha, beta) = sum_i w_i t_i ** alpha * theta_p(t_i) ** beta``."""
    _check_dim(mu, P.n)
    alpha = as_exponent(alpha, P.n)
    if beta < 0:
        raise ValueError("beta must be a non-negative integer")
    if mu.mode is Mode.EXACT:
        if P.mode is not Mode.EXACT:
            raise ModeMismatchError("an exact measure needs exact polynomials")
        powers = _exact_alpha(mu, alpha)
        if powers is None:
            raise DenominatorError(f"exponent {alpha} needs denominators dividing {mu.power}")
        total = Fraction(0)
        for atom in mu.atoms:
            value = atom.weight * _atom_theta(mu, P, atom) ** beta
            for r, k in zip(atom.roots, powers):
                value *= r ** k
            total += value
        return total
    total_f = 0.0
    for atom in mu.atoms:
        value = atom.weight * _atom_theta(mu, P, atom) ** beta
        for x, a in zip(atom.point, alpha):
            value *= x ** float(a)
        total_f += value
    return total_f


@dataclass(frozen=True)
class SupportReport:
    passed: bool
    violations: Tuple[Tuple[int, int, Scalar], ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "violations": [
                {"atom": i, "k": k, "value": str(v) if isinstance(v, Fraction) else v}
                for i, k, v in self.violations
            ],
        }


def support_check(mu: AtomicMeasure, P: ProblemPolys, tol: Any = 0) -> SupportReport:
    """Check every atom against ``p_k(t) >= -tol``; atoms on ``p_k = 0`` are inside."""
    _check_dim(mu, P.n)
    violations: List[Tuple[int, int, Scalar]] = []
    for i, atom in enumerate(mu.atoms):
        for k, p in enumerate(P.polys, start=1):
            if mu.mode is Mode.EXACT and P.mode is Mode.EXACT:
                value = p.eval_at_roots(atom.roots, _root_powers(mu)).real
            else:
                value = p.to_float().eval(atom.point).real
            if value < -tol:
                violations.append((i, k, value))
    for i, k, value in violations:
        logger.debug("atom %d violates p_%d >= 0 (value %s)", i, k, value)
    return SupportReport(passed=not violations, violations=tuple(violations))


def laplace_pushforward(nu: LogAtomicMeasure) -> AtomicMeasure:
    """Push ``nu`` forward under ``t = exp(-s)``; weights are unchanged."""
    points = [tuple(float(x) for x in np.exp(-np.asarray(s, dtype=float))) for s, _ in nu.atoms]
    return AtomicMeasure.from_points(points, [w for _, w in nu.atoms], Mode.FLOAT, n=nu.n)


def laplace_transform(nu: LogAtomicMeasure, alpha: Sequence[Any]) -> float:
    """``sum_i w_i exp(-alpha . s_i)``, the Laplace side of the moment family."""
    if len(alpha) != nu.n:
        raise DimensionMismatchError(f"exponent of dimension {len(alpha)} for n = {nu.n}")
    if not nu.atoms:
        return 0.0
    s = np.array([p for p, _ in nu.atoms], dtype=float).reshape(-1, nu.n)
    w = np.array([wt for _, wt in nu.atoms], dtype=float)
    return float(w @ np.exp(-(s @ np.asarray(alpha, dtype=float))))

