"""The localization function theta_p and the extended algebra.

``theta_p(t) = 1 / (1 + t_1^2 + ... + t_n^2 + p_1(t)^2 + ... + p_m(t)^2)``.
Extended polynomials carry an auxiliary variable ``s``; evaluating them at
``s = theta_p(t)`` is the homomorphism ``rho`` whose kernel is generated by
``sigma(t, s) = s * theta_p(t)^-1 - 1``.
"""
from __future__ import annotations

import itertools
import logging
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union

from .config import DEFAULT, Config
from .errors import DimensionMismatchError, ModeMismatchError, NonRealError
from .frac_poly import Complex, FracPoly, Mode, Scalar

logger = logging.getLogger(__name__)


class ExtendedPoly:
    """A polynomial in ``s`` whose coefficients are fractional polynomials in ``t``."""

    __slots__ = ("_coeffs", "dim", "mode")

    def __init__(
        self,
        s_coeffs: Optional[Mapping[int, FracPoly]] = None,
        dim: Optional[int] = None,
        mode: Union[Mode, str, None] = None,
    ) -> None:
        s_coeffs = dict(s_coeffs or {})
        first = next(iter(s_coeffs.values()), None)
        if dim is None:
            if first is None:
                raise ValueError("dimension is required for an empty extended polynomial")
            dim = first.dim
        mode = Mode(mode) if mode is not None else (first.mode if first is not None else Mode.EXACT)
        coeffs: Dict[int, FracPoly] = {}
        for b, poly in s_coeffs.items():
            if isinstance(b, bool) or not isinstance(b, int) or b < 0:
                raise ValueError(f"s powers must be non-negative integers, got {b!r}")
            if poly.dim != dim:
                raise DimensionMismatchError(f"s^{b} coefficient has dimension {poly.dim}, expected {dim}")
            if poly.mode is not mode:
                raise ModeMismatchError(f"s^{b} coefficient is in {poly.mode.value} mode")
            if not poly.is_zero:
                coeffs[b] = poly
        object.__setattr__(self, "_coeffs", {b: coeffs[b] for b in sorted(coeffs)})
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "mode", mode)

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("ExtendedPoly is immutable")

    @classmethod
    def from_frac(cls, f: FracPoly) -> "ExtendedPoly":
        return cls({0: f}, f.dim, f.mode)

    @classmethod
    def s_power(cls, b: int, dim: int, mode: Union[Mode, str] = Mode.EXACT) -> "ExtendedPoly":
        return cls({b: FracPoly.one(dim, mode)}, dim, mode)

    @property
    def s_coeffs(self) -> Mapping[int, FracPoly]:
        return dict(self._coeffs)

    def items(self) -> Iterator[Tuple[int, FracPoly]]:
        return iter(self._coeffs.items())

    def coefficient(self, b: int) -> FracPoly:
        return self._coeffs.get(b, FracPoly.zero(self.dim, self.mode))

    @property
    def s_degree(self) -> int:
        return max(self._coeffs, default=0)

    @property
    def is_zero(self) -> bool:
        return not self._coeffs

    def denominators(self) -> Tuple[int, ...]:
        dens = [1] * self.dim
        for poly in self._coeffs.values():
            dens = [math.lcm(a, b) for a, b in zip(dens, poly.denominators())]
        return tuple(dens)

    def _lift(self, other: Any) -> "ExtendedPoly":
        if isinstance(other, ExtendedPoly):
            if other.dim != self.dim:
                raise DimensionMismatchError(f"dimension {self.dim} vs {other.dim}")
            if other.mode is not self.mode:
                raise ModeMismatchError(f"cannot mix {self.mode.value} and {other.mode.value}")
            return other
        if isinstance(other, FracPoly):
            return self._lift(ExtendedPoly.from_frac(other))
        return ExtendedPoly.from_frac(FracPoly.constant(other, self.dim, self.mode))

    def __add__(self, other: Any) -> "ExtendedPoly":
        other = self._lift(other)
        out = dict(self._coeffs)
        for b, poly in other._coeffs.items():
            out[b] = out[b] + poly if b in out else poly
        return ExtendedPoly(out, self.dim, self.mode)

    __radd__ = __add__

    def __neg__(self) -> "ExtendedPoly":
        return ExtendedPoly({b: -p for b, p in self._coeffs.items()}, self.dim, self.mode)

    def __sub__(self, other: Any) -> "ExtendedPoly":
        return self + (-self._lift(other))

    def __rsub__(self, other: Any) -> "ExtendedPoly":
        return (-self) + other

    def __mul__(self, other: Any) -> "ExtendedPoly":
        other = self._lift(other)
        out: Dict[int, FracPoly] = {}
        for b1, p1 in self._coeffs.items():
            for b2, p2 in other._coeffs.items():
                prod = p1 * p2
                out[b1 + b2] = out[b1 + b2] + prod if b1 + b2 in out else prod
        return ExtendedPoly(out, self.dim, self.mode)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "ExtendedPoly":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = ExtendedPoly.s_power(0, self.dim, self.mode)
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExtendedPoly):
            return NotImplemented
        return self.dim == other.dim and self.mode is other.mode and self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash((self.dim, self.mode, tuple(self._coeffs.items())))

    def __str__(self) -> str:
        from .parser import format_extended

        return format_extended(self)

    def __repr__(self) -> str:
        return f"ExtendedPoly({str(self)!r}, dim={self.dim}, mode={self.mode.value})"


@dataclass(frozen=True)
class ProblemPolys:
    """The polynomials ``p_1..p_m`` together with the cached ``theta_p^-1``."""

    n: int
    polys: Tuple[FracPoly, ...]
    theta_inv: FracPoly
    c: Tuple[int, ...]
    mode: Mode

    @property
    def m(self) -> int:
        return len(self.polys)

    def real_coefficients(self, k: int) -> Dict[Tuple[Fraction, ...], Scalar]:
        """Coefficients ``a_{k xi}`` of ``p_k`` (one-based ``k``)."""
        return self.polys[k - 1].real_coefficients()

    def to_float(self) -> "ProblemPolys":
        if self.mode is Mode.FLOAT:
            return self
        return make_problem([p.to_float() for p in self.polys], n=self.n, mode=Mode.FLOAT)


def make_problem(
    polys: Sequence[FracPoly], n: Optional[int] = None, mode: Union[Mode, str, None] = None
) -> ProblemPolys:
    """Validate ``p_1..p_m`` and cache ``theta_p^-1`` and the clearing vector ``c``."""
    polys = tuple(polys)
    if n is None:
        if not polys:
            raise ValueError("dimension n is required when there are no polynomials")
        n = polys[0].dim
    mode = Mode(mode) if mode is not None else (polys[0].mode if polys else Mode.EXACT)
    for k, p in enumerate(polys, start=1):
        if p.dim != n:
            raise DimensionMismatchError(f"p_{k} has dimension {p.dim}, expected {n}")
        if p.mode is not mode:
            raise ModeMismatchError(f"p_{k} is in {p.mode.value} mode, expected {mode.value}")
        if not p.is_real():
            raise NonRealError(f"p_{k} = {p} has non-real coefficients")

    theta_inv = FracPoly.one(n, mode)
    for j in range(1, n + 1):
        theta_inv = theta_inv + FracPoly.variable(j, n, mode, power=2)
    for p in polys:
        theta_inv = theta_inv + p * p

    c = list(theta_inv.denominators())
    for p in polys:
        c = [math.lcm(a, b) for a, b in zip(c, p.denominators())]
    logger.debug("theta_p^-1 = %s, c = %s", theta_inv, c)
    return ProblemPolys(n=n, polys=polys, theta_inv=theta_inv, c=tuple(c), mode=mode)


def theta_eval(P: ProblemPolys, t: Sequence[Any]) -> Scalar:
    """``theta_p(t)``, a value in (0, 1]."""
    return 1 / P.theta_inv.eval(t).real


def theta_at_roots(P: ProblemPolys, roots: Sequence[Any], powers: Sequence[int]) -> Fraction:
    """Exact ``theta_p`` at ``t_j = roots_j ** powers_j``."""
    return 1 / P.theta_inv.eval_at_roots(roots, powers).real


def rho_eval(q: ExtendedPoly, P: ProblemPolys, t: Sequence[Any]) -> Complex:
    """``q(t, theta_p(t))``."""
    if q.dim != P.n:
        raise DimensionMismatchError(f"extended polynomial of dimension {q.dim} for n = {P.n}")
    theta = theta_eval(P, t)
    total = Complex.coerce(0, q.mode)
    for b, poly in q.items():
        total = total + poly.eval(t) * theta ** b
    return total


def sigma(P: ProblemPolys) -> ExtendedPoly:
    """The kernel generator ``s * theta_p^-1 - 1``."""
    return ExtendedPoly({1: P.theta_inv, 0: -FracPoly.one(P.n, P.mode)}, P.n, P.mode)


@dataclass(frozen=True)
class KernelVerdict:
    in_kernel: bool
    witness: Optional[Tuple[Fraction, ...]] = None
    value: Optional[Complex] = None

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"in_kernel": self.in_kernel, "witness": None, "value": None}
        if self.witness is not None:
            out["witness"] = [str(x) for x in self.witness]
        if self.value is not None:
            out["value"] = str(self.value.real) if self.value.is_real() else [
                str(self.value.real),
                str(self.value.imag),
            ]
        return out


def _candidate_points(n: int, config: Config) -> Iterable[Tuple[Fraction, ...]]:
    grid = config.witness_grid
    if grid ** n <= 100_000:
        for u in itertools.product(range(grid), repeat=n):
            yield tuple(Fraction(x) for x in u)
    rng = random.Random(config.seed)
    for _ in range(config.witness_samples):
        yield tuple(Fraction(rng.randint(0, 99), rng.randint(1, 9)) for _ in range(n))


def kernel_test(q: ExtendedPoly, P: ProblemPolys, config: Config = DEFAULT) -> KernelVerdict:
    """Decide whether ``q`` lies in the kernel of ``rho`` (the ideal generated by sigma).

    With ``t_j = u_j ** c_j`` and ``Theta(u) = theta_p^-1(u^c)``,
    ``rho(q)(u^c) = Theta(u)^-B * sum_b C_b(u) Theta(u)^(B-b)`` and
    ``Theta > 0`` on the orthant, so ``q`` is in the kernel exactly when the
    integer-exponent polynomial ``sum_b C_b Theta^(B-b)`` vanishes.
    """
    if q.mode is not Mode.EXACT or P.mode is not Mode.EXACT:
        raise ModeMismatchError("kernel_test requires exact mode")
    if q.dim != P.n:
        raise DimensionMismatchError(f"extended polynomial of dimension {q.dim} for n = {P.n}")

    c = tuple(math.lcm(a, b) for a, b in zip(P.c, q.denominators()))
    theta_u = P.theta_inv.clear_denominators(c)
    top = q.s_degree
    total = FracPoly.zero(P.n, Mode.EXACT)
    power = FracPoly.one(P.n, Mode.EXACT)
    for b in range(top, -1, -1):
        total = total + q.coefficient(b).clear_denominators(c) * power
        if b:
            power = power * theta_u
    if total.is_zero:
        return KernelVerdict(in_kernel=True)

    for u in _candidate_points(P.n, config):
        if total.eval(u):
            t = tuple(x ** cj for x, cj in zip(u, c))
            theta = 1 / theta_u.eval(u).real
            value = Complex.coerce(0, Mode.EXACT)
            for b, poly in q.items():
                value = value + poly.eval_at_roots(u, c) * theta ** b
            logger.debug("kernel witness t = %s, rho = %s", t, value)
            return KernelVerdict(in_kernel=False, witness=t, value=value)
    logger.warning("q is outside the kernel but no small witness point was found")
    return KernelVerdict(in_kernel=False)
