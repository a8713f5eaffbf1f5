"""Exact and floating-point arithmetic for fractional polynomials.

A fractional polynomial is a finite sum ``sum a_alpha * t^alpha`` over
``t`` in the non-negative orthant, where every exponent vector ``alpha``
has non-negative rational components. Values are immutable; every
operation returns a new, normalized polynomial.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Rational, Real
from types import MappingProxyType
from typing import Any, Dict, Iterator, Mapping, Optional, Sequence, Tuple, Union

from .config import DEFAULT
from .errors import (
    DenominatorError,
    DimensionMismatchError,
    ModeMismatchError,
    NegativeComponentError,
    NonRealError,
    TermLimitError,
)

logger = logging.getLogger(__name__)

Scalar = Union[Fraction, float]
Exponent = Tuple[Fraction, ...]


class Mode(str, Enum):
    EXACT = "exact"
    FLOAT = "float"

    def scalar(self, value: Any) -> Scalar:
        """Coerce a real number into this mode's scalar type."""
        if self is Mode.FLOAT:
            return float(value)
        if isinstance(value, bool) or not isinstance(value, Rational):
            raise ModeMismatchError(
                f"exact mode needs an integer or rational value, got {value!r}"
            )
        return Fraction(value)


@dataclass(frozen=True, eq=False)
class Complex:
    """A complex number as a pair of scalars of one mode."""

    real: Scalar
    imag: Scalar = Fraction(0)

    @classmethod
    def coerce(cls, value: Any, mode: Mode) -> "Complex":
        if isinstance(value, Complex):
            return cls(mode.scalar(value.real), mode.scalar(value.imag))
        if isinstance(value, complex):
            if mode is Mode.EXACT:
                raise ModeMismatchError(f"exact mode cannot take {value!r}")
            return cls(value.real, value.imag)
        return cls(mode.scalar(value), mode.scalar(0))

    def __bool__(self) -> bool:
        return self.real != 0 or self.imag != 0

    def __add__(self, other: Any) -> "Complex":
        if isinstance(other, Complex):
            return Complex(self.real + other.real, self.imag + other.imag)
        if isinstance(other, Real):
            return Complex(self.real + other, self.imag)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self) -> "Complex":
        return Complex(-self.real, -self.imag)

    def __sub__(self, other: Any) -> "Complex":
        if isinstance(other, (Complex, Real)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other: Any) -> "Complex":
        return (-self) + other

    def __mul__(self, other: Any) -> "Complex":
        if isinstance(other, Complex):
            return Complex(
                self.real * other.real - self.imag * other.imag,
                self.real * other.imag + self.imag * other.real,
            )
        if isinstance(other, Real):
            return Complex(self.real * other, self.imag * other)
        return NotImplemented

    __rmul__ = __mul__

    def conjugate(self) -> "Complex":
        return Complex(self.real, -self.imag)

    def abs_square(self) -> Scalar:
        return self.real * self.real + self.imag * self.imag

    def __abs__(self) -> float:
        return math.hypot(self.real, self.imag)

    def is_real(self) -> bool:
        return self.imag == 0

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Complex):
            return self.real == other.real and self.imag == other.imag
        if isinstance(other, complex):
            return self.real == other.real and self.imag == other.imag
        if isinstance(other, Real):
            return self.imag == 0 and self.real == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.imag == 0:
            return hash(self.real)
        return hash((self.real, self.imag))

    def __complex__(self) -> complex:
        return complex(float(self.real), float(self.imag))

    def __repr__(self) -> str:
        if self.imag == 0:
            return f"Complex({self.real})"
        return f"Complex({self.real}, {self.imag})"


def as_exponent(components: Sequence[Any], dim: Optional[int] = None) -> Exponent:
    """Validate and normalize an exponent vector of non-negative rationals."""
    try:
        exp = tuple(Fraction(c) for c in components)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"exponent components must be rational: {components!r}") from exc
    if dim is not None and len(exp) != dim:
        raise DimensionMismatchError(f"exponent {components!r} is not of dimension {dim}")
    if any(c < 0 for c in exp):
        raise ValueError(f"negative exponent component in {components!r}")
    return exp


def zero_exponent(dim: int) -> Exponent:
    return (Fraction(0),) * dim


def unit_exponent(j: int, dim: int, scale: Any = 1) -> Exponent:
    """The exponent ``scale * e_j`` (``j`` is zero-based)."""
    return tuple(Fraction(scale) if i == j else Fraction(0) for i in range(dim))


def add_exponents(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x + y for x, y in zip(a, b))


def integer_root(n: int, k: int) -> int:
    """Floor of the k-th root of a non-negative integer."""
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def rational_root(x: Any, k: int) -> Optional[Fraction]:
    """Exact k-th root of a non-negative rational, or None when irrational."""
    x = Fraction(x)
    if x < 0:
        raise NegativeComponentError(f"no real root of negative value {x}")
    num = integer_root(x.numerator, k)
    den = integer_root(x.denominator, k)
    if num ** k != x.numerator or den ** k != x.denominator:
        return None
    return Fraction(num, den)


def exact_power(x: Fraction, e: Fraction) -> Optional[Fraction]:
    """``x ** e`` for rational ``x >= 0`` and ``e >= 0`` when it is rational."""
    if e == 0:
        return Fraction(1)
    if x == 0 or x == 1:
        return x
    root = rational_root(x, e.denominator)
    if root is None:
        return None
    return root ** e.numerator


class FracPoly:
    """An element of the algebra of fractional polynomials in ``dim`` variables.

    Terms map exponent vectors to non-zero ``Complex`` coefficients and are
    kept in the canonical (lexicographic) exponent order.
    """

    __slots__ = ("_terms", "dim", "mode")

    def __init__(
        self,
        terms: Optional[Mapping[Sequence[Any], Any]] = None,
        dim: int = 1,
        mode: Union[Mode, str] = Mode.EXACT,
    ) -> None:
        if dim < 1:
            raise ValueError("dimension must be positive")
        mode = Mode(mode)
        merged: Dict[Exponent, Complex] = {}
        for raw_exp, raw_coeff in (terms or {}).items():
            exp = as_exponent(raw_exp, dim)
            coeff = Complex.coerce(raw_coeff, mode)
            merged[exp] = merged[exp] + coeff if exp in merged else coeff
        self._set(merged, dim, mode)

    def _set(self, terms: Dict[Exponent, Complex], dim: int, mode: Mode) -> None:
        ordered = {e: terms[e] for e in sorted(terms) if terms[e]}
        object.__setattr__(self, "_terms", MappingProxyType(ordered))
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "mode", mode)

    @classmethod
    def _from_normalized(cls, terms: Dict[Exponent, Complex], dim: int, mode: Mode) -> "FracPoly":
        poly = cls.__new__(cls)
        poly._set(terms, dim, mode)
        return poly

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("FracPoly is immutable")

    # constructors

    @classmethod
    def zero(cls, dim: int, mode: Union[Mode, str] = Mode.EXACT) -> "FracPoly":
        return cls({}, dim, mode)

    @classmethod
    def constant(cls, value: Any, dim: int, mode: Union[Mode, str] = Mode.EXACT) -> "FracPoly":
        return cls({zero_exponent(dim): value}, dim, mode)

    @classmethod
    def one(cls, dim: int, mode: Union[Mode, str] = Mode.EXACT) -> "FracPoly":
        return cls.constant(1, dim, mode)

    @classmethod
    def monomial(
        cls, exponent: Sequence[Any], coeff: Any = 1, mode: Union[Mode, str] = Mode.EXACT
    ) -> "FracPoly":
        return cls({tuple(exponent): coeff}, len(exponent), mode)

    @classmethod
    def variable(
        cls, j: int, dim: int, mode: Union[Mode, str] = Mode.EXACT, power: Any = 1
    ) -> "FracPoly":
        """``t_j ** power`` with a one-based variable index, like the ``t1`` syntax."""
        if not 1 <= j <= dim:
            raise DimensionMismatchError(f"variable t{j} outside t1..t{dim}")
        return cls({unit_exponent(j - 1, dim, power): 1}, dim, mode)

    # mapping-like access

    @property
    def terms(self) -> Mapping[Exponent, Complex]:
        return self._terms

    def items(self) -> Iterator[Tuple[Exponent, Complex]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Exponent]:
        return iter(self._terms)

    def coefficient(self, exponent: Sequence[Any]) -> Complex:
        exp = as_exponent(exponent, self.dim)
        return self._terms.get(exp, Complex.coerce(0, self.mode))

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def is_real(self) -> bool:
        return all(c.is_real() for c in self._terms.values())

    def real_coefficients(self) -> Dict[Exponent, Scalar]:
        """Exponent to real coefficient map; raises when a coefficient is complex."""
        if not self.is_real():
            raise NonRealError("polynomial has non-real coefficients")
        return {e: c.real for e, c in self._terms.items()}

    def denominators(self) -> Tuple[int, ...]:
        """Per-variable lcm of the exponent denominators."""
        dens = [1] * self.dim
        for exp in self._terms:
            for j, a in enumerate(exp):
                dens[j] = math.lcm(dens[j], a.denominator)
        return tuple(dens)

    # arithmetic

    def _check(self, other: "FracPoly") -> None:
        if self.dim != other.dim:
            raise DimensionMismatchError(f"dimension {self.dim} vs {other.dim}")
        if self.mode is not other.mode:
            raise ModeMismatchError(f"cannot mix {self.mode.value} and {other.mode.value}")

    def _lift(self, other: Any) -> "FracPoly":
        if isinstance(other, FracPoly):
            self._check(other)
            return other
        return FracPoly.constant(other, self.dim, self.mode)

    def __add__(self, other: Any) -> "FracPoly":
        other = self._lift(other)
        out = dict(self._terms)
        for exp, coeff in other._terms.items():
            out[exp] = out[exp] + coeff if exp in out else coeff
        return FracPoly._from_normalized(out, self.dim, self.mode)

    __radd__ = __add__

    def __neg__(self) -> "FracPoly":
        return FracPoly._from_normalized(
            {e: -c for e, c in self._terms.items()}, self.dim, self.mode
        )

    def __sub__(self, other: Any) -> "FracPoly":
        return self + (-self._lift(other))

    def __rsub__(self, other: Any) -> "FracPoly":
        return (-self) + other

    def mul(self, other: Any, max_terms: Optional[int] = None) -> "FracPoly":
        other = self._lift(other)
        limit = DEFAULT.max_terms if max_terms is None else max_terms
        out: Dict[Exponent, Complex] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                exp = add_exponents(e1, e2)
                out[exp] = out[exp] + c1 * c2 if exp in out else c1 * c2
                if len(out) > limit:
                    raise TermLimitError(f"product exceeds {limit} terms")
        return FracPoly._from_normalized(out, self.dim, self.mode)

    def __mul__(self, other: Any) -> "FracPoly":
        return self.mul(other)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "FracPoly":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = FracPoly.one(self.dim, self.mode)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def conjugate(self) -> "FracPoly":
        return FracPoly._from_normalized(
            {e: c.conjugate() for e, c in self._terms.items()}, self.dim, self.mode
        )

    def conj_abs_square(self) -> "FracPoly":
        """``f * conj(f)``; real on the orthant, with exactly real coefficients."""
        product = self * self.conjugate()
        # cross terms pair up as z*conj(w) + w*conj(z); drop float round-off in imag
        return FracPoly._from_normalized(
            {e: Complex(c.real, c.imag * 0) for e, c in product.items()}, self.dim, self.mode
        )

    def to_float(self) -> "FracPoly":
        if self.mode is Mode.FLOAT:
            return self
        return FracPoly._from_normalized(
            {e: Complex(float(c.real), float(c.imag)) for e, c in self._terms.items()},
            self.dim,
            Mode.FLOAT,
        )

    def clear_denominators(self, c: Sequence[int]) -> "FracPoly":
        """Substitute ``t_j = u_j ** c_j`` so every exponent becomes an integer."""
        if len(c) != self.dim:
            raise DimensionMismatchError(f"clearing vector {tuple(c)} is not of dimension {self.dim}")
        if any(not isinstance(cj, int) or cj < 1 for cj in c):
            raise ValueError(f"clearing vector must hold positive integers: {tuple(c)}")
        dens = self.denominators()
        for j, cj in enumerate(c):
            if cj % dens[j]:
                raise DenominatorError(
                    f"c_{j + 1} = {cj} is not a multiple of denominator lcm {dens[j]}"
                )
        return FracPoly._from_normalized(
            {tuple(a * cj for a, cj in zip(e, c)): coeff for e, coeff in self._terms.items()},
            self.dim,
            self.mode,
        )

    # evaluation

    def _check_point(self, t: Sequence[Any]) -> None:
        if len(t) != self.dim:
            raise DimensionMismatchError(f"point of dimension {len(t)} for dimension {self.dim}")
        if any(x < 0 for x in t):
            raise NegativeComponentError(f"point {tuple(t)} leaves the non-negative orthant")

    def eval(self, t: Sequence[Any]) -> Complex:
        """Evaluate at ``t``; ``0 ** 0`` is 1 and fractional powers take the real root.

        Exact mode stays exact while every power ``t_j ** alpha_j`` is rational
        and falls back to floating point otherwise.
        """
        self._check_point(t)
        if self.mode is Mode.EXACT and all(isinstance(x, Rational) for x in t):
            point = [Fraction(x) for x in t]
            total = Complex.coerce(0, Mode.EXACT)
            for exp, coeff in self._terms.items():
                value = Fraction(1)
                for x, a in zip(point, exp):
                    p = exact_power(x, a)
                    if p is None:
                        logger.warning("irrational power %s^%s, evaluating %s in floating point", x, a, self)
                        return self.to_float().eval([float(x) for x in point])
                    value *= p
                total = total + coeff * value
            return total
        point_f = [float(x) for x in t]
        total = Complex(0.0, 0.0)
        for exp, coeff in self._terms.items():
            value = 1.0
            for x, a in zip(point_f, exp):
                value *= x ** float(a)
            total = total + Complex(float(coeff.real), float(coeff.imag)) * value
        return total

    def eval_at_roots(self, roots: Sequence[Any], powers: Sequence[int]) -> Complex:
        """Exact value at ``t_j = roots_j ** powers_j``.

        Every ``powers_j * alpha_j`` must be an integer, so each power of
        ``t_j`` is an integer power of the rational root.
        """
        if len(roots) != self.dim or len(powers) != self.dim:
            raise DimensionMismatchError("roots and powers must match the dimension")
        rs = [Fraction(r) for r in roots]
        if any(r < 0 for r in rs):
            raise NegativeComponentError(f"roots {tuple(roots)} leave the non-negative orthant")
        total = Complex.coerce(0, Mode.EXACT)
        for exp, coeff in self._terms.items():
            value = Fraction(1)
            for r, d, a in zip(rs, powers, exp):
                k = a * d
                if k.denominator != 1:
                    raise DenominatorError(
                        f"exponent {a} needs a root power divisible by {a.denominator}, got {d}"
                    )
                value *= r ** int(k)
            total = total + Complex.coerce(coeff, Mode.EXACT) * value
        return total

    # comparison and display

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FracPoly):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.mode is other.mode
            and dict(self._terms) == dict(other._terms)
        )

    def __hash__(self) -> int:
        return hash((self.dim, self.mode, tuple(self._terms.items())))

    def __str__(self) -> str:
        from .parser import format_fracpoly

        return format_fracpoly(self)

    def __repr__(self) -> str:
        return f"FracPoly({str(self)!r}, dim={self.dim}, mode={self.mode.value})"


def add(f: FracPoly, g: FracPoly) -> FracPoly:
    return f + g


def mul(f: FracPoly, g: FracPoly, max_terms: Optional[int] = None) -> FracPoly:
    return f.mul(g, max_terms=max_terms)


def conj_abs_square(f: FracPoly) -> FracPoly:
    return f.conj_abs_square()


def evaluate(f: FracPoly, t: Sequence[Any]) -> Complex:
    return f.eval(t)


def clear_denominators(f: FracPoly, c: Sequence[int]) -> FracPoly:
    return f.clear_denominators(c)
