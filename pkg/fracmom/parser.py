"""Text syntax for fractional polynomials.

Grammar::

    expr    = [sign] term { sign term }
    term    = factor { '*' factor }
    factor  = primary [ '^' power ]
    primary = number [ '/' number ] [ 'i' ] | 'i' | 't<k>' | 's' | '(' expr ')'
    power   = integer | '(' rational ')'

Rational exponents must be parenthesized (``t1^(3/2)``); bare powers are
integers (``t1^2``). Only variables accept fractional powers. The auxiliary
variable ``s`` is accepted by :func:`parse_extended` only.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple, Union

from .errors import FracMomError, ParseError
from .frac_poly import Complex, Exponent, FracPoly, Mode, unit_exponent
from .theta_kernel import ExtendedPoly

MAX_LITERAL_EXPONENT = 400
MAX_NUMERIC_POWER = 1024

_NUMBER = r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?"
_RATIONAL_RE = re.compile(rf"\s*([+-]?)\s*({_NUMBER})(?:\s*/\s*({_NUMBER}))?\s*", re.ASCII)

_TOKEN_RE = re.compile(
    rf"""
    (?P<ws>\s+)
  | (?P<num>{_NUMBER})
  | (?P<var>t(?P<index>\d+))
  | (?P<s>s)
  | (?P<imag>i)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE | re.ASCII,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int

    @property
    def end(self) -> int:
        return self.pos + len(self.text)


def _tokenize(text: str) -> Iterator[Token]:
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = match.lastgroup
        if kind == "index":
            kind = "var"
        if kind != "ws":
            yield Token(kind, match.group(0), pos)
        pos = match.end()
    yield Token("end", "", len(text))


def _literal(text: str, pos: int) -> Fraction:
    """A decimal or integer literal as an exact rational."""
    _, _, exponent = text.lower().partition("e")
    if exponent and abs(int(exponent)) > MAX_LITERAL_EXPONENT:
        raise ParseError(f"literal {text} is out of range", pos)
    return Fraction(text)


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"``, an integer or a decimal literal into an exact rational."""
    match = _RATIONAL_RE.fullmatch(text)
    if match is None:
        raise ValueError(f"not a rational literal: {text!r}")
    value = _literal(match.group(2), 0)
    if match.group(3) is not None:
        den = _literal(match.group(3), 0)
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        value /= den
    return -value if match.group(1) == "-" else value


class _Parser:
    def __init__(self, text: str, n: int, mode: Mode, allow_s: bool) -> None:
        self.tokens: List[Token] = list(_tokenize(text))
        self.i = 0
        self.n = n
        self.mode = mode
        self.allow_s = allow_s

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "end":
            self.i += 1
        return tok

    def accept(self, text: str) -> Optional[Token]:
        if self.tok.kind == "op" and self.tok.text == text:
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        tok = self.accept(text)
        if tok is None:
            raise ParseError(f"expected {text!r}, found {self._describe(self.tok)}", self.tok.pos)
        return tok

    @staticmethod
    def _describe(tok: Token) -> str:
        return "end of input" if tok.kind == "end" else repr(tok.text)

    def constant(self, value: Union[Fraction, Complex]) -> ExtendedPoly:
        if isinstance(value, Fraction):
            value = Complex(value, Fraction(0))
        coeff = Complex(self.mode.scalar(value.real), self.mode.scalar(value.imag))
        return ExtendedPoly.from_frac(FracPoly.constant(coeff, self.n, self.mode))

    def parse(self) -> ExtendedPoly:
        value = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self._describe(self.tok)}", self.tok.pos)
        return value

    def expr(self) -> ExtendedPoly:
        negate = False
        if self.accept("-"):
            negate = True
        else:
            self.accept("+")
        value = self.term()
        if negate:
            value = -value
        while True:
            if self.accept("+"):
                value = value + self.term()
            elif self.accept("-"):
                value = value - self.term()
            else:
                return value

    def term(self) -> ExtendedPoly:
        value = self.factor()
        while self.accept("*"):
            value = value * self.factor()
        return value

    def factor(self) -> ExtendedPoly:
        start = self.tok
        base, var_index = self.primary()
        caret = self.accept("^")
        if caret is None:
            return base
        power, power_pos = self.power()
        if var_index is not None and var_index > 0:
            return ExtendedPoly.from_frac(
                FracPoly({unit_exponent(var_index - 1, self.n, power): 1}, self.n, self.mode)
            )
        if power.denominator != 1:
            what = "s" if var_index == 0 else "a compound or numeric factor"
            raise ParseError(f"fractional power of {what}", power_pos)
        if power > MAX_NUMERIC_POWER:
            raise ParseError(f"power {power} is too large", power_pos)
        try:
            return base ** int(power)
        except FracMomError as exc:
            raise ParseError(str(exc), start.pos) from exc

    def power(self) -> Tuple[Fraction, int]:
        tok = self.tok
        if tok.kind == "op" and tok.text == "-":
            raise ParseError("negative exponent", tok.pos)
        if self.accept("("):
            inner = self.tok
            if inner.kind == "op" and inner.text == "-":
                raise ParseError("negative exponent", inner.pos)
            self.accept("+")
            value = self.number()
            if self.accept("/"):
                den_tok = self.tok
                den = self.number()
                if den == 0:
                    raise ParseError("zero denominator", den_tok.pos)
                value /= den
            self.expect(")")
            return value, inner.pos
        if tok.kind == "num":
            if not tok.text.isdigit():
                raise ParseError("bare exponents must be integers; parenthesize rationals", tok.pos)
            self.advance()
            return Fraction(int(tok.text)), tok.pos
        raise ParseError(f"expected an exponent, found {self._describe(tok)}", tok.pos)

    def number(self) -> Fraction:
        tok = self.tok
        if tok.kind != "num":
            raise ParseError(f"expected a number, found {self._describe(tok)}", tok.pos)
        self.advance()
        return _literal(tok.text, tok.pos)

    def primary(self) -> Tuple[ExtendedPoly, Optional[int]]:
        """Return the parsed primary and, for variables, its index (0 for ``s``)."""
        tok = self.tok
        if tok.kind == "num":
            value = self.number()
            if self.accept("/"):
                den_tok = self.tok
                den = self.number()
                if den == 0:
                    raise ParseError("zero denominator", den_tok.pos)
                value /= den
            if self.tok.kind == "imag" and self.tok.pos == self.tokens[self.i - 1].end:
                self.advance()
                return self.constant(Complex(Fraction(0), value)), None
            return self.constant(value), None
        if tok.kind == "imag":
            self.advance()
            return self.constant(Complex(Fraction(0), Fraction(1))), None
        if tok.kind == "var":
            index = int(tok.text[1:])
            if not 1 <= index <= self.n:
                raise ParseError(f"variable {tok.text} outside t1..t{self.n}", tok.pos)
            self.advance()
            poly = FracPoly.variable(index, self.n, self.mode)
            return ExtendedPoly.from_frac(poly), index
        if tok.kind == "s":
            if not self.allow_s:
                raise ParseError("the variable s is not allowed here", tok.pos)
            self.advance()
            return ExtendedPoly.s_power(1, self.n, self.mode), 0
        if self.accept("("):
            value = self.expr()
            self.expect(")")
            return value, None
        raise ParseError(f"unexpected {self._describe(tok)}", tok.pos)


def _parse(text: Union[str, bytes], n: int, mode: Union[Mode, str], allow_s: bool) -> ExtendedPoly:
    if n < 1:
        raise ValueError("dimension must be positive")
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("input is not valid UTF-8", exc.start) from exc
    try:
        return _Parser(text, n, Mode(mode), allow_s).parse()
    except ParseError:
        raise
    except RecursionError as exc:
        raise ParseError("expression is nested too deeply", 0) from exc
    except (FracMomError, ArithmeticError, ValueError) as exc:
        raise ParseError(str(exc), 0) from exc


def parse_fracpoly(text: Union[str, bytes], n: int, mode: Union[Mode, str] = Mode.EXACT) -> FracPoly:
    """Parse ``text`` into a normalized fractional polynomial in ``n`` variables."""
    return _parse(text, n, mode, allow_s=False).coefficient(0)


def parse_extended(text: Union[str, bytes], n: int, mode: Union[Mode, str] = Mode.EXACT) -> ExtendedPoly:
    """Parse an expression that may also use the auxiliary variable ``s``."""
    return _parse(text, n, mode, allow_s=True)


def _format_number(x: Union[Fraction, float]) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))


def _format_monomial(exp: Exponent, s_power: int = 0) -> str:
    factors = []
    for j, a in enumerate(exp, start=1):
        if a == 0:
            continue
        if a == 1:
            factors.append(f"t{j}")
        elif a.denominator == 1:
            factors.append(f"t{j}^{a.numerator}")
        else:
            factors.append(f"t{j}^({a})")
    if s_power == 1:
        factors.append("s")
    elif s_power > 1:
        factors.append(f"s^{s_power}")
    return "*".join(factors)


def _format_term(coeff: Complex, monomial: str) -> Tuple[bool, str]:
    """Return ``(negative, body)`` for one term."""
    if coeff.imag == 0 or coeff.real == 0:
        imaginary = coeff.real == 0
        value = coeff.imag if imaginary else coeff.real
        negative = value < 0
        magnitude = -value if negative else value
        parts = [] if magnitude == 1 and (imaginary or monomial) else [_format_number(magnitude)]
        if imaginary:
            parts.append("i")
        if monomial:
            parts.append(monomial)
        return negative, "*".join(parts)
    sign = "-" if coeff.imag < 0 else "+"
    magnitude = -coeff.imag if coeff.imag < 0 else coeff.imag
    imag_part = "i" if magnitude == 1 else f"{_format_number(magnitude)}*i"
    real_part = coeff.real
    real_text = f"-{_format_number(-real_part)}" if real_part < 0 else _format_number(real_part)
    body = f"({real_text} {sign} {imag_part})"
    return False, f"{body}*{monomial}" if monomial else body


def _join(terms: Sequence[Tuple[bool, str]]) -> str:
    if not terms:
        return "0"
    negative, body = terms[0]
    out = f"-{body}" if negative else body
    for negative, body in terms[1:]:
        out += f" {'-' if negative else '+'} {body}"
    return out


def format_fracpoly(f: FracPoly) -> str:
    """Deterministic text for ``f``, highest exponent first."""
    return _join([_format_term(c, _format_monomial(e)) for e, c in reversed(list(f.items()))])


def format_extended(q: ExtendedPoly) -> str:
    """Text for an extended polynomial, highest power of ``s`` first."""
    terms = []
    for b, poly in reversed(list(q.items())):
        for e, c in reversed(list(poly.items())):
            terms.append(_format_term(c, _format_monomial(e, b)))
    return _join(terms)
