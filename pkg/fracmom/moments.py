"""Truncation windows, delta families, Gram matrices and PSD certification."""
from __future__ import annotations

import logging
import math
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .config import DEFAULT, Config
from .errors import (
    DenominatorError,
    DimensionMismatchError,
    MissingEntryError,
    ModeMismatchError,
    NotSymmetricError,
    ResourceLimitError,
)
from .frac_poly import Exponent, FracPoly, Mode, Scalar, add_exponents, as_exponent
from .measures import AtomicMeasure
from .theta_kernel import ProblemPolys, theta_at_roots

logger = logging.getLogger(__name__)

Index = Tuple[Exponent, int]


def encode_scalar(x: Any) -> Union[str, float, int, None]:
    """JSON form of a value: rationals as ``"p/q"`` strings, floats as numbers."""
    if x is None:
        return None
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(x)
    return float(x)


def encode_exponent(alpha: Sequence[Any]) -> List[str]:
    return [str(Fraction(a)) for a in alpha]


def index_key(index: Index) -> Tuple[int, Fraction, Tuple[Fraction, ...]]:
    """Sort key for indices: beta, then total degree, then descending lex on alpha."""
    alpha, beta = index
    return (beta, sum(alpha, Fraction(0)), tuple(-a for a in alpha))


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Non-negative integer vectors summing to ``total``, descending lex."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class Window:
    """Finite index set ``{(alpha, beta): alpha in (1/D)Z_+^n, D|alpha| <= N, beta <= B}``."""

    D: int
    N: int
    B: int

    def __post_init__(self) -> None:
        if self.D < 1:
            raise ValueError(f"window D must be positive, got {self.D}")
        if self.N < 0 or self.B < 0:
            raise ValueError(f"window N and B must be non-negative, got N={self.N}, B={self.B}")

    @classmethod
    def default_for(cls, P: ProblemPolys, config: Config = DEFAULT) -> "Window":
        D = math.lcm(*P.c) if P.c else 1
        return cls(D=D, N=config.degree_factor * D, B=config.beta_depth)

    @classmethod
    def parse(cls, text: str) -> "Window":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3 or not all(p.isdigit() for p in parts):
            raise ValueError(f"window must be 'D,N,B' with non-negative integers, got {text!r}")
        return cls(*(int(p) for p in parts))

    def validate_for(self, P: ProblemPolys) -> None:
        need = math.lcm(*P.c) if P.c else 1
        if self.D % need:
            raise DenominatorError(
                f"window D={self.D} is not a multiple of the exponent denominator lcm {need}"
            )

    def alphas(self, n: int) -> List[Exponent]:
        """Every in-window exponent vector in graded order."""
        out = []
        for degree in range(self.N + 1):
            for numerators in _compositions(degree, n):
                out.append(tuple(Fraction(k, self.D) for k in numerators))
        return out

    def size(self, n: int) -> int:
        return math.comb(self.N + n, n) * (self.B + 1)

    def to_dict(self) -> Dict[str, int]:
        return {"D": self.D, "N": self.N, "B": self.B}

    def __str__(self) -> str:
        return f"(D={self.D}, N={self.N}, B={self.B})"


def build_basis(w: Window, n: int, config: Config = DEFAULT) -> List[Index]:
    """Window basis, beta ascending, then alpha in graded order."""
    size = w.size(n)
    if size > config.max_basis:
        raise ResourceLimitError(f"basis of window {w} has {size} elements, limit is {config.max_basis}")
    alphas = w.alphas(n)
    return [(alpha, beta) for beta in range(w.B + 1) for alpha in alphas]


class DeltaFamily(ABC):
    """A family ``delta_(alpha, beta)`` indexed by exponents and non-negative integers."""

    n: int
    mode: Mode

    @abstractmethod
    def value(self, alpha: Sequence[Any], beta: int) -> Scalar:
        ...

    def covers(self, alpha: Sequence[Any], beta: int) -> bool:
        return True

    def __call__(self, alpha: Sequence[Any], beta: int) -> Scalar:
        return self.value(alpha, beta)


class ComputedDelta(DeltaFamily):
    """``delta_(alpha, beta) = sum_i w_i t_i^alpha theta_p(t_i)^beta``, memoized."""

    def __init__(self, mu: AtomicMeasure, P: ProblemPolys) -> None:
        if mu.n != P.n:
            raise DimensionMismatchError(f"measure on R_+^{mu.n} with polynomials in {P.n} variables")
        if mu.mode is Mode.EXACT and P.mode is not Mode.EXACT:
            raise ModeMismatchError("an exact measure needs exact polynomials")
        self.n = mu.n
        self.mode = mu.mode
        self.mu = mu
        self.P = P if mu.mode is Mode.EXACT else P.to_float()
        self._memo: Dict[Index, Scalar] = {}
        self._lock = threading.Lock()
        if self.mode is Mode.EXACT:
            powers = (mu.power,) * mu.n
            self._thetas: Any = [theta_at_roots(self.P, a.roots, powers) for a in mu.atoms]
        else:
            self._points = mu.points_array()
            self._weights = mu.weights_array()
            self._thetas = 1.0 / np.array(
                [self.P.theta_inv.eval(a.point).real for a in mu.atoms], dtype=float
            )

    def _exact(self, alpha: Exponent, beta: int) -> Fraction:
        scaled = [a * self.mu.power for a in alpha]
        if any(k.denominator != 1 for k in scaled):
            raise DenominatorError(f"exponent {alpha} needs denominators dividing {self.mu.power}")
        total = Fraction(0)
        for atom, theta in zip(self.mu.atoms, self._thetas):
            term = atom.weight * theta ** beta
            for r, k in zip(atom.roots, scaled):
                term *= r ** int(k)
            total += term
        return total

    def _float(self, alpha: Exponent, beta: int) -> float:
        if not self.mu.atoms:
            return 0.0
        powers = np.prod(self._points ** np.array([float(a) for a in alpha]), axis=1)
        return float(self._weights @ (powers * self._thetas ** beta))

    def value(self, alpha: Sequence[Any], beta: int) -> Scalar:
        key = (as_exponent(alpha, self.n), int(beta))
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        result = self._exact(*key) if self.mode is Mode.EXACT else self._float(*key)
        with self._lock:
            self._memo.setdefault(key, result)
        return result


class TabulatedDelta(DeltaFamily):
    """A finite table of delta values; lookups outside it raise ``MissingEntryError``."""

    def __init__(
        self,
        entries: Mapping[Tuple[Sequence[Any], int], Any],
        n: int,
        mode: Union[Mode, str] = Mode.EXACT,
        coverage: str = "",
    ) -> None:
        self.n = n
        self.mode = Mode(mode)
        self.coverage = coverage
        self._entries: Dict[Index, Scalar] = {}
        for (alpha, beta), v in entries.items():
            if beta < 0:
                raise ValueError(f"negative beta {beta} in delta table")
            self._entries[(as_exponent(alpha, n), int(beta))] = self.mode.scalar(v)

    @classmethod
    def from_family(cls, delta: DeltaFamily, indices: Iterable[Index], coverage: str = "") -> "TabulatedDelta":
        return cls({idx: delta.value(*idx) for idx in indices}, delta.n, delta.mode, coverage)

    @property
    def entries(self) -> Mapping[Index, Scalar]:
        return dict(self._entries)

    def covers(self, alpha: Sequence[Any], beta: int) -> bool:
        return (as_exponent(alpha, self.n), int(beta)) in self._entries

    def value(self, alpha: Sequence[Any], beta: int) -> Scalar:
        key = (as_exponent(alpha, self.n), int(beta))
        try:
            return self._entries[key]
        except KeyError:
            raise MissingEntryError(*key) from None

    def __len__(self) -> int:
        return len(self._entries)


def _matrix(size: int, mode: Mode) -> np.ndarray:
    if mode is Mode.EXACT:
        return np.full((size, size), Fraction(0), dtype=object)
    return np.zeros((size, size), dtype=float)


def gram(delta: DeltaFamily, basis: Sequence[Index]) -> np.ndarray:
    """``M[i, j] = delta(alpha_i + alpha_j, beta_i + beta_j)``."""
    M = _matrix(len(basis), delta.mode)
    for i, (a, b) in enumerate(basis):
        for j in range(i, len(basis)):
            a2, b2 = basis[j]
            M[i, j] = M[j, i] = delta.value(add_exponents(a, a2), b + b2)
    return M


def shifted_gram(delta: DeltaFamily, basis: Sequence[Index], p: FracPoly) -> np.ndarray:
    """``M[i, j] = sum_xi a_xi delta(alpha_i + alpha_j + xi, beta_i + beta_j)``."""
    if p.dim != delta.n:
        raise DimensionMismatchError(f"polynomial of dimension {p.dim} for n = {delta.n}")
    coeffs = [(xi, delta.mode.scalar(a)) for xi, a in p.real_coefficients().items()]
    M = _matrix(len(basis), delta.mode)
    for i, (a, b) in enumerate(basis):
        for j in range(i, len(basis)):
            a2, b2 = basis[j]
            base = add_exponents(a, a2)
            entry = delta.mode.scalar(0)
            for xi, coeff in coeffs:
                entry += coeff * delta.value(add_exponents(base, xi), b + b2)
            M[i, j] = M[j, i] = entry
    return M


@dataclass(frozen=True)
class GramVerdict:
    """Outcome of a PSD test: exact pivots or a float eigenvalue estimate, plus a witness on failure."""

    psd: bool
    size: int
    mode: Mode
    pivots: Optional[Tuple[Fraction, ...]] = None
    min_eigenvalue: Optional[float] = None
    witness: Optional[Tuple[Scalar, ...]] = None
    quadratic_value: Optional[Scalar] = None

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"pass": self.psd, "size": self.size}
        if self.mode is Mode.EXACT:
            out["pivots"] = [str(p) for p in self.pivots or ()]
        else:
            out["min_eigenvalue"] = self.min_eigenvalue
        out["witness"] = None if self.witness is None else [encode_scalar(x) for x in self.witness]
        out["quadratic_value"] = encode_scalar(self.quadratic_value)
        return out


def quadratic_form(M: Any, v: Sequence[Any]) -> Scalar:
    """``v^T M v``, exact for rational input."""
    rows = [list(row) for row in M]
    total: Any = 0
    for i, vi in enumerate(v):
        if not vi:
            continue
        for j, vj in enumerate(v):
            if vj:
                total += vi * rows[i][j] * vj
    return total


def _ldlt_exact(M: Any) -> GramVerdict:
    size = len(M)
    A = [[Fraction(x) for x in row] for row in M]
    for i in range(size):
        for j in range(i + 1, size):
            if A[i][j] != A[j][i]:
                raise NotSymmetricError(f"matrix is not symmetric at ({i}, {j})")

    remaining = list(range(size))
    eliminated: List[int] = []
    multipliers: Dict[int, Dict[int, Fraction]] = {}
    pivots: List[Fraction] = []
    x: Optional[Dict[int, Fraction]] = None

    while remaining:
        best = max(remaining, key=lambda i: (A[i][i], -i))
        d = A[best][best]
        if d < 0:
            x = {best: Fraction(1)}
            break
        if d == 0:
            negative = [i for i in remaining if A[i][i] < 0]
            if negative:
                x = {negative[0]: Fraction(1)}
                break
            # every remaining diagonal is zero; PSD iff the Schur complement vanishes
            for pos, i in enumerate(remaining):
                for j in remaining[pos + 1:]:
                    if A[i][j]:
                        x = {i: Fraction(1), j: Fraction(-1 if A[i][j] > 0 else 1)}
                        break
                if x is not None:
                    break
            if x is None:
                pivots.extend(Fraction(0) for _ in remaining)
            break
        pivots.append(d)
        eliminated.append(best)
        remaining.remove(best)
        col = {i: A[i][best] / d for i in remaining}
        multipliers[best] = col
        for i in remaining:
            if col[i]:
                for j in remaining:
                    A[i][j] -= col[i] * A[best][j]

    if x is None:
        return GramVerdict(psd=True, size=size, mode=Mode.EXACT, pivots=tuple(pivots))

    # back-substitute through the eliminated pivots so v^T M v equals x^T S x
    v = [Fraction(0)] * size
    for i, value in x.items():
        v[i] = value
    for p in reversed(eliminated):
        v[p] = -sum((l * v[i] for i, l in multipliers[p].items()), Fraction(0))
    value = quadratic_form(M, v)
    logger.debug("exact PSD failure after %d pivots, v^T M v = %s", len(pivots), value)
    return GramVerdict(
        psd=False, size=size, mode=Mode.EXACT, pivots=tuple(pivots), witness=tuple(v), quadratic_value=value
    )


def _eigen_float(M: Any, tol: float) -> GramVerdict:
    A = np.asarray(M, dtype=float)
    size = A.shape[0] if A.ndim == 2 else 0
    if size == 0:
        return GramVerdict(psd=True, size=0, mode=Mode.FLOAT, min_eigenvalue=0.0)
    norm = float(np.linalg.norm(A, np.inf))
    scale = tol * (1.0 + norm)
    asym = float(np.max(np.abs(A - A.T)))
    if asym > scale:
        raise NotSymmetricError(f"matrix asymmetry {asym:.3g} exceeds tolerance {scale:.3g}")
    A = (A + A.T) / 2.0
    eigenvalues, vectors = np.linalg.eigh(A)
    lowest = float(eigenvalues[0])
    if lowest >= -scale:
        return GramVerdict(psd=True, size=size, mode=Mode.FLOAT, min_eigenvalue=lowest)
    v = vectors[:, 0]
    value = float(v @ A @ v)
    logger.debug("float PSD failure, min eigenvalue %.6g", lowest)
    return GramVerdict(
        psd=False,
        size=size,
        mode=Mode.FLOAT,
        min_eigenvalue=lowest,
        witness=tuple(float(x) for x in v),
        quadratic_value=value,
    )


def psd_check(M: Any, mode: Union[Mode, str] = Mode.EXACT, tol: float = DEFAULT.float_tolerance) -> GramVerdict:
    """Decide positive semi-definiteness of a symmetric matrix.

    Exact mode runs an LDL^T factorization with symmetric pivoting (largest
    remaining diagonal first, lowest index on ties) and is PSD iff every
    pivot is non-negative and the Schur complement left at a zero pivot
    vanishes. Float mode compares the smallest eigenvalue against
    ``-tol * (1 + ||M||_inf)``. A failure always carries a witness vector.
    """
    if Mode(mode) is Mode.EXACT:
        return _ldlt_exact(M)
    return _eigen_float(M, tol)
