"""Problem-file loading, validation and delta-table emission."""
from __future__ import annotations

import json
import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, StrictFloat, StrictInt, StrictStr, ValidationError, model_validator

from .errors import DenominatorError, FracMomError, ParseError, ProblemFileError
from .frac_poly import Exponent, Mode, Scalar, rational_root
from .measures import AtomicMeasure, LogAtomicMeasure
from .moments import DeltaFamily, TabulatedDelta, Window, encode_exponent, encode_scalar
from .parser import parse_fracpoly, parse_rational
from .theta_kernel import ProblemPolys, make_problem
from .verifier import GammaSource, required_indices

logger = logging.getLogger(__name__)

Number = Union[StrictInt, StrictFloat, StrictStr]


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RootsSpec(_Model):
    values: List[Number]
    power: StrictInt = Field(ge=1)


class AtomSpec(_Model):
    point: Optional[List[Number]] = None
    roots: Optional[RootsSpec] = None
    weight: Number

    @model_validator(mode="after")
    def _one_location(self) -> "AtomSpec":
        if (self.point is None) == (self.roots is None):
            raise ValueError("an atom needs exactly one of 'point' or 'roots'")
        return self


class MeasureSpec(_Model):
    atoms: List[AtomSpec]


class LogAtomSpec(_Model):
    point: List[Number]
    weight: Number


class LogMeasureSpec(_Model):
    atoms: List[LogAtomSpec]


class TableEntry(_Model):
    alpha: List[Number]
    beta: StrictInt = Field(default=0, ge=0)
    value: Number


class WindowSpec(_Model):
    D: StrictInt = Field(ge=1)
    N: StrictInt = Field(ge=0)
    B: StrictInt = Field(ge=0)


class ProblemFile(_Model):
    """The JSON problem description shared by every subcommand."""

    n: StrictInt = Field(ge=1)
    mode: Literal["exact", "float"] = "exact"
    polynomials: List[StrictStr] = Field(default_factory=list)
    measure: Optional[MeasureSpec] = None
    log_measure: Optional[LogMeasureSpec] = None
    delta_table: Optional[List[TableEntry]] = None
    gamma_table: Optional[List[TableEntry]] = None
    window: Optional[WindowSpec] = None
    tolerance: Optional[Number] = None

    @model_validator(mode="after")
    def _one_source(self) -> "ProblemFile":
        sources = [s for s in ("measure", "log_measure", "delta_table") if getattr(self, s) is not None]
        if len(sources) > 1:
            raise ValueError(f"at most one of measure, log_measure, delta_table may be given, got {sources}")
        return self


def load_problem(path: Union[str, Path]) -> ProblemFile:
    """Read and validate a problem file; every failure becomes ``ProblemFileError``."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ProblemFileError(f"cannot read {path}: {exc}") from exc
    return parse_problem(text)


def parse_problem(text: str) -> ProblemFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    try:
        return ProblemFile.model_validate(data)
    except ValidationError as exc:
        errors = exc.errors()
        first = errors[0]
        field = ".".join(str(part) for part in first["loc"]) or None
        extra = f" (+{len(errors) - 1} more)" if len(errors) > 1 else ""
        raise ProblemFileError(f"{first['msg']}{extra}", field=field) from exc


def to_scalar(value: Any, mode: Mode, field: str) -> Scalar:
    """Decode a JSON value: ``"p/q"`` strings and integers are exact, floats need float mode."""
    if isinstance(value, str):
        try:
            value = parse_rational(value)
        except ValueError as exc:
            raise ProblemFileError(str(exc), field=field) from exc
    elif isinstance(value, float) and mode is Mode.EXACT:
        raise ProblemFileError("JSON float in exact mode; write rationals as \"p/q\" strings", field=field)
    return mode.scalar(value)


def resolve_mode(problem: ProblemFile, override: Optional[str] = None) -> Mode:
    return Mode(override or problem.mode)


def build_problem_polys(problem: ProblemFile, mode: Mode) -> ProblemPolys:
    polys = []
    for k, text in enumerate(problem.polynomials):
        try:
            polys.append(parse_fracpoly(text, problem.n, mode))
        except ParseError as exc:
            raise ProblemFileError(f"cannot parse {text!r}: {exc}", field=f"polynomials.{k}") from exc
    return make_problem(polys, n=problem.n, mode=mode)


def build_window(problem: ProblemFile, P: ProblemPolys, override: Optional[Window] = None) -> Window:
    if override is not None:
        w = override
    elif problem.window is not None:
        w = Window(problem.window.D, problem.window.N, problem.window.B)
    else:
        w = Window.default_for(P)
    try:
        w.validate_for(P)
    except DenominatorError as exc:
        raise ProblemFileError(str(exc), field="window.D") from exc
    return w


def build_tolerance(problem: ProblemFile, mode: Mode, override: Optional[float] = None) -> Optional[float]:
    if override is not None:
        tol = override
    elif problem.tolerance is not None:
        tol = float(to_scalar(problem.tolerance, Mode.FLOAT, "tolerance"))
    else:
        return None
    if tol < 0:
        raise ProblemFileError("tolerance must be non-negative", field="tolerance")
    if mode is Mode.EXACT and tol:
        logger.warning("exact mode compares exactly; tolerance %g is ignored", tol)
    return tol


def _exponent(values: Sequence[Any], n: int, field: str) -> Exponent:
    if len(values) != n:
        raise ProblemFileError(f"expected {n} components, got {len(values)}", field=field)
    out = tuple(Fraction(to_scalar(v, Mode.EXACT, field)) for v in values)
    if any(a < 0 for a in out):
        raise ProblemFileError("exponents must be non-negative", field=field)
    return out


def build_measure(problem: ProblemFile, mode: Mode, D: Optional[int] = None) -> AtomicMeasure:
    """The atomic measure of the problem; exact atoms share one root power divisible by ``D``."""
    if problem.measure is None:
        raise ProblemFileError("no measure given", field="measure")
    located: List[Tuple[List[Scalar], int]] = []
    weights = []
    for i, atom in enumerate(problem.measure.atoms):
        field = f"measure.atoms.{i}"
        if atom.roots is not None:
            roots = [to_scalar(v, mode, f"{field}.roots") for v in atom.roots.values]
            located.append((roots, atom.roots.power))
        else:
            located.append(([to_scalar(v, mode, f"{field}.point") for v in atom.point or []], 1))
        if len(located[-1][0]) != problem.n:
            raise ProblemFileError(f"expected {problem.n} components", field=field)
        weights.append(to_scalar(atom.weight, mode, f"{field}.weight"))

    try:
        if mode is Mode.FLOAT:
            points = [[float(r) ** power for r in roots] for roots, power in located]
            return AtomicMeasure.from_points(points, weights, Mode.FLOAT, n=problem.n)
        power = math.lcm(D or 1, *(p for _, p in located)) if located else (D or 1)
        common = []
        for i, (roots, p) in enumerate(located):
            new = [rational_root(r ** p, power) for r in roots]
            if any(x is None for x in new):
                raise ProblemFileError(
                    f"coordinates have no rational {power}-th root; use float mode", field=f"measure.atoms.{i}"
                )
            common.append(new)
        return AtomicMeasure.from_roots(common, weights, power, n=problem.n)
    except FracMomError:
        raise
    except ValueError as exc:
        raise ProblemFileError(str(exc), field="measure") from exc


def build_log_measure(problem: ProblemFile) -> LogAtomicMeasure:
    if problem.log_measure is None:
        raise ProblemFileError("no log_measure given", field="log_measure")
    points, weights = [], []
    for i, atom in enumerate(problem.log_measure.atoms):
        field = f"log_measure.atoms.{i}"
        points.append([to_scalar(v, Mode.FLOAT, f"{field}.point") for v in atom.point])
        weights.append(to_scalar(atom.weight, Mode.FLOAT, f"{field}.weight"))
    try:
        return LogAtomicMeasure.from_points(points, weights, n=problem.n)
    except ValueError as exc:
        raise ProblemFileError(str(exc), field="log_measure") from exc


def build_delta_table(problem: ProblemFile, mode: Mode) -> TabulatedDelta:
    if problem.delta_table is None:
        raise ProblemFileError("no delta_table given", field="delta_table")
    entries: Dict[Tuple[Exponent, int], Scalar] = {}
    for i, entry in enumerate(problem.delta_table):
        field = f"delta_table.{i}"
        key = (_exponent(entry.alpha, problem.n, f"{field}.alpha"), entry.beta)
        if key in entries:
            raise ProblemFileError("duplicate entry", field=field)
        entries[key] = to_scalar(entry.value, mode, f"{field}.value")
    return TabulatedDelta(entries, problem.n, mode, coverage=f"{len(entries)} tabulated entries")


def build_gamma_table(problem: ProblemFile, mode: Mode) -> Optional[Dict[Exponent, Scalar]]:
    if problem.gamma_table is None:
        return None
    table: Dict[Exponent, Scalar] = {}
    for i, entry in enumerate(problem.gamma_table):
        field = f"gamma_table.{i}"
        table[_exponent(entry.alpha, problem.n, f"{field}.alpha")] = to_scalar(entry.value, mode, f"{field}.value")
    return table


def emit_delta_problem(
    problem: ProblemFile,
    delta: DeltaFamily,
    gamma_source: GammaSource,
    P: ProblemPolys,
    w: Window,
    mode: Mode,
    tolerance: Optional[float] = None,
) -> Dict[str, Any]:
    """A problem file tabulating ``delta`` over every index the checks of ``w`` read."""
    rows = [
        {"alpha": encode_exponent(alpha), "beta": beta, "value": encode_scalar(delta.value(alpha, beta))}
        for alpha, beta in required_indices(P, w)
    ]
    out: Dict[str, Any] = {
        "n": problem.n,
        "mode": mode.value,
        "polynomials": list(problem.polynomials),
        "window": w.to_dict(),
    }
    if tolerance is not None:
        out["tolerance"] = tolerance
    out["delta_table"] = rows
    if gamma_source is not None:
        lookup = gamma_source if callable(gamma_source) else gamma_source.__getitem__
        out["gamma_table"] = [
            {"alpha": encode_exponent(alpha), "value": encode_scalar(lookup(alpha))} for alpha in w.alphas(problem.n)
        ]
    logger.info("tabulated %d delta entries for window %s", len(rows), w)
    return out


def write_json(path: Union[str, Path], data: Any) -> None:
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
