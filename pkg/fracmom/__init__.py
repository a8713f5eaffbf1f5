"""Verification toolkit for fractional moment families on the non-negative orthant."""

__version__ = "0.1.0"

from .config import DEFAULT, Config
from .errors import FracMomError
from .frac_poly import Complex, FracPoly, Mode
from .measures import AtomicMeasure, LogAtomicMeasure, delta_forward, gamma, laplace_pushforward, support_check
from .moments import ComputedDelta, GramVerdict, TabulatedDelta, Window, build_basis, gram, psd_check, shifted_gram
from .parser import format_fracpoly, parse_extended, parse_fracpoly
from .theta_kernel import ExtendedPoly, ProblemPolys, kernel_test, make_problem, sigma
from .verifier import Certificate, verify_all

__all__ = [
    "AtomicMeasure",
    "Certificate",
    "Complex",
    "ComputedDelta",
    "Config",
    "DEFAULT",
    "ExtendedPoly",
    "FracMomError",
    "FracPoly",
    "GramVerdict",
    "LogAtomicMeasure",
    "Mode",
    "ProblemPolys",
    "TabulatedDelta",
    "Window",
    "build_basis",
    "delta_forward",
    "format_fracpoly",
    "gamma",
    "gram",
    "kernel_test",
    "laplace_pushforward",
    "make_problem",
    "parse_extended",
    "parse_fracpoly",
    "psd_check",
    "shifted_gram",
    "sigma",
    "support_check",
    "verify_all",
]
