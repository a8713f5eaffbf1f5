import json
from pathlib import Path
from typing import Any, Callable, Dict, List

import pytest

from fracmom.frac_poly import Mode
from fracmom.measures import AtomicMeasure
from fracmom.parser import parse_fracpoly
from fracmom.theta_kernel import ProblemPolys, make_problem


def problem_from(texts: List[str], n: int = 1, mode: Mode = Mode.EXACT) -> ProblemPolys:
    """ProblemPolys from polynomial strings."""
    return make_problem([parse_fracpoly(t, n, mode) for t in texts], n=n, mode=mode)


def unit_mass(*point: Any, power: int = 1) -> AtomicMeasure:
    """Exact unit mass at ``t = point`` with every coordinate given as root ** power."""
    return AtomicMeasure.from_roots([list(point)], [1], power=power)


@pytest.fixture
def no_polys() -> ProblemPolys:
    """n = 1, m = 0: theta_p^-1 = 1 + t1^2."""
    return make_problem([], n=1, mode=Mode.EXACT)


@pytest.fixture
def shifted_line() -> ProblemPolys:
    """p_1 = t1 - 2, supported on t1 >= 2."""
    return problem_from(["t1 - 2"])


@pytest.fixture
def mass_at_four() -> AtomicMeasure:
    """Unit mass at t = 4, stored as root 2 with power 2."""
    return unit_mass(2, power=2)


@pytest.fixture
def mass_at_one() -> AtomicMeasure:
    return unit_mass(1, power=2)


@pytest.fixture
def two_atoms() -> AtomicMeasure:
    """mu = 2 delta_1 + delta_4."""
    return AtomicMeasure.from_roots([[1], [2]], [2, 1], power=2)


@pytest.fixture
def write_problem(tmp_path: Path) -> Callable[..., Path]:
    """Write a problem dict as JSON and return its path."""
    counter = {"i": 0}

    def write(data: Dict[str, Any], name: str = "") -> Path:
        counter["i"] += 1
        path = tmp_path / (name or f"problem_{counter['i']}.json")
        path.write_text(json.dumps(data, indent=2))
        return path

    return write


@pytest.fixture
def forward_problem() -> Dict[str, Any]:
    """p_1 = t1 - 2 with a unit mass at t = 4 and window D=2, N=4, B=2."""
    return {
        "n": 1,
        "mode": "exact",
        "polynomials": ["t1 - 2"],
        "measure": {"atoms": [{"roots": {"values": [2], "power": 2}, "weight": 1}]},
        "window": {"D": 2, "N": 4, "B": 2},
    }
