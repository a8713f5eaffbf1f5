"""Test windows, delta families, Gram matrices and the PSD certificates."""

import threading
from fractions import Fraction

import numpy as np
import pytest

from conftest import problem_from, unit_mass
from fracmom.config import Config
from fracmom.errors import MissingEntryError, NotSymmetricError, ResourceLimitError
from fracmom.frac_poly import FracPoly, Mode
from fracmom.measures import AtomicMeasure, delta_forward
from fracmom.moments import (
    ComputedDelta,
    TabulatedDelta,
    Window,
    build_basis,
    gram,
    psd_check,
    quadratic_form,
    shifted_gram,
)

pytestmark = pytest.mark.unit

F = Fraction


def basis_of(*pairs):
    return [(tuple(F(a) for a in alpha), beta) for alpha, beta in pairs]


class TestWindow:
    def test_default(self):
        P = problem_from(["t1^(1/2) - t2^(1/3)"], n=2)
        assert Window.default_for(P) == Window(6, 12, 2)

    def test_parse(self):
        assert Window.parse("2,4,1") == Window(2, 4, 1)
        with pytest.raises(ValueError):
            Window.parse("2,4")
        with pytest.raises(ValueError):
            Window(0, 1, 1)

    def test_alphas_graded(self):
        assert Window(1, 2, 0).alphas(2) == [
            (F(0), F(0)),
            (F(1), F(0)),
            (F(0), F(1)),
            (F(2), F(0)),
            (F(1), F(1)),
            (F(0), F(2)),
        ]


class TestBuildBasis:
    def test_half_steps(self):
        assert build_basis(Window(2, 2, 1), 1) == basis_of(
            ((0,), 0), ((F(1, 2),), 0), ((1,), 0), ((0,), 1), ((F(1, 2),), 1), ((1,), 1)
        )

    def test_single(self):
        assert build_basis(Window(1, 0, 0), 1) == basis_of(((0,), 0))

    def test_two_variables(self):
        assert build_basis(Window(1, 1, 0), 2) == basis_of(((0, 0), 0), ((1, 0), 0), ((0, 1), 0))

    def test_limit(self):
        with pytest.raises(ResourceLimitError):
            build_basis(Window(1, 30, 5), 3, Config(max_basis=100))


class TestDeltaFamilies:
    def test_computed_matches_forward(self, shifted_line, two_atoms):
        delta = ComputedDelta(two_atoms, shifted_line)
        for alpha, beta in build_basis(Window(2, 4, 2), 1):
            assert delta.value(alpha, beta) == delta_forward(two_atoms, shifted_line, alpha, beta)

    def test_computed_is_thread_safe(self, shifted_line, two_atoms):
        delta = ComputedDelta(two_atoms, shifted_line)
        indices = build_basis(Window(2, 6, 3), 1)
        results = [[] for _ in range(4)]

        def worker(out):
            out.extend(delta.value(a, b) for a, b in indices)

        threads = [threading.Thread(target=worker, args=(out,)) for out in results]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert all(r == results[0] for r in results)

    def test_float_computed(self, shifted_line, two_atoms):
        exact = ComputedDelta(two_atoms, shifted_line)
        approx = ComputedDelta(two_atoms.to_float(), shifted_line)
        assert approx.mode is Mode.FLOAT
        assert approx.value([F(3, 2)], 2) == pytest.approx(float(exact.value([F(3, 2)], 2)), rel=1e-12)

    def test_tabulated_missing_entry(self):
        table = TabulatedDelta({((0,), 0): 1}, n=1)
        assert table.value([0], 0) == 1
        with pytest.raises(MissingEntryError, match=r"\(2, 1\)") as info:
            table.value([2], 1)
        assert info.value.beta == 1
        assert not table.covers([2], 1)

    def test_tabulated_from_family(self, no_polys, mass_at_four):
        source = ComputedDelta(mass_at_four, no_polys)
        indices = build_basis(Window(2, 2, 1), 1)
        table = TabulatedDelta.from_family(source, indices)
        assert len(table) == len(indices)
        assert table.value([F(1, 2)], 1) == F(2, 17)


class TestGram:
    def test_unit_mass_at_one(self, no_polys):
        M = gram(ComputedDelta(unit_mass(1, power=2), no_polys), basis_of(((0,), 0), ((F(1, 2),), 0)))
        assert M.tolist() == [[1, 1], [1, 1]]

    def test_unit_mass_at_four(self, no_polys, mass_at_four):
        M = gram(ComputedDelta(mass_at_four, no_polys), basis_of(((0,), 0), ((F(1, 2),), 0)))
        assert M.tolist() == [[1, 2], [2, 4]]

    def test_empty_basis(self, no_polys, mass_at_four):
        M = gram(ComputedDelta(mass_at_four, no_polys), [])
        assert M.shape == (0, 0)
        assert psd_check(M).psd

    def test_missing_entry_reports_index(self):
        table = TabulatedDelta({((0,), 0): 1, ((1,), 0): 1}, n=1)
        with pytest.raises(MissingEntryError) as info:
            gram(table, basis_of(((0,), 0), ((1,), 0)))
        assert info.value.alpha == (F(2),)


class TestShiftedGram:
    def test_outside_support(self, shifted_line, mass_at_one):
        delta = ComputedDelta(mass_at_one, shifted_line)
        assert shifted_gram(delta, basis_of(((0,), 0)), shifted_line.polys[0]).tolist() == [[-1]]

    def test_inside_support(self, shifted_line, mass_at_four):
        delta = ComputedDelta(mass_at_four, shifted_line)
        assert shifted_gram(delta, basis_of(((0,), 0)), shifted_line.polys[0]).tolist() == [[2]]

    def test_zero_polynomial(self, shifted_line, mass_at_four):
        delta = ComputedDelta(mass_at_four, shifted_line)
        M = shifted_gram(delta, build_basis(Window(2, 2, 1), 1), FracPoly.zero(1))
        assert all(x == 0 for x in M.flat)
        assert psd_check(M).psd


class TestPsdCheck:
    def test_rank_one(self):
        verdict = psd_check(np.array([[F(1), F(1)], [F(1), F(1)]], dtype=object))
        assert verdict.psd
        assert verdict.pivots == (F(1), F(0))

    def test_negative_scalar(self):
        verdict = psd_check([[F(-1)]])
        assert not verdict.psd
        assert verdict.witness == (F(1),)
        assert verdict.quadratic_value == -1

    def test_identity(self):
        assert psd_check(np.eye(3, dtype=int).astype(object)).psd
        assert psd_check(np.eye(3), Mode.FLOAT).psd

    def test_pivot_order_ties_lowest_index(self):
        verdict = psd_check([[F(2), F(0), F(0)], [F(0), F(3), F(0)], [F(0), F(0), F(3)]])
        assert verdict.pivots == (F(3), F(3), F(2))

    def test_zero_diagonal_with_coupling(self):
        M = [[F(1), F(1), F(1)], [F(1), F(1), F(2)], [F(1), F(2), F(1)]]
        verdict = psd_check(M)
        assert not verdict.psd
        assert verdict.quadratic_value < 0
        assert quadratic_form(M, verdict.witness) == verdict.quadratic_value

    @pytest.mark.parametrize(
        "M, witness",
        [
            ([[F(0), F(0)], [F(0), F(-1)]], (F(0), F(1))),
            ([[F(1), F(0), F(0)], [F(0), F(0), F(0)], [F(0), F(0), F(-1)]], (F(0), F(0), F(1))),
        ],
    )
    def test_negative_diagonal_behind_zero_pivot(self, M, witness):
        verdict = psd_check(M)
        assert not verdict.psd
        assert verdict.witness == witness
        assert verdict.quadratic_value == -1
        assert not psd_check([[float(x) for x in row] for row in M], Mode.FLOAT, 1e-9).psd

    def test_indefinite_witness_is_exact(self):
        M = [[F(4), F(2), F(1)], [F(2), F(1), F(3)], [F(1), F(3), F(2)]]
        verdict = psd_check(M)
        assert not verdict.psd
        assert quadratic_form(M, verdict.witness) == verdict.quadratic_value < 0

    def test_not_symmetric(self):
        with pytest.raises(NotSymmetricError):
            psd_check([[F(1), F(2)], [F(0), F(1)]])
        with pytest.raises(NotSymmetricError):
            psd_check([[1.0, 2.0], [0.0, 1.0]], Mode.FLOAT)

    def test_float_within_tolerance(self):
        verdict = psd_check([[1.0, 1.0], [1.0, 1.0 - 1e-12]], Mode.FLOAT, 1e-9)
        assert verdict.psd
        assert verdict.min_eigenvalue == pytest.approx(0.0, abs=1e-9)

    def test_float_failure_witness(self):
        M = np.array([[1.0, 2.0], [2.0, 1.0]])
        verdict = psd_check(M, Mode.FLOAT)
        assert not verdict.psd
        assert verdict.min_eigenvalue == pytest.approx(-1.0)
        v = np.array(verdict.witness)
        assert v @ M @ v == pytest.approx(-1.0)

    def test_verdict_dict(self):
        data = psd_check([[F(-1, 2)]]).to_dict()
        assert data == {"pass": False, "size": 1, "pivots": [], "witness": ["1"], "quadratic_value": "-1/2"}

    def test_enlarged_window_keeps_failure(self, shifted_line, mass_at_one):
        delta = ComputedDelta(mass_at_one, shifted_line)
        p = shifted_line.polys[0]
        for w in [Window(1, 0, 0), Window(2, 2, 0), Window(2, 2, 1), Window(2, 4, 2)]:
            assert not psd_check(shifted_gram(delta, build_basis(w, 1), p)).psd


def test_exact_and_float_agree_on_necessity_measure():
    P = problem_from(["t1^(1/2) - 1"])
    mu = AtomicMeasure.from_roots([[1], [F(3, 2)], [3]], [1, F(1, 3), 2], power=2)
    basis = build_basis(Window(2, 4, 2), 1)
    exact = ComputedDelta(mu, P)
    approx = ComputedDelta(mu.to_float(), P)
    for Mx, Mf in [
        (gram(exact, basis), gram(approx, basis)),
        (shifted_gram(exact, basis, P.polys[0]), shifted_gram(approx, basis, P.polys[0])),
    ]:
        assert psd_check(Mx).psd == psd_check(Mf, Mode.FLOAT, 1e-9).psd
