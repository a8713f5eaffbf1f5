"""Test fractional polynomial arithmetic, evaluation and denominator clearing."""

from fractions import Fraction

import pytest

from fracmom.errors import (
    DenominatorError,
    DimensionMismatchError,
    ModeMismatchError,
    NegativeComponentError,
    NonRealError,
    TermLimitError,
)
from fracmom.frac_poly import (
    Complex,
    FracPoly,
    Mode,
    add,
    clear_denominators,
    conj_abs_square,
    evaluate,
    mul,
    rational_root,
)
from fracmom.parser import parse_fracpoly

pytestmark = pytest.mark.unit


def P(text, n=1, mode=Mode.EXACT):
    return parse_fracpoly(text, n, mode)


class TestAdd:
    def test_additive_inverse_is_empty(self):
        result = add(P("t1^(1/2)"), P("-t1^(1/2)"))
        assert result.is_zero
        assert len(result) == 0

    def test_like_terms_merge(self):
        assert add(P("t1 + 1"), P("t1")) == P("2*t1 + 1")

    def test_distinct_exponents_union(self):
        result = add(P("t1^(1/2) + t2", 2), P("t1^(1/3)", 2))
        assert len(result) == 3

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            add(P("t1"), P("t1", 2))

    def test_modes_never_mix(self):
        with pytest.raises(ModeMismatchError):
            P("t1") + P("t1", mode=Mode.FLOAT)


class TestMul:
    def test_half_powers_add(self):
        assert mul(P("t1^(1/2)"), P("t1^(1/2)")) == P("t1")

    def test_difference_of_squares(self):
        assert mul(P("t1 + 1"), P("t1 - 1")) == P("t1^2 - 1")

    def test_complex_conjugate_pair(self):
        assert mul(P("t1^(1/2) + i"), P("t1^(1/2) - i")) == P("t1 + 1")

    def test_term_limit(self):
        f = P("t1 + t2 + 1", 2)
        with pytest.raises(TermLimitError):
            f.mul(f, max_terms=3)

    def test_integer_power(self):
        assert P("t1 + 1") ** 2 == P("t1^2 + 2*t1 + 1")
        assert P("t1 + 1") ** 0 == FracPoly.one(1)


class TestConjAbsSquare:
    def test_half_power_plus_i(self):
        assert conj_abs_square(P("t1^(1/2) + i")) == P("t1 + 1")

    def test_one(self):
        assert conj_abs_square(P("1")) == P("1")

    def test_imaginary_scale(self):
        result = conj_abs_square(P("2*i*t1"))
        assert result == P("4*t1^2")
        assert result.is_real()


class TestEval:
    def test_fractional_power(self):
        assert evaluate(P("2*t1^(3/2)"), [4]) == 16

    def test_zero_factor(self):
        assert evaluate(P("t1^(1/2)*t2", 2), [0, 5]) == 0

    def test_integer_polynomial(self):
        assert evaluate(P("1 + t1^2"), [2]) == 5

    def test_zero_to_the_zero_is_one(self):
        assert evaluate(P("3"), [0]) == 3

    def test_negative_component(self):
        with pytest.raises(NegativeComponentError):
            evaluate(P("t1"), [-1])

    def test_irrational_power_falls_back_to_float(self, caplog):
        value = evaluate(P("t1^(1/2)"), [2])
        assert isinstance(value.real, float)
        assert value.real == pytest.approx(2 ** 0.5)
        assert "floating point" in caplog.text

    def test_eval_at_roots(self):
        f = P("t1^(1/2) + t1^(3/2)")
        assert f.eval_at_roots([3], [2]) == Fraction(3 + 27)

    def test_eval_at_roots_denominator(self):
        with pytest.raises(DenominatorError):
            P("t1^(1/3)").eval_at_roots([2], [2])


class TestClearDenominators:
    def test_scaling(self):
        assert clear_denominators(P("t1^(3/2) - 2"), [2]) == P("t1^3 - 2")

    def test_two_variables(self):
        assert clear_denominators(P("t1^(1/2)*t2^(1/3)", 2), [2, 3]) == P("t1*t2", 2)

    def test_evaluation_oracle(self):
        f = P("1 + t1 + t1^2")
        cleared = clear_denominators(f, [2])
        assert cleared == P("1 + t1^2 + t1^4")
        assert cleared.eval([2]) == f.eval([4]) == 21

    def test_bad_clearing_vector(self):
        with pytest.raises(DenominatorError):
            clear_denominators(P("t1^(1/2)"), [3])


class TestStructure:
    def test_zero_coefficients_dropped(self):
        f = FracPoly({(Fraction(1),): 0, (Fraction(0),): 2}, 1)
        assert list(f.terms) == [(Fraction(0),)]

    def test_denominators(self):
        assert P("t1^(1/2)*t2^(2/3) + t1^(1/3)", 2).denominators() == (6, 3)

    def test_real_coefficients_rejects_complex(self):
        with pytest.raises(NonRealError):
            P("t1 + i").real_coefficients()

    def test_exact_mode_rejects_floats(self):
        with pytest.raises(ModeMismatchError):
            FracPoly.constant(0.5, 1, Mode.EXACT)

    def test_to_float(self):
        f = P("1/2*t1").to_float()
        assert f.mode is Mode.FLOAT
        assert f.coefficient([1]) == Complex(0.5, 0.0)

    def test_immutable(self):
        with pytest.raises(AttributeError):
            P("t1").dim = 2

    @pytest.mark.parametrize(
        "x, k, expected",
        [(Fraction(9, 4), 2, Fraction(3, 2)), (8, 3, Fraction(2)), (2, 2, None), (0, 5, Fraction(0))],
    )
    def test_rational_root(self, x, k, expected):
        assert rational_root(x, k) == expected
