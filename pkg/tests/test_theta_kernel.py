"""Test theta_p, the extended algebra and the kernel membership test."""

import random
from fractions import Fraction

import pytest

from conftest import problem_from
from fracmom.config import Config
from fracmom.errors import DimensionMismatchError, ModeMismatchError, NonRealError
from fracmom.frac_poly import FracPoly, Mode
from fracmom.parser import parse_extended, parse_fracpoly
from fracmom.theta_kernel import ExtendedPoly, kernel_test, make_problem, rho_eval, sigma, theta_eval

pytestmark = pytest.mark.unit

F = Fraction


class TestMakeProblem:
    def test_no_polynomials(self, no_polys):
        assert no_polys.theta_inv == parse_fracpoly("1 + t1^2", 1)
        assert no_polys.c == (1,)
        assert no_polys.m == 0

    def test_half_power(self):
        P = problem_from(["t1^(1/2)"])
        assert P.theta_inv == parse_fracpoly("1 + t1^2 + t1", 1)
        assert P.c == (2,)

    def test_two_variables(self):
        P = problem_from(["t1 - t2"], n=2)
        assert P.theta_inv == parse_fracpoly("1 + 2*t1^2 + 2*t2^2 - 2*t1*t2", 2)
        assert P.c == (1, 1)

    def test_non_real_rejected(self):
        with pytest.raises(NonRealError):
            make_problem([parse_fracpoly("t1 + i", 1)])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            make_problem([parse_fracpoly("t1", 1), parse_fracpoly("t2", 2)])


class TestTheta:
    @pytest.mark.parametrize("t, expected", [(0, F(1)), (2, F(1, 5))])
    def test_no_polynomials(self, no_polys, t, expected):
        assert theta_eval(no_polys, [t]) == expected

    def test_half_power(self):
        assert theta_eval(problem_from(["t1^(1/2)"]), [4]) == F(1, 21)

    def test_theta_times_inverse_is_one(self):
        P = problem_from(["t1^(1/2) - t2"], n=2)
        for t in [(F(9, 4), F(1, 3)), (F(16), F(0)), (F(0), F(7))]:
            assert theta_eval(P, t) * P.theta_inv.eval(t).real == 1

    def test_float_mode(self):
        P = problem_from(["t1 - 2"], mode=Mode.FLOAT)
        assert theta_eval(P, [1.5]) == pytest.approx(1 / (1 + 2.25 + 0.25), rel=1e-14)


class TestRho:
    def test_s_at_one(self, no_polys):
        assert rho_eval(parse_extended("s", 1), no_polys, [1]) == F(1, 2)

    def test_s_times_t(self, no_polys):
        assert rho_eval(parse_extended("s*t1", 1), no_polys, [2]) == F(2, 5)

    @pytest.mark.parametrize("t", [0, F(1, 2), 3, 10])
    def test_sigma_vanishes(self, t):
        P = problem_from(["t1^(1/2) - 1"])
        assert rho_eval(sigma(P), P, [F(t) ** 2]) == 0


class TestSigma:
    def test_no_polynomials(self, no_polys):
        assert sigma(no_polys) == parse_extended("s*(1 + t1^2) - 1", 1)

    def test_half_power(self):
        assert sigma(problem_from(["t1^(1/2)"])) == parse_extended("s*(1 + t1 + t1^2) - 1", 1)


class TestKernel:
    def test_sigma_in_kernel(self, no_polys):
        verdict = kernel_test(sigma(no_polys), no_polys)
        assert verdict.in_kernel
        assert verdict.witness is None

    def test_square_factorization(self, no_polys):
        q = parse_extended("s^2*(1 + t1^2)^2 - 1", 1)
        assert kernel_test(q, no_polys).in_kernel

    def test_s_is_not_in_kernel(self, no_polys):
        verdict = kernel_test(parse_extended("s", 1), no_polys)
        assert not verdict.in_kernel
        assert verdict.witness == (F(0),)
        assert verdict.value == 1

    def test_witness_is_sound(self):
        P = problem_from(["t1^(1/2) - t2"], n=2)
        q = sigma(P) * parse_extended("s*t1^(1/3) + t2", 2) + parse_extended("t1^(1/6)", 2)
        verdict = kernel_test(q, P)
        assert not verdict.in_kernel
        assert rho_eval(q, P, verdict.witness) == verdict.value
        assert verdict.value != 0

    def test_fractional_multiple(self):
        P = problem_from(["t1^(1/2) - 1"])
        q = sigma(P) * parse_extended("s^2*t1^(1/3) - 4*t1^(5/6) + i", 1)
        assert kernel_test(q, P).in_kernel

    def test_members_vanish_at_random_points(self):
        P = problem_from(["t1^(1/2) - t2"], n=2)
        rng = random.Random(11)
        for _ in range(10):
            coeffs = {}
            for b in range(rng.randint(1, 3)):
                terms = {
                    (F(rng.randint(0, 6), rng.choice([1, 2, 3])), F(rng.randint(0, 3), rng.choice([1, 2]))): F(
                        rng.randint(-5, 5), rng.randint(1, 3)
                    )
                    for _ in range(rng.randint(1, 3))
                }
                coeffs[b] = FracPoly(terms, 2)
            q = sigma(P) * ExtendedPoly(coeffs, 2)
            assert kernel_test(q, P).in_kernel
            for _ in range(100):
                # sixth powers keep every exponent with denominator dividing 6 rational
                t = [F(rng.randint(0, 12), rng.randint(1, 4)) ** 6 for _ in range(2)]
                assert rho_eval(q, P, t) == 0, t

    def test_random_points_only_after_grid(self):
        P = make_problem([], n=1)
        config = Config(witness_grid=1, witness_samples=50, seed=3)
        # vanishes at t = 0 only, so the one-point grid gives no witness
        verdict = kernel_test(parse_extended("t1", 1), P, config)
        assert not verdict.in_kernel
        assert verdict.witness is not None and verdict.witness[0] > 0

    def test_float_mode_rejected(self):
        P = problem_from(["t1 - 2"], mode=Mode.FLOAT)
        with pytest.raises(ModeMismatchError):
            kernel_test(parse_extended("s", 1, Mode.FLOAT), P)


class TestExtendedArithmetic:
    def test_zero_coefficients_dropped(self):
        q = ExtendedPoly({3: FracPoly.zero(1), 0: FracPoly.one(1)}, 1)
        assert q.s_degree == 0

    def test_product_degrees_add(self):
        q = parse_extended("s^2 + t1", 1) * parse_extended("s - 1", 1)
        assert q.s_degree == 3
        assert q == parse_extended("s^3 - s^2 + t1*s - t1", 1)

    def test_denominators(self):
        assert parse_extended("s*t1^(1/2) + t2^(2/3)", 2).denominators() == (2, 3)
