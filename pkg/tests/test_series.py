"""Tests for truncated power series arithmetic."""

import itertools
import math
import random
from fractions import Fraction

import pytest
import sympy as sp

from formal_gaussian.exceptions import (
    ConstantTermError,
    DimensionMismatchError,
    DomainError,
    IndexRangeError,
    TruncationError,
)
from formal_gaussian.series import (
    Series,
    SeriesMatrix,
    SeriesSystem,
    compose_chain,
    compose_direct,
    derivative,
    det_series,
    evaluate_at_zero,
    exp_series,
    homogeneous_part,
    identity_system,
    jacobian,
    log_series,
    matrix_inverse,
    monomials_up_to,
    multiplicity_index,
    power,
    reciprocal,
    scale,
    tensor_element,
    tensor_to_series,
    times_variable,
    truncate,
    truncate_system,
)


def x(j: int, n: int = 1, D: int = 4) -> Series:
    return Series.variable(j, n, D)


def random_series(rng: random.Random, n: int, D: int, constant: bool = True, terms: int = 6) -> Series:
    coeffs = {}
    for _ in range(terms):
        alpha = [0] * n
        for _ in range(rng.randint(0 if constant else 1, D)):
            alpha[rng.randrange(n)] += 1
        coeffs[tuple(alpha)] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
    return Series(n, D, coeffs)


def random_constant_free(rng: random.Random, n: int, D: int) -> SeriesSystem:
    return SeriesSystem(random_series(rng, n, D, constant=False) for _ in range(n))


def cofactor_det(matrix: SeriesMatrix, rows: list[int], cols: list[int]) -> Series:
    """Laplace expansion along the first remaining row."""
    if len(rows) == 1:
        return matrix[rows[0], cols[0]]
    total = Series.zero(matrix.n_vars, matrix.trunc_degree)
    for k, col in enumerate(cols):
        minor = cofactor_det(matrix, rows[1:], cols[:k] + cols[k + 1 :])
        term = matrix[rows[0], col] * minor
        total = total + term if k % 2 == 0 else total - term
    return total


class TestSeries:
    """Tests for the Series value type."""

    def test_zero_coefficients_and_high_terms_dropped(self):
        """Test that zero coefficients and terms above D are discarded."""
        s = Series(1, 2, {(0,): 0, (1,): 3, (3,): 5})
        assert s.coeffs == {(1,): Fraction(3)}

    def test_wrong_exponent_length_raises_error(self):
        """Test that exponents of the wrong length are rejected."""
        with pytest.raises(DimensionMismatchError):
            Series(2, 3, {(1,): 1})

    def test_mixed_degrees_raise_error(self):
        """Test that series with different truncations cannot be combined."""
        with pytest.raises(DimensionMismatchError):
            x(0, D=3) + x(0, D=4)

    def test_binomial_square(self):
        """Test (1+X)^2 = 1 + 2X + X^2."""
        s = power(1 + x(0), 2)
        assert s == Series(1, 4, {(0,): 1, (1,): 2, (2,): 1})

    def test_product_truncates(self):
        """Test that products drop terms above the truncation degree."""
        s = x(0, D=2) * x(0, D=2) * x(0, D=2)
        assert s.is_zero()

    def test_terms_sorted_by_degree_then_exponent(self):
        """Test stable term order."""
        s = Series(2, 3, {(0, 2): 1, (1, 0): 2, (2, 0): 3, (0, 1): 4})
        assert [alpha for alpha, _ in s.terms()] == [(0, 1), (1, 0), (0, 2), (2, 0)]

    def test_multiplicity_index(self):
        """Test multiplicity index of an index list."""
        assert multiplicity_index([0, 2, 0], 3) == (2, 0, 1)
        with pytest.raises(IndexRangeError):
            multiplicity_index([3], 3)

    def test_monomial_count(self):
        """Test the number of monomials of degree <= d in n variables."""
        assert len(list(monomials_up_to(2, 3))) == 10
        assert len(list(monomials_up_to(3, 2))) == 10

    def test_float_coefficient_rejected(self):
        """Test that inexact float coefficients are refused."""
        with pytest.raises(DomainError, match="float"):
            Series(1, 2, {(1,): 0.1})
        with pytest.raises(DomainError):
            Series.constant(0.5, 1, 2)
        with pytest.raises(DomainError):
            scale(Series.variable(0, 1, 2), 0.5)

    def test_string_coefficient_is_exact(self):
        assert Series(1, 2, {(1,): "1/10"}).coefficient((1,)) == Fraction(1, 10)

    @pytest.mark.parametrize("seed", range(6))
    def test_ring_axioms(self, seed):
        """Test commutative ring laws on random triples."""
        rng = random.Random(seed)
        a, b, c = (random_series(rng, 2, 3) for _ in range(3))
        zero, one = Series.zero(2, 3), Series.constant(1, 2, 3)
        assert (a + b) + c == a + (b + c)
        assert a + b == b + a
        assert a + zero == a
        assert (a - a).is_zero()
        assert (a * b) * c == a * (b * c)
        assert a * b == b * a
        assert a * one == a
        assert a * (b + c) == a * b + a * c


class TestDegreeOperations:
    """Tests for truncate, derivative and times_variable."""

    def test_truncate_lowers_degree(self):
        s = truncate(Series(1, 4, {(1,): 1, (4,): 1}), 2)
        assert s.trunc_degree == 2
        assert s == Series(1, 2, {(1,): 1})

    def test_truncate_cannot_raise(self):
        with pytest.raises(TruncationError):
            truncate(x(0, D=2), 3)

    def test_derivative_lowers_truncation(self):
        """Test that d/dX of a degree-D series is known to degree D-1."""
        s = derivative(Series(1, 3, {(3,): 2, (1,): 5}), 0)
        assert s == Series(1, 2, {(2,): 6, (0,): 5})

    def test_derivative_at_degree_zero_raises(self):
        with pytest.raises(TruncationError):
            derivative(Series.constant(1, 1, 0), 0)

    def test_times_variable_raises_truncation(self):
        s = times_variable(Series(2, 1, {(0, 0): 1, (1, 0): 2}), 1)
        assert s == Series(2, 2, {(0, 1): 1, (1, 1): 2})

    def test_homogeneous_part_and_value_at_zero(self):
        s = Series(1, 3, {(0,): 7, (1,): 1, (2,): 4})
        assert homogeneous_part(s, 2) == Series(1, 3, {(2,): 4})
        assert evaluate_at_zero(s) == 7


class TestTranscendental:
    """Tests for reciprocal, exp and log."""

    def test_reciprocal_geometric(self):
        s = reciprocal(1 - x(0, D=5))
        assert s == Series(1, 5, {(k,): 1 for k in range(6)})

    def test_reciprocal_needs_constant_term(self):
        with pytest.raises(ConstantTermError):
            reciprocal(x(0))

    def test_exp_coefficients(self):
        s = exp_series(x(0, D=5))
        for k in range(6):
            assert s.coefficient((k,)) == Fraction(1, math.factorial(k))

    def test_log_inverts_exp(self):
        g = Series(2, 4, {(1, 0): 1, (1, 1): Fraction(1, 2), (0, 3): -2})
        assert log_series(exp_series(g)) == g

    def test_exp_needs_constant_free_argument(self):
        with pytest.raises(ConstantTermError):
            exp_series(1 + x(0))
    @pytest.mark.parametrize("seed", range(5))
    def test_reciprocal_of_random_unit(self, seed):
        rng = random.Random(seed)
        F = random_series(rng, 2, 4, constant=False) + Fraction(rng.choice([-3, -1, 2, 5]), rng.randint(1, 3))
        assert F * reciprocal(F) == Series.constant(1, 2, 4)


class TestTensors:
    """Tests for the divided-coefficient tensor view."""

    def test_tensor_element_pure_power(self):
        """Test F^{[2]}_{0,0,0} = 2! * c for F_0 = c X_0^2."""
        F = SeriesSystem([Series(2, 3, {(2, 0): 3})])
        assert tensor_element(F, 0, [0, 0]) == 6

    def test_tensor_element_symmetric(self):
        F = SeriesSystem([Series(2, 3, {(1, 1): Fraction(5, 2)})])
        assert tensor_element(F, 0, [0, 1]) == tensor_element(F, 0, [1, 0]) == Fraction(5, 2)

    def test_tensor_element_above_truncation(self):
        F = SeriesSystem([x(0, D=2)])
        with pytest.raises(TruncationError):
            tensor_element(F, 0, [0, 0, 0])

    def test_tensor_to_series(self):
        s = tensor_to_series(2, 3, {(2, 1): 4, (1, 0): 1})
        assert s == Series(2, 3, {(2, 1): 2, (1, 0): 1})
    def test_tensor_element_symmetric_under_all_permutations(self):
        """Test every index reordering of every tensor element up to order 3."""
        F = SeriesSystem([random_series(random.Random(seed), 3, 3, terms=12) for seed in range(2)])
        for i in range(2):
            for d in range(1, 4):
                for js in itertools.product(range(3), repeat=d):
                    value = tensor_element(F, i, js)
                    mu = multiplicity_index(js, 3)
                    assert value == F[i].coefficient(mu) * math.prod(math.factorial(m) for m in mu)
                    for perm in itertools.permutations(js):
                        assert tensor_element(F, i, perm) == value


class TestComposition:
    """Tests for substitution and composition."""

    def test_compose_univariate(self):
        """Test (X + X^2) o (2X) = 2X + 4X^2."""
        F = SeriesSystem([x(0) + x(0) * x(0)])
        G = SeriesSystem([x(0) * 2])
        assert compose_direct(F, G) == SeriesSystem([Series(1, 4, {(1,): 2, (2,): 4})])

    def test_compose_matches_sympy(self):
        """Test a two-variable composition against sympy expansion."""
        X0, X1 = sp.symbols("X0 X1")
        F = SeriesSystem([Series(2, 3, {(1, 0): 1, (1, 1): 2, (0, 2): -1})])
        G = SeriesSystem(
            [Series(2, 3, {(1, 0): 1, (0, 2): 1}), Series(2, 3, {(0, 1): 3, (1, 1): Fraction(1, 2)})]
        )
        g0 = X0 + X1**2
        g1 = 3 * X1 + X0 * X1 / 2
        expr = sp.expand(g0 + 2 * g0 * g1 - g1**2)
        poly = sp.Poly(expr, X0, X1)
        expected = {
            alpha: Fraction(int(c.p), int(c.q))
            for alpha, c in zip(poly.monoms(), poly.coeffs())
            if sum(alpha) <= 3
        }
        assert compose_direct(F, G)[0] == Series(2, 3, expected)

    def test_compose_needs_constant_free_inner(self):
        F = SeriesSystem([x(0)])
        with pytest.raises(ConstantTermError):
            compose_direct(F, SeriesSystem([1 + x(0)]))

    def test_compose_dimension_mismatch(self):
        F = SeriesSystem([Series(2, 4, {(1, 0): 1})])
        with pytest.raises(DimensionMismatchError):
            compose_direct(F, SeriesSystem([x(0)]))

    def test_identity_is_neutral(self):
        F = SeriesSystem([x(0) + x(0) * x(0) * 3])
        I = identity_system(1, 4)
        assert compose_chain([I, F, I]) == F

    def test_truncate_system_requires_degree(self):
        F = SeriesSystem([x(0, D=2)])
        assert truncate_system(F, 1).trunc_degree == 1
        with pytest.raises(TruncationError, match="degree 3 is needed"):
            truncate_system(F, 3)
    @pytest.mark.parametrize("seed", range(4))
    def test_compose_is_associative(self, seed):
        rng = random.Random(seed)
        F, G, H = (random_constant_free(rng, 2, 4) for _ in range(3))
        assert compose_direct(compose_direct(F, G), H) == compose_direct(F, compose_direct(G, H))

    def test_compose_chain_of_three(self):
        rng = random.Random(31)
        F, G, H = (random_constant_free(rng, 2, 3) for _ in range(3))
        assert compose_chain([F, G, H]) == compose_direct(F, compose_direct(G, H))


class TestMatrices:
    """Tests for series matrices."""

    def test_determinant(self):
        """Test det [[1+X, X], [X, 1]] = 1 + X - X^2."""
        one = Series.constant(1, 1, 3)
        X = x(0, D=3)
        M = SeriesMatrix([[one + X, X], [X, one]])
        assert det_series(M) == Series(1, 3, {(0,): 1, (1,): 1, (2,): -1})

    def test_identity_determinant(self):
        assert det_series(SeriesMatrix.identity(3, 2, 2)) == Series.constant(1, 2, 2)

    def test_inverse(self):
        X0, X1 = x(0, 2, 3), x(1, 2, 3)
        one = Series.constant(1, 2, 3)
        M = SeriesMatrix([[one + X0, X1], [X0 * X1, one * 2 - X1]])
        assert M @ matrix_inverse(M) == SeriesMatrix.identity(2, 2, 3)

    def test_inverse_needs_invertible_constant_part(self):
        X = x(0, D=2)
        with pytest.raises(ConstantTermError):
            matrix_inverse(SeriesMatrix([[X, X], [X, X]]))

    def test_jacobian(self):
        F = SeriesSystem([Series(2, 3, {(2, 0): 1, (0, 1): 1}), Series(2, 3, {(1, 1): 1})])
        J = jacobian(F)
        assert J[0, 0] == Series(2, 2, {(1, 0): 2})
        assert J[0, 1] == Series.constant(1, 2, 2)
        assert J[1, 0] == Series(2, 2, {(0, 1): 1})

    @pytest.mark.parametrize("seed", range(3))
    def test_determinant_matches_cofactor_expansion(self, seed):
        rng = random.Random(seed)
        M = SeriesMatrix([[random_series(rng, 2, 2) for _ in range(3)] for _ in range(3)])
        assert det_series(M) == cofactor_det(M, [0, 1, 2], [0, 1, 2])
