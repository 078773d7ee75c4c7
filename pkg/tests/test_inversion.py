"""Tests for composition, reversion, vacuum sums and correlations."""

import itertools
import random
from fractions import Fraction

import pytest
import sympy as sp

from formal_gaussian.exceptions import (
    ConstantTermError,
    DimensionMismatchError,
    IndexRangeError,
    SingularLinearPartError,
    TruncationError,
)
from formal_gaussian.inversion import (
    compose_diagrammatic,
    connected_correlation,
    correlation,
    covariance_of,
    exponential_integrand,
    free_energy_W,
    free_energy_W_trace,
    moment_cumulant_check,
    nonlinear_part,
    partition_function_Z,
    partition_function_Z_det,
    partition_function_Z_gaussian,
    revert,
    revert_by_trees,
    revert_oracle,
    reversion_z_routes,
    tree_census,
    unnormalized_correlation_direct,
    unnormalized_correlation_gaussian,
)
from formal_gaussian.models import CorrelationSpec
from formal_gaussian.series import Series, SeriesSystem, compose_direct, identity_system


def catalan_system(D: int) -> SeriesSystem:
    """F = X - X^2, whose inverse has Catalan coefficients."""
    return SeriesSystem([Series(1, D, {(1,): 1, (2,): -1})])


def random_invertible(rng: random.Random, D: int) -> SeriesSystem:
    """Two-variable system with linear part [[2, 1], [1, 1]] and random higher terms."""
    linear = [{(1, 0): 2, (0, 1): 1}, {(1, 0): 1, (0, 1): 1}]
    components = []
    for coeffs in linear:
        coeffs = dict(coeffs)
        for _ in range(5):
            alpha = [0, 0]
            for _ in range(rng.randint(2, D)):
                alpha[rng.randrange(2)] += 1
            coeffs[tuple(alpha)] = Fraction(rng.randint(-3, 3), rng.randint(1, 2))
        components.append(Series(2, D, coeffs))
    return SeriesSystem(components)


def random_terms(rng: random.Random, n: int, D: int, low: int, count: int) -> dict:
    coeffs = {}
    for _ in range(count):
        alpha = [0] * n
        for _ in range(rng.randint(low, D)):
            alpha[rng.randrange(n)] += 1
        coeffs[tuple(alpha)] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
    return coeffs


def random_linear_part(rng: random.Random, n: int) -> list[list[Fraction]]:
    """L @ U with nonzero diagonals, so always invertible."""
    lower = [[Fraction(rng.randint(-2, 2)) if j < i else Fraction(0) for j in range(n)] for i in range(n)]
    upper = [[Fraction(rng.randint(-2, 2), rng.randint(1, 2)) if j > i else Fraction(0) for j in range(n)] for i in range(n)]
    for i in range(n):
        lower[i][i] = Fraction(rng.choice([-2, -1, 1, 3]))
        upper[i][i] = Fraction(rng.choice([-1, 1, 2]), rng.randint(1, 3))
    return [[sum(lower[i][k] * upper[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def random_reversible(seed: int, n: int, D: int) -> SeriesSystem:
    """Invertible random linear part plus sparse terms of degree 2..D."""
    rng = random.Random(seed)
    A = random_linear_part(rng, n)
    components = []
    for i in range(n):
        coeffs = random_terms(rng, n, D, 2, 3 + n)
        for j in range(n):
            coeffs[tuple(int(k == j) for k in range(n))] = A[i][j]
        components.append(Series(n, D, coeffs))
    return SeriesSystem(components)


class TestComposition:
    """Tests for compose_diagrammatic."""

    def test_matches_direct(self):
        F = SeriesSystem([Series(1, 4, {(0,): 2, (1,): 1, (3,): -1})])
        G = SeriesSystem([Series(1, 4, {(1,): 3, (2,): Fraction(1, 2)})])
        assert compose_diagrammatic(F, G) == compose_direct(F, G)

    @pytest.mark.parametrize("seed", range(20))
    def test_random_pairs_match_direct(self, seed):
        rng = random.Random(100 + seed)
        n = 1 + seed % 2
        F = SeriesSystem(Series(n, 4, random_terms(rng, n, 4, 0, 6)) for _ in range(n))
        G = SeriesSystem(Series(n, 4, random_terms(rng, n, 4, 1, 6)) for _ in range(n))
        assert compose_diagrammatic(F, G) == compose_direct(F, G)

    def test_mismatched_truncation(self):
        F = SeriesSystem([Series(1, 3, {(1,): 1})])
        G = SeriesSystem([Series(1, 4, {(1,): 1})])
        with pytest.raises(DimensionMismatchError):
            compose_diagrammatic(F, G)

    def test_inner_constant_rejected(self):
        F = SeriesSystem([Series(1, 3, {(1,): 1})])
        G = SeriesSystem([Series(1, 3, {(0,): 1, (1,): 1})])
        with pytest.raises(ConstantTermError):
            compose_diagrammatic(F, G)


class TestReversion:
    """Tests for the three reversion routes."""

    def test_catalan(self):
        """Test (X - X^2)^{-1} = Y + Y^2 + 2Y^3 + 5Y^4 + 14Y^5."""
        result = revert(catalan_system(5))
        assert result.series[0] == Series(1, 5, {(1,): 1, (2,): 1, (3,): 2, (4,): 5, (5,): 14})

    def test_matches_sympy_reversion(self):
        """Test that substituting the inverse into F gives y up to degree 5."""
        y = sp.symbols("y")
        F = SeriesSystem([Series(1, 5, {(1,): 2, (2,): 1, (3,): Fraction(-1, 3)})])
        inverse = revert(F).series[0]
        phi = sum(sp.Rational(str(inverse.coefficient((k,)))) * y**k for k in range(1, 6))
        image = sp.expand(2 * phi + phi**2 - phi**3 / 3)
        for k in range(1, 6):
            assert image.coeff(y, k) == (1 if k == 1 else 0)

    @pytest.mark.parametrize("seed", range(21))
    def test_round_trip_and_three_routes(self, seed):
        """Test both compositions give the identity and all routes agree, n in {1, 2, 3}, D = 5."""
        n = 1 + seed % 3
        F = random_reversible(seed, n, 5)
        inverse = revert(F).series
        assert compose_direct(F, inverse) == identity_system(n, 5)
        assert compose_direct(inverse, F) == identity_system(n, 5)
        assert revert_by_trees(F) == inverse
        assert revert_oracle(F) == inverse

    def test_lower_degree(self):
        result = revert(catalan_system(6), 3)
        assert result.series.trunc_degree == 3
        assert result.series[0].coefficient((3,)) == 2

    def test_degree_above_truncation(self):
        with pytest.raises(TruncationError):
            revert(catalan_system(2), 4)

    def test_singular_linear_part(self):
        F = SeriesSystem([Series(1, 3, {(2,): 1})])
        with pytest.raises(SingularLinearPartError):
            revert(F)

    def test_constant_term_rejected(self):
        F = SeriesSystem([Series(1, 3, {(0,): 1, (1,): 1})])
        with pytest.raises(ConstantTermError):
            revert(F)

    def test_non_square_rejected(self):
        F = SeriesSystem([Series(2, 3, {(1, 0): 1})])
        with pytest.raises(DimensionMismatchError):
            covariance_of(F)

    def test_nonlinear_part(self):
        H = nonlinear_part(catalan_system(3))
        assert H[0] == Series(1, 3, {(2,): 1})

    def test_tree_census(self):
        census = tree_census(4)
        assert [d.classes for d in census] == [1, 1, 2, 5]
        assert census[1].inverse_aut_sum == Fraction(1, 2)
        assert census[2].inverse_aut_sum == Fraction(2, 3)

    def test_result_carries_census(self):
        result = revert(catalan_system(3))
        assert [d.degree for d in result.diagnostics] == [1, 2, 3]


class TestVacuum:
    """Tests for W and Z."""

    def test_central_binomial_partition_function(self):
        """Test Z = 1/sqrt(1 - 4Y) for F = X - X^2."""
        F = catalan_system(4)
        expected = Series(1, 3, {(0,): 1, (1,): 2, (2,): 6, (3,): 20})
        assert partition_function_Z(F, 3) == expected
        assert partition_function_Z_det(F, 3) == expected
        assert partition_function_Z_gaussian(F, 3) == expected

    def test_free_energy(self):
        """Test W = -log(1 - 4Y)/2."""
        F = catalan_system(4)
        expected = Series(1, 3, {(1,): 2, (2,): 4, (3,): Fraction(32, 3)})
        assert free_energy_W(F, 3) == expected
        assert free_energy_W_trace(F, 3) == expected

    def test_routes_agree_two_variables(self):
        rng = random.Random(13)
        F = random_invertible(rng, 4)
        comparison = reversion_z_routes(F, 3)
        assert comparison.agree
        assert set(comparison.routes) == {"diagrams", "determinant", "trace"}
        assert comparison.value().constant_term == 1

    def test_gaussian_route_two_variables(self):
        rng = random.Random(17)
        F = random_invertible(rng, 3)
        comparison = reversion_z_routes(F, 2, gaussian=True)
        assert comparison.agree
        assert "gaussian" in comparison.routes

    def test_w_needs_one_more_degree(self):
        with pytest.raises(TruncationError):
            free_energy_W(catalan_system(3), 3)

    def test_linear_system_has_trivial_z(self):
        F = SeriesSystem([Series(1, 3, {(1,): 3})])
        assert partition_function_Z(F, 2) == Series.constant(1, 1, 2)
        assert partition_function_Z_det(F, 2) == Series.constant(1, 1, 2)


class TestExponentialIntegrand:
    """Tests for the truncated Gaussian integrand."""

    def test_grading_and_limit(self):
        H = nonlinear_part(catalan_system(4))
        expansion, grading = exponential_integrand(H, 2, I=[0])
        assert expansion.complete_through == 3
        assert grading(4) == 3
        assert grading(1) == 1

    def test_needs_higher_h(self):
        H = nonlinear_part(catalan_system(2))
        with pytest.raises(TruncationError, match="degree 3 is needed"):
            exponential_integrand(H, 2)

    def test_insertion_out_of_range(self):
        H = nonlinear_part(catalan_system(4))
        with pytest.raises(IndexRangeError):
            exponential_integrand(H, 2, I=[1])


class TestCorrelations:
    """Tests for correlations and the cluster identity."""

    def test_one_point_connected_is_inverse(self):
        F = catalan_system(5)
        assert connected_correlation(F, [0], [], 3) == revert(F, 3).series[0]

    def test_two_u_sources_not_connected(self):
        F = catalan_system(5)
        assert connected_correlation(F, [0, 0], [], 3).is_zero()

    def test_ubar_source_differentiates_w(self):
        F = catalan_system(5)
        spec = CorrelationSpec(J=[0], kind="connected")
        assert correlation(F, spec, 2) == Series(1, 2, {(0,): 2, (1,): 8, (2,): 32})

    def test_normalized_one_point(self):
        F = catalan_system(5)
        spec = CorrelationSpec(I=[0], kind="normalized")
        assert correlation(F, spec, 3) == revert(F, 3).series[0]

    def test_unnormalized_one_point(self):
        """Test <u>_U = Phi * Z = Y + 3Y^2 for F = X - X^2."""
        F = catalan_system(5)
        spec = CorrelationSpec(I=[0])
        assert correlation(F, spec, 2) == Series(1, 2, {(1,): 1, (2,): 3})
        assert unnormalized_correlation_gaussian(F, [0], [], 2) == Series(1, 2, {(1,): 1, (2,): 3})

    @pytest.mark.parametrize("I,J", [([0], [0]), ([0, 0], [0]), ([], [0, 0]), ([0, 0, 0], [])])
    def test_moment_cumulant_one_variable(self, I, J):
        F = SeriesSystem([Series(1, 6, {(1,): 1, (2,): -1, (3,): Fraction(1, 2)})])
        report = moment_cumulant_check(F, I, J, 2)
        assert report.passed, report.detail

    @pytest.mark.parametrize("seed", range(10))
    def test_moment_cumulant_all_small_source_sets(self, seed):
        """Test every I, J with |I| + |J| <= 3 at D = 3, n in {1, 2}."""
        n = 1 + seed % 2
        F = random_reversible(200 + seed, n, 7)
        for size in range(1, 4):
            for p in range(size + 1):
                for I in itertools.combinations_with_replacement(range(n), p):
                    for J in itertools.combinations_with_replacement(range(n), size - p):
                        report = moment_cumulant_check(F, I, J, 3)
                        assert report.passed, report.detail

    def test_gaussian_matches_direct(self):
        F = SeriesSystem([Series(1, 6, {(1,): 2, (2,): -1, (3,): 1})])
        for I, J in (([0], []), ([], [0]), ([0], [0])):
            assert unnormalized_correlation_gaussian(F, I, J, 2) == unnormalized_correlation_direct(F, I, J, 2)

    def test_insertion_out_of_range(self):
        F = catalan_system(5)
        with pytest.raises(IndexRangeError):
            correlation(F, CorrelationSpec(I=[1]), 2)
