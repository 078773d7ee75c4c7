"""Lagrange-Good inversion: F_i = X_i G_i(F) and its determinant identity.

The scalar-X case solves F_i = X_i G_i(F) for square G and checks

    Omega(F) / det(I - K) = sum_M X^M / M! * d_u^M [Omega(u) G(u)^M] at u = 0,
    K_ij = X_i d_j G_i(F),

coefficient by coefficient. The matrix-X case replaces X_i by a matrix of
n^2 indeterminates X_ij (flattened as i * n + j, 0-based) and solves
F_i = sum_j X_ij G_j(F).
"""

import logging
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .diagrams import (
    FeynmanRules,
    aut_order_lg_circuit,
    aut_order_lg_tree,
    enumerate_lg_circuits,
    enumerate_lg_trees,
)
from .exceptions import DimensionMismatchError, ResourceLimitError, TruncationError
from .models import CheckReport, LimitsConfig, RouteComparison
from .series import (
    MultiIndex,
    Series,
    SeriesMatrix,
    SeriesSystem,
    derivative,
    det_series,
    evaluate_at_zero,
    exp_series,
    homogeneous_part,
    log_series,
    monomials_up_to,
    multiindex_factorial,
    power,
    reciprocal,
    substitute,
    times_variable,
    trace,
    truncate,
    truncate_system,
)

logger = logging.getLogger(__name__)


def _check_square(G: SeriesSystem) -> int:
    if len(G) != G.n_vars:
        raise DimensionMismatchError(
            f"G has {len(G)} components in {G.n_vars} variables; Lagrange-Good needs a square system"
        )
    return len(G)


def _check_degree(D: int) -> None:
    if D < 1:
        raise TruncationError(f"degree must be >= 1, got {D}")


def lg_solve(G: SeriesSystem, D: int) -> SeriesSystem:
    """
    The constant-free solution of F_i = X_i G_i(F) mod degree D+1.

    Each X factor raises the degree by one, so the degree-k part of F is
    X_i times the degree-(k-1) part of G_i(F_{<k}); it is extracted one
    degree at a time.

    Raises:
        TruncationError: If G is known below degree D-1.
    """
    _check_degree(D)
    n = _check_square(G)
    G = truncate_system(G, D - 1, "G")
    coeffs: list[dict[MultiIndex, Fraction]] = [dict() for _ in range(n)]
    for k in range(1, D + 1):
        lower = SeriesSystem(Series(n, k - 1, coeffs[i]) for i in range(n))
        cache: dict = {}
        for i in range(n):
            inner = substitute(truncate(G[i], k - 1), lower, cache)
            coeffs[i].update(times_variable(homogeneous_part(inner, k - 1), i).coeffs)
    return SeriesSystem(Series(n, D, coeffs[i]) for i in range(n))


def lg_solve_oracle(G: SeriesSystem, D: int) -> SeriesSystem:
    """Plain fixed-point iteration F <- X G(F) from F = 0, D passes."""
    _check_degree(D)
    n = _check_square(G)
    low = truncate_system(G, D - 1, "G")
    F = SeriesSystem(Series.zero(n, D) for _ in range(n))
    for _ in range(D):
        inner = truncate_system(F, D - 1)
        cache: dict = {}
        F = SeriesSystem(times_variable(substitute(low[i], inner, cache), i) for i in range(n))
    return F


def lg_solve_by_trees(G: SeriesSystem, D: int) -> SeriesSystem:
    """F as the sum over Lagrange-Good tree classes of amplitude / aut."""
    _check_degree(D)
    n = _check_square(G)
    rules = FeynmanRules.for_lagrange_good(truncate_system(G, D - 1, "G"), D)
    totals = [Series.zero(n, D) for _ in range(n)]
    for tree in enumerate_lg_trees(D):
        weight = aut_order_lg_tree(tree)
        totals = [total + value / weight for total, value in zip(totals, rules.tree(tree))]
    return SeriesSystem(totals)


def lg_jacobian_matrix(G: SeriesSystem, D: int, F: Optional[SeriesSystem] = None) -> SeriesMatrix:
    """
    K_ij = X_i d_j G_i(F) mod degree D+1.

    d_j G_i is known one degree lower than G, and the X_i factor gives that
    degree back, so G must be known to degree D.
    """
    _check_degree(D)
    n = _check_square(G)
    G = truncate_system(G, D, "G")
    F = lg_solve(G, D) if F is None else F
    inner = truncate_system(F, D - 1, "F")
    cache: dict = {}
    return SeriesMatrix(
        [times_variable(substitute(derivative(G[i], j), inner, cache), i) for j in range(n)]
        for i in range(n)
    )


def _trace_log(K: SeriesMatrix, D: int) -> Series:
    """sum_{p=1}^{D} tr(K^p) / p, which is -log det(I - K) for K without constant term."""
    total = Series.zero(K.n_vars, D)
    power_ = K
    for p in range(1, D + 1):
        total = total + trace(power_) / p
        power_ = power_ @ K
    return total


def _circuit_sum(G: SeriesSystem, D: int) -> Series:
    rules = FeynmanRules.for_lagrange_good(truncate_system(G, D, "G"), D)
    total = Series.zero(len(G), D)
    for circuit in enumerate_lg_circuits(D):
        total = total + rules.circuit(circuit) / aut_order_lg_circuit(circuit)
    return total


def lg_free_energy(G: SeriesSystem, D: int) -> RouteComparison:
    """W = -log det(I - K) by the determinant, trace and circuit routes."""
    K = lg_jacobian_matrix(G, D)
    identity = SeriesMatrix.identity(K.size, K.n_vars, D)
    comparison = RouteComparison(
        name="lagrange-good-W",
        routes={
            "determinant": -log_series(det_series(identity - K)),
            "trace": _trace_log(K, D),
            "diagrams": _circuit_sum(G, D),
        },
    )
    if not comparison.agree:
        logger.warning("Lagrange-Good W routes disagree at degree %d", D)
    return comparison


def lg_partition_Z(G: SeriesSystem, D: int) -> RouteComparison:
    """
    Z = 1 / det(I - K) along three routes.

    Returns:
        Routes "determinant" (reciprocal of the truncated determinant),
        "trace" (exp of the trace-log sum) and "diagrams" (exp of the
        circuit sum).
    """
    K = lg_jacobian_matrix(G, D)
    identity = SeriesMatrix.identity(K.size, K.n_vars, D)
    comparison = RouteComparison(
        name="lagrange-good-Z",
        routes={
            "determinant": reciprocal(det_series(identity - K)),
            "trace": exp_series(_trace_log(K, D)),
            "diagrams": exp_series(_circuit_sum(G, D)),
        },
    )
    if not comparison.agree:
        logger.warning("Lagrange-Good Z routes disagree at degree %d", D)
    logger.debug("lg_partition_Z: degree %d, %d circuit classes", D, len(enumerate_lg_circuits(D)))
    return comparison


def _omega_of(F: Sequence[Series], omega_alpha: Sequence[int]) -> Series:
    result = Series.constant(1, F[0].n_vars, F[0].trunc_degree)
    for component, exponent in zip(F, omega_alpha):
        if exponent:
            result = result * power(component, exponent)
    return result


def _differentiate(series: Series, alpha: Sequence[int]) -> Series:
    for j, count in enumerate(alpha):
        for _ in range(count):
            series = derivative(series, j)
    return series


def _identity_rhs(G: SeriesSystem, omega_alpha: Sequence[int], row: Sequence[int], col: Sequence[int]) -> Fraction:
    """d_u^row [u^omega prod_j G_j^col_j] at u = 0, built at truncation |row|."""
    width = sum(row)
    body = Series.monomial(omega_alpha, 1, width)
    for j, exponent in enumerate(col):
        if exponent:
            body = body * power(truncate(G[j], width), exponent)
    return evaluate_at_zero(_differentiate(body, row))


def _check_lengths(n: int, **indices: Sequence[int]) -> None:
    for name, value in indices.items():
        if len(value) != n:
            raise DimensionMismatchError(f"{name} has length {len(value)}, expected {n}")


def lg_identity_check(G: SeriesSystem, omega_alpha: Sequence[int], M: Sequence[int]) -> CheckReport:
    """
    Compare both sides of the Lagrange-Good identity at X^M.

    The left side is M! times the coefficient of X^M in Omega(F) / det(I - K);
    the right side is d_u^M [u^omega G(u)^M] at 0 by series algebra alone.

    Raises:
        TruncationError: If G is known below degree |M|.
    """
    n = _check_square(G)
    _check_lengths(n, omega_alpha=omega_alpha, M=M)
    D = sum(M)
    if G.trunc_degree < D:
        raise TruncationError(f"G is known to degree {G.trunc_degree}, |M| = {D}")
    if D == 0:
        lhs = evaluate_at_zero(Series.monomial(omega_alpha, 1, 0))
    else:
        F = lg_solve(G, D)
        K = lg_jacobian_matrix(G, D, F)
        Z = reciprocal(det_series(SeriesMatrix.identity(n, n, D) - K))
        lhs = (_omega_of(F, omega_alpha) * Z).coefficient(M) * multiindex_factorial(M)
    rhs = _identity_rhs(G, omega_alpha, M, M)
    passed = lhs == rhs
    if not passed:
        logger.warning("Lagrange-Good identity fails at M=%s omega=%s", list(M), list(omega_alpha))
    return CheckReport(
        name="lagrange-good-identity",
        passed=passed,
        lhs=str(lhs),
        rhs=str(rhs),
        detail=f"omega={list(omega_alpha)} M={list(M)}",
    )


def lg_identity_sweep(
    G: SeriesSystem, max_degree: int, omegas: Iterable[Sequence[int]]
) -> list[CheckReport]:
    """lg_identity_check for every omega given and every M with |M| <= max_degree."""
    n = _check_square(G)
    return [
        lg_identity_check(G, omega, M)
        for omega in omegas
        for M in monomials_up_to(n, max_degree)
    ]


# --- matrix X --------------------------------------------------------------


def matrix_variable(i: int, j: int, n: int) -> int:
    """Flat index of X_ij among the n^2 matrix variables."""
    return i * n + j


def _check_matrix_limits(n: int, D: int, limits: Optional[LimitsConfig]) -> None:
    limits = limits or LimitsConfig()
    if n > limits.max_matrix_vars:
        raise ResourceLimitError(
            f"matrix-X system with n={n} exceeds max_matrix_vars={limits.max_matrix_vars}"
        )
    if D > limits.max_matrix_degree:
        raise ResourceLimitError(
            f"matrix-X degree {D} exceeds max_matrix_degree={limits.max_matrix_degree}"
        )


def lg_matrix_solve(G: SeriesSystem, D: int, limits: Optional[LimitsConfig] = None) -> SeriesSystem:
    """
    The constant-free solution of F_i = sum_j X_ij G_j(F) over n^2 variables.

    Raises:
        ResourceLimitError: If n or D exceed the configured matrix-X guards.
    """
    _check_degree(D)
    n = _check_square(G)
    _check_matrix_limits(n, D, limits)
    low = truncate_system(G, D - 1, "G")
    width = n * n
    F = SeriesSystem(Series.zero(width, D) for _ in range(n))
    for _ in range(D):
        inner = truncate_system(F, D - 1)
        cache: dict = {}
        images = [substitute(low[j], inner, cache) for j in range(n)]
        F = SeriesSystem(
            sum(
                (times_variable(images[j], matrix_variable(i, j, n)) for j in range(n)),
                Series.zero(width, D),
            )
            for i in range(n)
        )
    return F


def lg_matrix_jacobian(G: SeriesSystem, D: int, F: SeriesSystem) -> SeriesMatrix:
    """K_ij = sum_l X_il d_j G_l(F) over the n^2 matrix variables."""
    n = _check_square(G)
    G = truncate_system(G, D, "G")
    inner = truncate_system(F, D - 1, "F")
    cache: dict = {}
    partials = [[substitute(derivative(G[l], j), inner, cache) for j in range(n)] for l in range(n)]
    zero = Series.zero(n * n, D)
    return SeriesMatrix(
        [
            sum((times_variable(partials[l][j], matrix_variable(i, l, n)) for l in range(n)), zero)
            for j in range(n)
        ]
        for i in range(n)
    )


def lg_matrix_identity_check(
    G: SeriesSystem,
    omega_alpha: Sequence[int],
    max_degree: int,
    limits: Optional[LimitsConfig] = None,
) -> CheckReport:
    """
    Check the matrix-X identity for every X monomial N with |N| <= max_degree.

    The coefficient of X^N in Omega(F) / det(I - K) must equal
    d_u^row(N) [Omega(u) prod_j G_j(u)^col_j(N)] at 0 divided by N!, where
    row(N)_i = sum_j N_ij and col(N)_j = sum_i N_ij.
    """
    n = _check_square(G)
    _check_lengths(n, omega_alpha=omega_alpha)
    _check_matrix_limits(n, max_degree, limits)
    if G.trunc_degree < max_degree:
        raise TruncationError(f"G is known to degree {G.trunc_degree}, {max_degree} is needed")
    width = n * n
    if max_degree == 0:
        left = Series.monomial([0] * width, evaluate_at_zero(Series.monomial(omega_alpha, 1, 0)), 0)
    else:
        F = lg_matrix_solve(G, max_degree, limits)
        K = lg_matrix_jacobian(G, max_degree, F)
        Z = reciprocal(det_series(SeriesMatrix.identity(n, width, max_degree) - K))
        left = _omega_of(F, omega_alpha) * Z
    failures = []
    checked = 0
    for N in monomials_up_to(width, max_degree):
        row = [sum(N[matrix_variable(i, j, n)] for j in range(n)) for i in range(n)]
        col = [sum(N[matrix_variable(i, j, n)] for i in range(n)) for j in range(n)]
        expected = _identity_rhs(G, omega_alpha, row, col) / multiindex_factorial(N)
        checked += 1
        if left.coefficient(N) != expected:
            failures.append(list(N))
    passed = not failures
    if not passed:
        logger.warning("matrix-X identity fails at %d of %d monomials", len(failures), checked)
    logger.debug("lg_matrix_identity_check: %d monomials in %d variables", checked, width)
    return CheckReport(
        name="lagrange-good-matrix-identity",
        passed=passed,
        lhs=repr(left),
        rhs=f"{checked - len(failures)} of {checked} coefficients match",
        detail=f"omega={list(omega_alpha)} degree<={max_degree} failures={failures}",
    )

