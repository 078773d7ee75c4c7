"""Composition, compositional reversion, vacuum sums and correlations.

Every quantity here has a fast primary route and at least one independent
route used for cross-checks:

* composition: diagram-class sum against direct substitution;
* reversion: fixed point Phi = A^{-1}(Y + H(Phi)) against the explicit tree
  sum and against undetermined coefficients;
* Z and W: vacuum circuit sums against the trace/determinant formulas and the
  termwise formal Gaussian integral;
* correlations: the cluster expansion over connected pieces against the
  direct formula d_Y^J [Phi^I / det(A^{-1} J_F(Phi))].

F = A X - H throughout: A is the linear part, H the (sign-flipped) nonlinear
part, and Y the source variables of the inverse.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from fractions import Fraction
from typing import Optional, Sequence

import sympy as sp
from sympy.utilities.iterables import multiset_partitions

from .diagrams import (
    FeynmanRules,
    amplitude_composition,
    aut_order_circuit,
    aut_order_composition,
    aut_order_tree,
    enumerate_composition_classes,
    enumerate_reversion_trees,
    enumerate_vacuum_circuits,
)
from .exceptions import (
    ConstantTermError,
    DimensionMismatchError,
    IndexRangeError,
    TruncationError,
)
from .models import CheckReport, CorrelationSpec, DegreeDiagnostics, InversionResult, RouteComparison
from .series import (
    MultiIndex,
    Series,
    SeriesMatrix,
    SeriesSystem,
    derivative,
    det_series,
    exp_series,
    homogeneous_part,
    monomials_up_to,
    multiplicity_index,
    reciprocal,
    substitute,
    trace,
    truncate_system,
)
from .wick import CovarianceSpec, FieldExpansion, Grading, gaussian_integral_series

logger = logging.getLogger(__name__)


def _check_square(F: SeriesSystem) -> None:
    if len(F) != F.n_vars:
        raise DimensionMismatchError(
            f"system has {len(F)} components in {F.n_vars} variables; reversion needs a square system"
        )
    if not F.is_constant_free:
        raise ConstantTermError("reversion needs a constant-free system")


def covariance_of(F: SeriesSystem) -> CovarianceSpec:
    """
    Covariance data of the linear part A of a square constant-free system.

    Raises:
        SingularLinearPartError: If A is singular, i.e. F has no inverse.
    """
    _check_square(F)
    return CovarianceSpec.from_matrix(F.linear_part())


def nonlinear_part(F: SeriesSystem) -> SeriesSystem:
    """H = A X - F, the negated part of F of degree >= 2."""
    return F.map(lambda comp: -(comp - homogeneous_part(comp, 1)))


def _source_vector(n: int, trunc_degree: int) -> list[Series]:
    return [Series.variable(a, n, trunc_degree) for a in range(n)]


def _apply_matrix(matrix: Sequence[Sequence[Fraction]], vector: Sequence[Series]) -> list[Series]:
    out = []
    for row in matrix:
        acc = Series.zero(vector[0].n_vars, vector[0].trunc_degree)
        for weight, entry in zip(row, vector):
            if weight:
                acc = acc + entry * weight
        out.append(acc)
    return out


# --- composition -----------------------------------------------------------


def compose_diagrammatic(F: SeriesSystem, G: SeriesSystem) -> SeriesSystem:
    """
    F o G as a sum over composition classes of amplitude / automorphism order.

    Raises:
        DimensionMismatchError: If F's variable count differs from len(G) or
            the truncation degrees differ.
        ConstantTermError: If G has a constant term.
    """
    if F.n_vars != len(G):
        raise DimensionMismatchError(
            f"outer system has {F.n_vars} variables, inner system {len(G)} components"
        )
    if F.trunc_degree != G.trunc_degree:
        raise DimensionMismatchError(
            f"truncation degrees differ: {F.trunc_degree} vs {G.trunc_degree}"
        )
    if not G.is_constant_free:
        raise ConstantTermError("the substituted system must be constant-free")
    n_out, limit = G.n_vars, G.trunc_degree
    classes = [c for d in range(1, limit + 1) for c in enumerate_composition_classes(d)]
    components = []
    for i in range(len(F)):
        total = Series.constant(F[i].constant_term, n_out, limit)
        for c in classes:
            total = total + amplitude_composition(c, F, G, i) / aut_order_composition(c)
        components.append(total)
    logger.debug("compose_diagrammatic: %d classes through degree %d", len(classes), limit)
    return SeriesSystem(components)


# --- reversion -------------------------------------------------------------


def tree_census(max_leaves: int) -> list[DegreeDiagnostics]:
    """Number of reversion tree classes and sum of 1/aut for every leaf count."""
    classes: Counter = Counter()
    weights: dict[int, Fraction] = defaultdict(Fraction)
    for tree in enumerate_reversion_trees(max_leaves):
        classes[tree.leaves] += 1
        weights[tree.leaves] += Fraction(1, aut_order_tree(tree))
    return [
        DegreeDiagnostics(degree=d, classes=classes[d], inverse_aut_sum=weights[d])
        for d in range(1, max_leaves + 1)
    ]


def _resolve_degree(F: SeriesSystem, D: Optional[int]) -> int:
    degree_ = F.trunc_degree if D is None else D
    if degree_ < 1:
        raise TruncationError(f"reversion degree must be >= 1, got {degree_}")
    return degree_


def revert(F: SeriesSystem, D: Optional[int] = None) -> InversionResult:
    """
    Compositional inverse by the fixed point Phi = A^{-1}(Y + H(Phi)).

    H starts at degree 2, so pass k fixes the degree-k part of Phi; D passes
    give the inverse mod degree D+1.

    Args:
        F: Square constant-free system with invertible linear part.
        D: Output truncation degree (defaults to F's).

    Returns:
        The inverse in the Y variables and the tree census per degree.

    Raises:
        SingularLinearPartError: If the linear part is singular.
        ConstantTermError: If F has a constant term.
    """
    D = _resolve_degree(F, D)
    cov = covariance_of(F)
    H = nonlinear_part(truncate_system(F, D, "F"))
    n = len(F)
    sources = _source_vector(n, D)
    phi = SeriesSystem(Series.zero(n, D) for _ in range(n))
    for step in range(1, D + 1):
        cache: dict = {}
        shifted = [sources[a] + substitute(H[a], phi, cache) for a in range(n)]
        phi = SeriesSystem(_apply_matrix(cov.A_inv, shifted))
        logger.debug("revert: pass %d of %d", step, D)
    return InversionResult(series=phi, diagnostics=tree_census(D))


def revert_by_trees(F: SeriesSystem, D: Optional[int] = None) -> SeriesSystem:
    """Compositional inverse as the sum over reversion trees of amplitude / aut."""
    D = _resolve_degree(F, D)
    cov = covariance_of(F)
    rules = FeynmanRules.for_reversion(truncate_system(F, D, "F"), cov, D)
    n = len(F)
    totals = [Series.zero(n, D) for _ in range(n)]
    for tree in enumerate_reversion_trees(D):
        weight = Fraction(1, aut_order_tree(tree))
        amplitude = rules.tree(tree)
        totals = [total + value * weight for total, value in zip(totals, amplitude)]
    return SeriesSystem(totals)


def revert_oracle(F: SeriesSystem, D: Optional[int] = None) -> SeriesSystem:
    """
    Compositional inverse by undetermined coefficients.

    For each degree d the unknown part Phi_d solves A Phi_d = [Y - F(Phi_{<d})]_d,
    one rational linear system per monomial of degree d.
    """
    D = _resolve_degree(F, D)
    covariance_of(F)
    F = truncate_system(F, D, "F")
    n = len(F)
    A = sp.Matrix([[sp.Rational(v.numerator, v.denominator) for v in row] for row in F.linear_part()])
    coefficients: list[dict[MultiIndex, Fraction]] = [dict() for _ in range(n)]
    for d in range(1, D + 1):
        phi = SeriesSystem(Series(n, D, coefficients[c]) for c in range(n))
        image = [substitute(F[a], phi) for a in range(n)]
        for beta in monomials_up_to(n, d):
            if sum(beta) != d:
                continue
            target = [Fraction(int(d == 1 and beta[a] == 1)) for a in range(n)]
            rhs = [target[a] - image[a].coefficient(beta) for a in range(n)]
            if not any(rhs):
                continue
            solution = A.LUsolve(sp.Matrix([sp.Rational(v.numerator, v.denominator) for v in rhs]))
            for c in range(n):
                value = sp.Rational(solution[c])
                if value:
                    coefficients[c][beta] = Fraction(int(value.p), int(value.q))
    return SeriesSystem(Series(n, D, coefficients[c]) for c in range(n))


# --- vacuum sums -----------------------------------------------------------


def free_energy_W(F: SeriesSystem, D: int) -> Series:
    """
    W as the sum over connected vacuum circuits of amplitude / aut.

    Vertices on a circuit of Y-degree D can have arity D+1, so F must be known
    to degree D+1.
    """
    cov = covariance_of(F)
    n = len(F)
    if D < 1:
        return Series.zero(n, max(D, 0))
    rules = FeynmanRules.for_reversion(truncate_system(F, D + 1, "F"), cov, D)
    total = Series.zero(n, D)
    for circuit in enumerate_vacuum_circuits(D):
        total = total + rules.circuit(circuit) / aut_order_circuit(circuit)
    return total


def partition_function_Z(F: SeriesSystem, D: int) -> Series:
    """Z = exp(W) from the vacuum circuit sum; constant term 1."""
    return exp_series(free_energy_W(F, D))


def _propagated_hessian(F: SeriesSystem, D: int) -> SeriesMatrix:
    """K = A^{-1} dH(Phi) at degree D, with Phi the inverse of F."""
    cov = covariance_of(F)
    n = len(F)
    phi = revert(F, D).series
    H = nonlinear_part(truncate_system(F, D + 1, "F"))
    cache: dict = {}
    dH = [[substitute(derivative(H[a], b), phi, cache) for b in range(n)] for a in range(n)]
    columns = [_apply_matrix(cov.A_inv, [dH[a][b] for a in range(n)]) for b in range(n)]
    return SeriesMatrix([columns[b][x] for b in range(n)] for x in range(n))


def free_energy_W_trace(F: SeriesSystem, D: int) -> Series:
    """W = -log det(I - K) = sum_p tr(K^p) / p with K = A^{-1} dH(Phi)."""
    K = _propagated_hessian(F, D)
    total = Series.zero(K.n_vars, D)
    power_ = K
    for p in range(1, D + 1):
        total = total + trace(power_) / p
        power_ = power_ @ K
    return total


def partition_function_Z_det(F: SeriesSystem, D: int) -> Series:
    """Z = 1 / det(I - A^{-1} dH(Phi)) = 1 / det(A^{-1} J_F(Phi))."""
    K = _propagated_hessian(F, D)
    identity = SeriesMatrix.identity(K.size, K.n_vars, K.trunc_degree)
    return reciprocal(det_series(identity - K))


def reversion_z_routes(F: SeriesSystem, D: int, gaussian: bool = False) -> RouteComparison:
    """Z along the diagram, determinant and trace routes, plus the Gaussian integral on request."""
    routes = {
        "diagrams": partition_function_Z(F, D),
        "determinant": partition_function_Z_det(F, D),
        "trace": exp_series(free_energy_W_trace(F, D)),
    }
    if gaussian:
        routes["gaussian"] = unnormalized_correlation_gaussian(F, (), (), D)
    comparison = RouteComparison(name="reversion-Z", routes=routes)
    if not comparison.agree:
        logger.warning("reversion Z routes disagree at degree %d", D)
    return comparison


def exponential_integrand(
    H: SeriesSystem,
    D: int,
    I: Sequence[int] = (),
    J: Sequence[int] = (),
) -> tuple[FieldExpansion, Grading]:
    """
    Slice of u^I ubar^J exp(ubar.(Y + H(u))) needed for Y-degree <= D.

    The exponential is expanded as sum_beta ubar^beta prod_i S_i^beta_i / beta_i!
    with S_i = Y_i + H_i(u). A balanced term with k pairs has Y-degree at
    least ceil((k - 2|J| + |I|)/2), so pair counts up to 2D + 2|J| - |I|
    suffice and that is the returned ``complete_through``.

    Raises:
        TruncationError: If H is not known far enough for the requested degree.
    """
    n = len(H)
    if H.n_vars != n:
        raise DimensionMismatchError("the nonlinear part must be a square system")
    for index in (*I, *J):
        if not 0 <= index < n:
            raise IndexRangeError(f"insertion index {index} outside [0, {n})")
    n_i, n_j = len(I), len(J)

    def grading(k: int) -> int:
        return max(0, -(-(k - 2 * n_j + n_i) // 2))

    limit = 2 * D + 2 * n_j - n_i
    if limit < 0:
        return FieldExpansion(n_fields=n, n_out=n, terms={}, complete_through=None), grading
    needed = D + 1 + n_j - n_i
    if H.trunc_degree < needed:
        raise TruncationError(
            f"H is known to degree {H.trunc_degree}, degree {needed} is needed"
        )
    width = limit + D
    zero_tail = (0,) * n
    S = []
    for i in range(n):
        coeffs = {alpha + zero_tail: c for alpha, c in H[i].coeffs.items() if sum(alpha) <= width}
        coeffs[zero_tail + tuple(int(a == i) for a in range(n))] = Fraction(1)
        S.append(Series(2 * n, width, coeffs))
    powers = [[Series.constant(1, 2 * n, width)] for _ in range(n)]
    for i in range(n):
        for e in range(1, limit - n_j + 1):
            powers[i].append(powers[i][-1] * S[i] / e)
    prefactor = Series.monomial(multiplicity_index(I, n) + zero_tail, 1, width)
    mu_j = multiplicity_index(J, n)
    terms: dict[tuple[MultiIndex, MultiIndex], dict[MultiIndex, Fraction]] = defaultdict(dict)
    for beta in monomials_up_to(n, max(limit - n_j, 0)):
        term = prefactor
        for i, b in enumerate(beta):
            if b:
                term = term * powers[i][b]
        alpha1 = tuple(b + m for b, m in zip(beta, mu_j))
        pairs = sum(alpha1)
        for exponent, c in term.coeffs.items():
            alpha2, y = exponent[:n], exponent[n:]
            if sum(alpha2) != pairs or sum(y) > D:
                continue
            bucket = terms[(alpha1, alpha2)]
            bucket[y] = bucket.get(y, Fraction(0)) + c
    expansion = FieldExpansion(
        n_fields=n,
        n_out=n,
        terms={key: Series(n, D, coeffs) for key, coeffs in terms.items()},
        complete_through=limit,
    )
    logger.debug("exponential_integrand: %d balanced field monomials", len(expansion.terms))
    return expansion, grading


def unnormalized_correlation_gaussian(
    F: SeriesSystem, I: Sequence[int], J: Sequence[int], D: int
) -> Series:
    """<u^I ubar^J>_U = det A * formal Gaussian integral of the exponential integrand."""
    cov = covariance_of(F)
    expansion, grading = exponential_integrand(nonlinear_part(F), D, I, J)
    return gaussian_integral_series(cov, expansion, D, grading) * cov.det_A


def partition_function_Z_gaussian(F: SeriesSystem, D: int) -> Series:
    return unnormalized_correlation_gaussian(F, (), (), D)


# --- correlations ----------------------------------------------------------


def _differentiate(series: Series, js: Sequence[int]) -> Series:
    for j in js:
        series = derivative(series, j)
    return series


def _check_insertions(F: SeriesSystem, spec: CorrelationSpec) -> None:
    n = len(F)
    for index in (*spec.I, *spec.J):
        if index >= n:
            raise IndexRangeError(f"insertion index {index} outside [0, {n})")


def connected_correlation(
    F: SeriesSystem, I: Sequence[int], J: Sequence[int], D: int
) -> Series:
    """
    <u^I ubar^J>_C mod degree D+1.

    A connected diagram holds at most one u source: |I| = 1 gives
    d_Y^J of the tree sum, |I| = 0 gives d_Y^J W, and |I| >= 2 vanishes.
    """
    n = len(F)
    if len(I) >= 2:
        return Series.zero(n, D)
    work = D + len(J)
    if len(I) == 1:
        base = revert_by_trees(F, work)[I[0]]
    else:
        base = free_energy_W(F, work)
    return _differentiate(base, J)


def _cluster_sum(F: SeriesSystem, I: Sequence[int], J: Sequence[int], D: int) -> Series:
    """sum over set partitions pi of I + J of prod over blocks of connected correlations."""
    n = len(F)
    items = [("u", i) for i in I] + [("ubar", j) for j in J]
    if not items:
        return Series.constant(1, n, D)
    memo: dict[tuple, Series] = {}

    def connected(block: Sequence[tuple[str, int]]) -> Series:
        us = tuple(sorted(i for kind, i in block if kind == "u"))
        bars = tuple(sorted(j for kind, j in block if kind == "ubar"))
        key = (us, bars)
        if key not in memo:
            memo[key] = connected_correlation(F, us, bars, D)
        return memo[key]

    total = Series.zero(n, D)
    for parts in multiset_partitions(len(items)):
        term = Series.constant(1, n, D)
        for part in parts:
            term = term * connected([items[x] for x in part])
            if term.is_zero():
                break
        total = total + term
    return total


def correlation(F: SeriesSystem, spec: CorrelationSpec, D: int) -> Series:
    """
    Correlation of the requested kind mod degree D+1.

    Unnormalized correlations are Z times the cluster sum over connected
    pieces; normalized ones are the cluster sum itself. F must be known to
    degree D + |J| + 1.
    """
    _check_insertions(F, spec)
    if spec.kind == "connected":
        return connected_correlation(F, spec.I, spec.J, D)
    clusters = _cluster_sum(F, spec.I, spec.J, D)
    if spec.kind == "normalized":
        return clusters
    return partition_function_Z(F, D) * clusters


def unnormalized_correlation_direct(
    F: SeriesSystem, I: Sequence[int], J: Sequence[int], D: int
) -> Series:
    """<u^I ubar^J>_U = d_Y^J [Phi^I * Z_det] with Phi from undetermined coefficients."""
    _check_insertions(F, CorrelationSpec(I=list(I), J=list(J)))
    work = D + len(J)
    phi = revert_oracle(F, work)
    product_ = partition_function_Z_det(F, work)
    for i in I:
        product_ = product_ * phi[i]
    return _differentiate(product_, J)


def moment_cumulant_check(
    F: SeriesSystem, I: Sequence[int], J: Sequence[int], D: int
) -> CheckReport:
    """Compare the direct unnormalized correlation with Z times the cluster sum."""
    lhs = unnormalized_correlation_direct(F, I, J, D)
    rhs = correlation(F, CorrelationSpec(I=list(I), J=list(J), kind="unnormalized"), D)
    passed = lhs == rhs
    if not passed:
        logger.warning("cluster identity fails for I=%s J=%s at degree %d", list(I), list(J), D)
    return CheckReport(
        name="moment-cumulant",
        passed=passed,
        lhs=repr(lhs),
        rhs=repr(rhs),
        detail=f"I={list(I)} J={list(J)} D={D}",
    )
