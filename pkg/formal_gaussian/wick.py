"""Formal Gaussian integration of monomials and truncated series.

The formal Gaussian integral with covariance A^{-1} is the linear functional

    int dubar du e^{-ubar A u} ubar^alpha1 u^alpha2 = (det A)^{-1} I_A(tau1, tau2)

where I_A sums, over all bijections between the ubar legs and the u legs, the
product of covariance entries A^{-1}[u index, ubar index]. That sum is the
permanent of a k x k matrix, evaluated here either naively or with Ryser's
inclusion-exclusion formula over a Gray-code walk of column subsets.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Literal, Mapping, Optional, Sequence

import sympy as sp

from .exceptions import (
    DimensionMismatchError,
    IndexRangeError,
    ResourceLimitError,
    SingularLinearPartError,
    SummabilityError,
    TruncationError,
)
from .series import MultiIndex, Scalar, Series, degree, index_list, truncate

logger = logging.getLogger(__name__)

RationalMatrix = tuple[tuple[Fraction, ...], ...]

# Below this size the naive permutation sum is cheaper than Ryser's formula.
RYSER_THRESHOLD = 5


def _to_fraction(value: sp.Rational) -> Fraction:
    value = sp.Rational(value)
    return Fraction(int(value.p), int(value.q))


def _to_sympy(matrix: Sequence[Sequence[Scalar]]) -> sp.Matrix:
    return sp.Matrix(
        [[sp.Rational(Fraction(v).numerator, Fraction(v).denominator) for v in row] for row in matrix]
    )


@dataclass(frozen=True)
class CovarianceSpec:
    """Invertible rational matrix A with its exact inverse and determinant."""

    n: int
    A: RationalMatrix
    A_inv: RationalMatrix
    det_A: Fraction

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[Scalar]]) -> "CovarianceSpec":
        """
        Build the covariance data of a square rational matrix.

        Raises:
            DimensionMismatchError: If the matrix is not square.
            SingularLinearPartError: If the matrix is singular.
        """
        n = len(matrix)
        if n == 0 or any(len(row) != n for row in matrix):
            raise DimensionMismatchError("covariance matrix must be square and nonempty")
        exact = _to_sympy(matrix)
        det = exact.det()
        if det == 0:
            raise SingularLinearPartError(
                f"matrix {[[str(Fraction(v)) for v in row] for row in matrix]} is singular"
            )
        inverse = exact.inv()
        return cls(
            n=n,
            A=tuple(tuple(Fraction(v) for v in row) for row in matrix),
            A_inv=tuple(
                tuple(_to_fraction(inverse[i, j]) for j in range(n)) for i in range(n)
            ),
            det_A=_to_fraction(det),
        )

    @classmethod
    def identity(cls, n: int) -> "CovarianceSpec":
        eye = tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))
        return cls(n=n, A=eye, A_inv=eye, det_A=Fraction(1))


def permanent_naive(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """Permanent as the sum over all k! permutations."""
    k = len(matrix)
    total = Fraction(0)
    for sigma in itertools.permutations(range(k)):
        product = Fraction(1)
        for row, col in enumerate(sigma):
            entry = matrix[row][col]
            if not entry:
                product = Fraction(0)
                break
            product *= entry
        total += product
    return total


def permanent_ryser(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """
    Permanent by Ryser's formula, per(M) = sum_S (-1)^(k-|S|) prod_i sum_{j in S} M_ij.

    Column subsets are visited in Gray-code order so each step updates the row
    sums by adding or removing a single column.
    """
    k = len(matrix)
    if k == 0:
        return Fraction(1)
    row_sums = [Fraction(0)] * k
    chosen = [False] * k
    size = 0
    total = Fraction(0)
    for step in range(1, 1 << k):
        col = (step & -step).bit_length() - 1
        if chosen[col]:
            for row in range(k):
                row_sums[row] -= matrix[row][col]
            size -= 1
        else:
            for row in range(k):
                row_sums[row] += matrix[row][col]
            size += 1
        chosen[col] = not chosen[col]
        product = math.prod(row_sums, start=Fraction(1))
        total += product if (k - size) % 2 == 0 else -product
    return total


def permanent(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    if len(matrix) < RYSER_THRESHOLD:
        return permanent_naive(matrix)
    return permanent_ryser(matrix)


def _check_size(k: int, max_size: Optional[int]) -> None:
    if max_size is not None and k > max_size:
        raise ResourceLimitError(f"permanent of size {k} exceeds max_permanent_size={max_size}")


def _check_indices(tau: Sequence[int], n: int) -> None:
    for value in tau:
        if not 0 <= value < n:
            raise IndexRangeError(f"index {value} outside [0, {n})")


def pairing_sum(
    A_inv: Sequence[Sequence[Fraction]],
    tau1: Sequence[int],
    tau2: Sequence[int],
    method: Literal["auto", "naive", "ryser"] = "auto",
    max_size: Optional[int] = None,
) -> Fraction:
    """
    I_A(tau1, tau2) = sum over bijections sigma of prod_k A^{-1}[tau2(sigma(k)), tau1(k)].

    tau1 indexes the ubar legs, tau2 the u legs. Lists of different lengths
    admit no bijection and give 0.

    Raises:
        ResourceLimitError: If the lists are longer than ``max_size``.
    """
    if len(tau1) != len(tau2):
        return Fraction(0)
    _check_size(len(tau1), max_size)
    n = len(A_inv)
    _check_indices(tau1, n)
    _check_indices(tau2, n)
    k = len(tau1)
    matrix = [[Fraction(A_inv[tau2[b]][tau1[a]]) for b in range(k)] for a in range(k)]
    if method == "naive":
        return permanent_naive(matrix)
    if method == "ryser":
        return permanent_ryser(matrix)
    return permanent(matrix)


def wick_moment(cov: CovarianceSpec, is_: Sequence[int], js: Sequence[int]) -> Fraction:
    """
    Normalized moment <u_{i_1}..u_{i_p} ubar_{j_1}..ubar_{j_q}> = per(A^{-1}[i_a, j_b]).

    Zero when p != q.
    """
    if len(is_) != len(js):
        return Fraction(0)
    _check_indices(is_, cov.n)
    _check_indices(js, cov.n)
    return permanent([[cov.A_inv[i][j] for j in js] for i in is_])


def gaussian_integral_monomial(
    cov: CovarianceSpec,
    alpha1: Sequence[int],
    alpha2: Sequence[int],
    max_size: Optional[int] = None,
) -> Fraction:
    """
    Formal integral of ubar^alpha1 u^alpha2, (det A)^{-1} I_A(tau1, tau2).

    Raises:
        ResourceLimitError: If |alpha1| exceeds ``max_size``.
    """
    if len(alpha1) != cov.n or len(alpha2) != cov.n:
        raise DimensionMismatchError(f"multiindices must have length {cov.n}")
    if degree(alpha1) != degree(alpha2):
        return Fraction(0)
    _check_size(degree(alpha1), max_size)
    return pairing_sum(cov.A_inv, index_list(alpha1), index_list(alpha2)) / cov.det_A


def gaussian_integral_triple(
    A: CovarianceSpec,
    B: CovarianceSpec,
    C: CovarianceSpec,
    alphas: Sequence[Sequence[int]],
) -> Fraction:
    """
    Integral of sbar^a1 s^a2 tbar^a3 t^a4 ubar^a5 u^a6 against the three-block Gaussian.

    The blocks are independent, so the value factorizes into three monomial
    integrals with covariances A^{-1}, B^{-1}, C^{-1}.
    """
    if len(alphas) != 6:
        raise DimensionMismatchError(f"expected six multiindices, got {len(alphas)}")
    value = Fraction(1)
    for cov, (bar, plain) in zip((A, B, C), zip(alphas[0::2], alphas[1::2])):
        value *= gaussian_integral_monomial(cov, bar, plain)
        if not value:
            break
    return value


@dataclass(frozen=True)
class FieldExpansion:
    """
    Finite slice of an integrand in (ubar, u) with series coefficients.

    ``terms`` maps (alpha1, alpha2), the ubar and u exponents, to a series in
    the output variables. ``complete_through`` is the largest pair count
    k = |alpha1| = |alpha2| for which every balanced term of the full
    integrand is present; None means the integrand is this polynomial exactly.
    """

    n_fields: int
    n_out: int
    terms: Mapping[tuple[MultiIndex, MultiIndex], Series] = field(default_factory=dict)
    complete_through: Optional[int] = None


Grading = Callable[[int], int]


def gaussian_integral_series(
    cov: CovarianceSpec,
    integrand: FieldExpansion,
    trunc_degree: int,
    grading: Optional[Grading] = None,
) -> Series:
    """
    Integrate an expansion termwise into a series truncated at ``trunc_degree``.

    Args:
        cov: Covariance data of the Gaussian weight.
        integrand: The (ubar, u) expansion with output-series coefficients.
        trunc_degree: Output truncation degree D.
        grading: Lower bound on the output degree of any balanced term with
            k pairs; must be nondecreasing in k. Required when the
            integrand is a truncated expansion.

    Returns:
        The summed integral mod degree D+1.

    Raises:
        SummabilityError: If terms beyond the expansion could still reach
            output degree <= D.
        TruncationError: If a coefficient is known to a lower degree than D.
    """
    if integrand.n_fields != cov.n:
        raise DimensionMismatchError(
            f"integrand has {integrand.n_fields} fields, covariance is {cov.n}x{cov.n}"
        )
    limit = integrand.complete_through
    if limit is not None:
        if grading is None:
            raise SummabilityError("a truncated integrand needs a grading bound")
        if grading(limit + 1) <= trunc_degree:
            raise SummabilityError(
                f"terms with {limit + 1} pairs may reach output degree "
                f"{grading(limit + 1)} <= {trunc_degree}; expansion is not summable here"
            )
    result = Series.zero(integrand.n_out, trunc_degree)
    contributing = 0
    for (alpha1, alpha2), coefficient in integrand.terms.items():
        pairs = degree(alpha1)
        if pairs != degree(alpha2):
            continue
        if limit is not None and pairs > limit:
            continue
        if coefficient.trunc_degree < trunc_degree:
            raise TruncationError(
                f"coefficient of {alpha1},{alpha2} known only to degree {coefficient.trunc_degree}"
            )
        value = gaussian_integral_monomial(cov, alpha1, alpha2)
        if value:
            contributing += 1
            result = result + truncate(coefficient, trunc_degree) * value
    logger.debug("gaussian_integral_series: %d contributing monomials", contributing)
    return result
