"""Exact truncated multivariate formal power series.

A ``Series`` stores plain monomial coefficients c_alpha (F = sum c_alpha X^alpha)
over ``Fraction`` for every exponent vector alpha of total degree at most the
truncation degree D. Every identity computed with these objects holds
"mod degree D+1". Indices of variables and components are 0-based.

The tensor view used by the diagrammatic code, F^{[d]}_{i,j_1...j_d}, is the
divided coefficient u_alpha = alpha! * c_alpha with alpha the multiplicity
index of (j_1, ..., j_d); ``tensor_element`` is the only place where the
alpha! normalization appears.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import defaultdict
from fractions import Fraction
from types import MappingProxyType
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence, Union

from .exceptions import (
    ConstantTermError,
    DimensionMismatchError,
    DomainError,
    IndexRangeError,
    TruncationError,
)

logger = logging.getLogger(__name__)

MultiIndex = tuple[int, ...]
Scalar = Union[int, Fraction]


def exact_rational(value: Scalar) -> Fraction:
    """
    Convert an int, Fraction or "p/q" string to Fraction.

    Raises:
        DomainError: If the value is a float.
    """
    if isinstance(value, float):
        raise DomainError(f"coefficient {value!r} is a float, use an int, Fraction or \"p/q\" string")
    return Fraction(value)


def degree(alpha: Sequence[int]) -> int:
    """Total degree |alpha|."""
    return sum(alpha)


def multiindex_factorial(alpha: Sequence[int]) -> int:
    """alpha! = alpha_1! ... alpha_n!."""
    return math.prod(math.factorial(a) for a in alpha)


def multiplicity_index(js: Sequence[int], n: int) -> MultiIndex:
    """
    Count how often each variable index occurs in ``js``.

    Args:
        js: List of variable indices in [0, n).
        n: Number of variables.

    Returns:
        The multiindex mu with mu_i = #{r : js[r] = i}.

    Raises:
        IndexRangeError: If an index is outside [0, n).
    """
    counts = [0] * n
    for j in js:
        if not 0 <= j < n:
            raise IndexRangeError(f"index {j} outside [0, {n})")
        counts[j] += 1
    return tuple(counts)


def index_list(alpha: Sequence[int]) -> list[int]:
    """The weakly increasing index list whose multiplicity index is ``alpha``."""
    return [i for i, a in enumerate(alpha) for _ in range(a)]


def unit_index(j: int, n: int) -> MultiIndex:
    if not 0 <= j < n:
        raise IndexRangeError(f"index {j} outside [0, {n})")
    return tuple(1 if i == j else 0 for i in range(n))


def monomials_up_to(n: int, max_degree: int) -> Iterator[MultiIndex]:
    """All exponent vectors in n variables of total degree <= max_degree, by degree."""
    for d in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), d):
            yield multiplicity_index(combo, n)


class Series:
    """Immutable truncated power series in ``n_vars`` variables."""

    __slots__ = ("_n_vars", "_trunc_degree", "_coeffs")

    def __init__(
        self,
        n_vars: int,
        trunc_degree: int,
        coeffs: Optional[Mapping[Sequence[int], Scalar]] = None,
    ):
        """
        Build a series, discarding zero coefficients and terms above the truncation.

        Args:
            n_vars: Number of variables (positive).
            trunc_degree: Truncation degree D (nonnegative).
            coeffs: Map from exponent vectors to rational coefficients.

        Raises:
            DimensionMismatchError: If an exponent vector has the wrong length.
            DomainError: If an exponent is negative.
        """
        if n_vars < 1:
            raise DimensionMismatchError(f"n_vars must be positive, got {n_vars}")
        if trunc_degree < 0:
            raise TruncationError(f"truncation degree must be >= 0, got {trunc_degree}")
        clean: dict[MultiIndex, Fraction] = {}
        for exponent, value in (coeffs or {}).items():
            alpha = tuple(int(e) for e in exponent)
            if len(alpha) != n_vars:
                raise DimensionMismatchError(
                    f"exponent {alpha} has length {len(alpha)}, expected {n_vars}"
                )
            if any(a < 0 for a in alpha):
                raise DomainError(f"negative exponent in {alpha}")
            if sum(alpha) > trunc_degree:
                continue
            coefficient = exact_rational(value)
            if coefficient:
                clean[alpha] = coefficient
        self._n_vars = n_vars
        self._trunc_degree = trunc_degree
        self._coeffs = clean

    @classmethod
    def _trusted(
        cls, n_vars: int, trunc_degree: int, coeffs: dict[MultiIndex, Fraction]
    ) -> "Series":
        obj = cls.__new__(cls)
        obj._n_vars = n_vars
        obj._trunc_degree = trunc_degree
        obj._coeffs = coeffs
        return obj

    @classmethod
    def zero(cls, n_vars: int, trunc_degree: int) -> "Series":
        return cls(n_vars, trunc_degree)

    @classmethod
    def constant(cls, value: Scalar, n_vars: int, trunc_degree: int) -> "Series":
        return cls(n_vars, trunc_degree, {(0,) * n_vars: value})

    @classmethod
    def variable(cls, j: int, n_vars: int, trunc_degree: int) -> "Series":
        return cls(n_vars, trunc_degree, {unit_index(j, n_vars): 1})

    @classmethod
    def monomial(
        cls, alpha: Sequence[int], coefficient: Scalar, trunc_degree: int
    ) -> "Series":
        return cls(len(alpha), trunc_degree, {tuple(alpha): coefficient})

    @property
    def n_vars(self) -> int:
        return self._n_vars

    @property
    def trunc_degree(self) -> int:
        return self._trunc_degree

    @property
    def coeffs(self) -> Mapping[MultiIndex, Fraction]:
        return MappingProxyType(self._coeffs)

    def coefficient(self, alpha: Sequence[int]) -> Fraction:
        return self._coeffs.get(tuple(alpha), Fraction(0))

    @property
    def constant_term(self) -> Fraction:
        return self._coeffs.get((0,) * self._n_vars, Fraction(0))

    def is_zero(self) -> bool:
        return not self._coeffs

    def terms(self) -> list[tuple[MultiIndex, Fraction]]:
        """Terms sorted by (total degree, lexicographic exponent)."""
        return sorted(self._coeffs.items(), key=lambda kv: (sum(kv[0]), kv[0]))

    def _check_compatible(self, other: "Series") -> None:
        if other._n_vars != self._n_vars or other._trunc_degree != self._trunc_degree:
            raise DimensionMismatchError(
                f"series over ({self._n_vars} vars, degree {self._trunc_degree}) "
                f"combined with ({other._n_vars} vars, degree {other._trunc_degree})"
            )

    def _coerce(self, other: Union["Series", Scalar]) -> "Series":
        if isinstance(other, Series):
            self._check_compatible(other)
            return other
        if isinstance(other, (int, Fraction)):
            return Series.constant(other, self._n_vars, self._trunc_degree)
        return NotImplemented

    def __add__(self, other: Union["Series", Scalar]) -> "Series":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        out = dict(self._coeffs)
        for alpha, c in rhs._coeffs.items():
            value = out.get(alpha, 0) + c
            if value:
                out[alpha] = value
            else:
                out.pop(alpha, None)
        return Series._trusted(self._n_vars, self._trunc_degree, out)

    __radd__ = __add__

    def __neg__(self) -> "Series":
        return Series._trusted(
            self._n_vars, self._trunc_degree, {a: -c for a, c in self._coeffs.items()}
        )

    def __sub__(self, other: Union["Series", Scalar]) -> "Series":
        rhs = self._coerce(other)
        if rhs is NotImplemented:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other: Scalar) -> "Series":
        return (-self) + other

    def __mul__(self, other: Union["Series", Scalar]) -> "Series":
        if isinstance(other, (int, Fraction)):
            return scale(self, other)
        if not isinstance(other, Series):
            return NotImplemented
        self._check_compatible(other)
        return _multiply(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> "Series":
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        if other == 0:
            raise DomainError("division of a series by zero")
        return scale(self, Fraction(1) / Fraction(other))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Series):
            return NotImplemented
        return (
            self._n_vars == other._n_vars
            and self._trunc_degree == other._trunc_degree
            and self._coeffs == other._coeffs
        )

    def __hash__(self) -> int:
        return hash((self._n_vars, self._trunc_degree, frozenset(self._coeffs.items())))

    def __repr__(self) -> str:
        body = " + ".join(f"{c}*X^{list(a)}" for a, c in self.terms()) or "0"
        return f"Series({body}; n={self._n_vars}, D={self._trunc_degree})"


def _multiply(lhs: Series, rhs: Series) -> Series:
    limit = lhs.trunc_degree
    right = sorted(((sum(b), b, cb) for b, cb in rhs._coeffs.items()), key=lambda t: t[0])
    out: dict[MultiIndex, Fraction] = defaultdict(Fraction)
    for a, ca in lhs._coeffs.items():
        room = limit - sum(a)
        for db, b, cb in right:
            if db > room:
                break
            out[tuple(x + y for x, y in zip(a, b))] += ca * cb
    return Series._trusted(
        lhs.n_vars, limit, {alpha: c for alpha, c in out.items() if c}
    )


def add(lhs: Series, rhs: Union[Series, Scalar]) -> Series:
    """Exact sum; a rational right operand is added to the constant term."""
    return lhs + rhs


def scale(series: Series, factor: Scalar) -> Series:
    """Multiply every coefficient by a rational factor."""
    factor = exact_rational(factor)
    if not factor:
        return Series.zero(series.n_vars, series.trunc_degree)
    return Series._trusted(
        series.n_vars,
        series.trunc_degree,
        {a: c * factor for a, c in series._coeffs.items()},
    )


def multiply(lhs: Series, rhs: Union[Series, Scalar]) -> Series:
    """Exact product truncated to the common degree."""
    return lhs * rhs


def power(series: Series, k: int) -> Series:
    """series**k by repeated squaring, truncated at every step."""
    if k < 0:
        raise DomainError("negative powers need reciprocal()")
    result = Series.constant(1, series.n_vars, series.trunc_degree)
    base = series
    while k:
        if k & 1:
            result = result * base
        k >>= 1
        if k:
            base = base * base
    return result


def truncate(series: Series, trunc_degree: int) -> Series:
    """
    Lower the truncation degree.

    Raises:
        TruncationError: If asked to raise the truncation degree.
    """
    if trunc_degree > series.trunc_degree:
        raise TruncationError(
            f"cannot raise truncation from {series.trunc_degree} to {trunc_degree}"
        )
    return Series._trusted(
        series.n_vars,
        trunc_degree,
        {a: c for a, c in series._coeffs.items() if sum(a) <= trunc_degree},
    )


def homogeneous_part(series: Series, d: int) -> Series:
    """The degree-d homogeneous part, keeping the truncation degree."""
    return Series._trusted(
        series.n_vars,
        series.trunc_degree,
        {a: c for a, c in series._coeffs.items() if sum(a) == d},
    )


def evaluate_at_zero(series: Series) -> Fraction:
    """F(0), the constant term."""
    return series.constant_term


def times_variable(series: Series, j: int) -> Series:
    """X_j * series; known mod degree D+2, so the truncation degree rises by one."""
    shift = unit_index(j, series.n_vars)
    return Series._trusted(
        series.n_vars,
        series.trunc_degree + 1,
        {tuple(x + y for x, y in zip(a, shift)): c for a, c in series._coeffs.items()},
    )


def derivative(series: Series, j: int) -> Series:
    """
    Formal partial derivative with respect to X_j.

    The coefficients of degree D of the input produce terms of degree D-1, so
    the result carries truncation degree D-1.

    Raises:
        IndexRangeError: If j is out of range.
        TruncationError: If the input is truncated at degree 0.
    """
    if not 0 <= j < series.n_vars:
        raise IndexRangeError(f"variable {j} outside [0, {series.n_vars})")
    if series.trunc_degree == 0:
        raise TruncationError("derivative of a series known only mod degree 1")
    out: dict[MultiIndex, Fraction] = {}
    for alpha, c in series._coeffs.items():
        if alpha[j]:
            lowered = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1 :]
            out[lowered] = c * alpha[j]
    return Series._trusted(series.n_vars, series.trunc_degree - 1, out)


def reciprocal(series: Series) -> Series:
    """
    Multiplicative inverse computed degree by degree.

    Raises:
        ConstantTermError: If the constant term vanishes.
    """
    c0 = series.constant_term
    if not c0:
        raise ConstantTermError("reciprocal of a series without constant term")
    n, limit = series.n_vars, series.trunc_degree
    parts = _split_by_degree(series)
    inverse_parts: list[dict[MultiIndex, Fraction]] = [{(0,) * n: 1 / c0}]
    for d in range(1, limit + 1):
        acc: dict[MultiIndex, Fraction] = defaultdict(Fraction)
        for k in range(1, d + 1):
            for a, ca in parts[k].items():
                for b, cb in inverse_parts[d - k].items():
                    acc[tuple(x + y for x, y in zip(a, b))] += ca * cb
        inverse_parts.append({a: -c / c0 for a, c in acc.items() if c})
    merged = {a: c for part in inverse_parts for a, c in part.items()}
    return Series._trusted(n, limit, merged)


def _split_by_degree(series: Series) -> list[dict[MultiIndex, Fraction]]:
    parts: list[dict[MultiIndex, Fraction]] = [{} for _ in range(series.trunc_degree + 1)]
    for alpha, c in series._coeffs.items():
        parts[sum(alpha)][alpha] = c
    return parts


def exp_series(series: Series) -> Series:
    """
    exp of a constant-free series, sum_k series^k / k!.

    Raises:
        ConstantTermError: If the argument has a constant term.
    """
    if series.constant_term:
        raise ConstantTermError("exp needs a constant-free argument")
    result = Series.constant(1, series.n_vars, series.trunc_degree)
    term = result
    for k in range(1, series.trunc_degree + 1):
        term = (term * series) / k
        if term.is_zero():
            break
        result = result + term
    return result


def log_series(series: Series) -> Series:
    """
    log of a series with constant term 1, sum_k (-1)^(k+1) g^k / k with g = series - 1.

    Raises:
        ConstantTermError: If the constant term is not 1.
    """
    if series.constant_term != 1:
        raise ConstantTermError("log needs constant term 1")
    g = series - 1
    result = Series.zero(series.n_vars, series.trunc_degree)
    term = Series.constant(1, series.n_vars, series.trunc_degree)
    for k in range(1, series.trunc_degree + 1):
        term = term * g
        if term.is_zero():
            break
        result = result + (term / k if k % 2 else -term / k)
    return result


class SeriesSystem:
    """A tuple of series sharing variable count and truncation degree."""

    __slots__ = ("_components",)

    def __init__(self, components: Iterable[Series]):
        comps = tuple(components)
        if not comps:
            raise DimensionMismatchError("a system needs at least one component")
        first = comps[0]
        for comp in comps[1:]:
            first._check_compatible(comp)
        self._components = comps

    @property
    def components(self) -> tuple[Series, ...]:
        return self._components

    @property
    def n_vars(self) -> int:
        return self._components[0].n_vars

    @property
    def trunc_degree(self) -> int:
        return self._components[0].trunc_degree

    @property
    def is_constant_free(self) -> bool:
        return all(not comp.constant_term for comp in self._components)

    def __len__(self) -> int:
        return len(self._components)

    def __getitem__(self, i: int) -> Series:
        return self._components[i]

    def __iter__(self) -> Iterator[Series]:
        return iter(self._components)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SeriesSystem):
            return NotImplemented
        return self._components == other._components

    def __hash__(self) -> int:
        return hash(self._components)

    def __repr__(self) -> str:
        return f"SeriesSystem({list(self._components)!r})"

    def map(self, fn: Callable[[Series], Series]) -> "SeriesSystem":
        return SeriesSystem(fn(comp) for comp in self._components)

    def linear_part(self) -> list[list[Fraction]]:
        """Matrix A with A[i][j] the coefficient of X_j in component i."""
        n = self.n_vars
        return [
            [comp.coefficient(unit_index(j, n)) for j in range(n)]
            for comp in self._components
        ]


def identity_system(n: int, trunc_degree: int) -> SeriesSystem:
    """The system F_i = X_i."""
    return SeriesSystem(Series.variable(i, n, trunc_degree) for i in range(n))


def truncate_system(system: SeriesSystem, trunc_degree: int, what: str = "system") -> SeriesSystem:
    """
    Lower a system to ``trunc_degree``.

    Raises:
        TruncationError: If the system is known to a lower degree than requested.
    """
    if system.trunc_degree < trunc_degree:
        raise TruncationError(
            f"{what} is known to degree {system.trunc_degree}, degree {trunc_degree} is needed"
        )
    if system.trunc_degree == trunc_degree:
        return system
    return system.map(lambda comp: truncate(comp, trunc_degree))


def tensor_element(system: SeriesSystem, i: int, js: Sequence[int]) -> Fraction:
    """
    Tensor element F^{[d]}_{i,j_1...j_d} = mu! * c_mu of component i, mu = mu(js).

    Raises:
        IndexRangeError: If i or an entry of js is out of range.
        TruncationError: If len(js) exceeds the truncation degree.
    """
    if not 0 <= i < len(system):
        raise IndexRangeError(f"component {i} outside [0, {len(system)})")
    mu = multiplicity_index(js, system.n_vars)
    if len(js) > system.trunc_degree:
        raise TruncationError(
            f"tensor of order {len(js)} above truncation degree {system.trunc_degree}"
        )
    c = system[i].coefficient(mu)
    return c * multiindex_factorial(mu) if c else Fraction(0)


def tensor_to_series(
    n_vars: int, trunc_degree: int, tensors: Mapping[Sequence[int], Scalar]
) -> Series:
    """Rebuild a series from divided coefficients u_alpha via c_alpha = u_alpha / alpha!."""
    return Series(
        n_vars,
        trunc_degree,
        {
            tuple(alpha): Fraction(u) / multiindex_factorial(alpha)
            for alpha, u in tensors.items()
        },
    )


def substitute(series: Series, inner: SeriesSystem, _cache: Optional[dict] = None) -> Series:
    """
    series(inner_1, ..., inner_m) for a constant-free inner system.

    Raises:
        DimensionMismatchError: If the variable counts or degrees disagree.
        ConstantTermError: If the inner system has a constant term.
    """
    if series.n_vars != len(inner):
        raise DimensionMismatchError(
            f"outer series has {series.n_vars} variables, inner system {len(inner)} components"
        )
    if series.trunc_degree != inner.trunc_degree:
        raise DimensionMismatchError(
            f"truncation degrees differ: {series.trunc_degree} vs {inner.trunc_degree}"
        )
    if not inner.is_constant_free:
        raise ConstantTermError("the substituted system must be constant-free")
    cache = _cache if _cache is not None else {}
    n_inner, limit = inner.n_vars, inner.trunc_degree

    def monomial_value(alpha: MultiIndex) -> Series:
        value = cache.get(alpha)
        if value is None:
            if not any(alpha):
                value = Series.constant(1, n_inner, limit)
            else:
                j = max(k for k, a in enumerate(alpha) if a)
                lower = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1 :]
                value = monomial_value(lower) * inner[j]
            cache[alpha] = value
        return value

    acc: dict[MultiIndex, Fraction] = defaultdict(Fraction)
    for alpha, c in series._coeffs.items():
        for key, v in monomial_value(alpha)._coeffs.items():
            acc[key] += c * v
    return Series._trusted(n_inner, limit, {a: c for a, c in acc.items() if c})


def compose_direct(outer: SeriesSystem, inner: SeriesSystem) -> SeriesSystem:
    """(outer o inner)_i = outer_i(inner_1, ..., inner_m), truncated to degree D."""
    cache: dict = {}
    return SeriesSystem(substitute(comp, inner, cache) for comp in outer)


def compose_chain(systems: Sequence[SeriesSystem]) -> SeriesSystem:
    """F1 o F2 o ... o Fp as a left-to-right fold of compose_direct."""
    if not systems:
        raise DimensionMismatchError("compose_chain needs at least one system")
    result = systems[0]
    for system in systems[1:]:
        result = compose_direct(result, system)
    return result


class SeriesMatrix:
    """Square matrix of series sharing variable count and truncation degree."""

    __slots__ = ("_rows",)

    def __init__(self, rows: Iterable[Iterable[Series]]):
        grid = tuple(tuple(row) for row in rows)
        size = len(grid)
        if size == 0 or any(len(row) != size for row in grid):
            raise DimensionMismatchError("a series matrix must be square and nonempty")
        first = grid[0][0]
        for row in grid:
            for entry in row:
                first._check_compatible(entry)
        self._rows = grid

    @classmethod
    def identity(cls, size: int, n_vars: int, trunc_degree: int) -> "SeriesMatrix":
        return cls(
            [
                Series.constant(1 if i == j else 0, n_vars, trunc_degree)
                for j in range(size)
            ]
            for i in range(size)
        )

    @classmethod
    def from_rationals(
        cls, matrix: Sequence[Sequence[Scalar]], n_vars: int, trunc_degree: int
    ) -> "SeriesMatrix":
        return cls(
            [Series.constant(value, n_vars, trunc_degree) for value in row]
            for row in matrix
        )

    @property
    def size(self) -> int:
        return len(self._rows)

    @property
    def rows(self) -> tuple[tuple[Series, ...], ...]:
        return self._rows

    @property
    def n_vars(self) -> int:
        return self._rows[0][0].n_vars

    @property
    def trunc_degree(self) -> int:
        return self._rows[0][0].trunc_degree

    def __getitem__(self, index: tuple[int, int]) -> Series:
        i, j = index
        return self._rows[i][j]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SeriesMatrix):
            return NotImplemented
        return self._rows == other._rows

    def __hash__(self) -> int:
        return hash(self._rows)

    def __add__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        return SeriesMatrix(
            [a + b for a, b in zip(ra, rb)] for ra, rb in zip(self._rows, other._rows)
        )

    def __sub__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        return SeriesMatrix(
            [a - b for a, b in zip(ra, rb)] for ra, rb in zip(self._rows, other._rows)
        )

    def __matmul__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        return matmul(self, other)

    def map(self, fn: Callable[[Series], Series]) -> "SeriesMatrix":
        return SeriesMatrix([fn(entry) for entry in row] for row in self._rows)


def matmul(lhs: SeriesMatrix, rhs: SeriesMatrix) -> SeriesMatrix:
    if lhs.size != rhs.size:
        raise DimensionMismatchError(f"matrix sizes {lhs.size} and {rhs.size} differ")
    size = lhs.size
    zero = Series.zero(lhs.n_vars, lhs.trunc_degree)
    rows = []
    for i in range(size):
        row = []
        for j in range(size):
            entry = zero
            for k in range(size):
                entry = entry + lhs[i, k] * rhs[k, j]
            row.append(entry)
        rows.append(row)
    return SeriesMatrix(rows)


def trace(matrix: SeriesMatrix) -> Series:
    result = Series.zero(matrix.n_vars, matrix.trunc_degree)
    for i in range(matrix.size):
        result = result + matrix[i, i]
    return result


def jacobian(system: SeriesSystem) -> SeriesMatrix:
    """Entry (i, j) is the derivative of component i with respect to X_j."""
    if len(system) != system.n_vars:
        raise DimensionMismatchError("the jacobian needs as many components as variables")
    return SeriesMatrix(
        [derivative(comp, j) for j in range(system.n_vars)] for comp in system
    )


def _permutation_sign(perm: Sequence[int]) -> int:
    inversions = sum(
        1 for a in range(len(perm)) for b in range(a + 1, len(perm)) if perm[a] > perm[b]
    )
    return -1 if inversions % 2 else 1


def det_series(matrix: SeriesMatrix) -> Series:
    """Truncated determinant by Leibniz expansion."""
    size = matrix.size
    result = Series.zero(matrix.n_vars, matrix.trunc_degree)
    for perm in itertools.permutations(range(size)):
        term = matrix[0, perm[0]]
        for i in range(1, size):
            if term.is_zero():
                break
            term = term * matrix[i, perm[i]]
        if not term.is_zero():
            result = result + term if _permutation_sign(perm) > 0 else result - term
    return result


def matrix_inverse(matrix: SeriesMatrix) -> SeriesMatrix:
    """
    Inverse by Gauss-Jordan elimination over the series ring.

    Pivots are entries with a nonzero constant term, which are units.

    Raises:
        ConstantTermError: If the constant part of the matrix is singular.
    """
    size = matrix.size
    n, limit = matrix.n_vars, matrix.trunc_degree
    left = [list(row) for row in matrix.rows]
    right = [list(row) for row in SeriesMatrix.identity(size, n, limit).rows]
    for col in range(size):
        pivot = next((r for r in range(col, size) if left[r][col].constant_term), None)
        if pivot is None:
            raise ConstantTermError("matrix is not invertible: singular constant part")
        left[col], left[pivot] = left[pivot], left[col]
        right[col], right[pivot] = right[pivot], right[col]
        unit = reciprocal(left[col][col])
        left[col] = [entry * unit for entry in left[col]]
        right[col] = [entry * unit for entry in right[col]]
        for r in range(size):
            factor = left[r][col]
            if r == col or factor.is_zero():
                continue
            left[r] = [a - factor * b for a, b in zip(left[r], left[col])]
            right[r] = [a - factor * b for a, b in zip(right[r], right[col])]
    return SeriesMatrix(right)
