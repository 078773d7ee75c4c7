"""JSON literals for series, systems, rational matrices and result documents.

Series: {"n": int, "degree": int, "terms": [{"exp": [int, ...], "coeff": "p/q"}]}
System: {"components": [series, ...]}

Rationals are exact strings "p/q" (or "p" for integers); floats are rejected.
"""

import json
import re
from fractions import Fraction
from typing import Any, Optional, Sequence

from .exceptions import FormalGaussianError, SpecParseError
from .series import MultiIndex, Series, SeriesSystem

_RATIONAL = re.compile(r"[+-]?\d+(/\d+)?")


def format_rational(value: Fraction) -> str:
    """Reduced "p/q" with q > 0, or "p" when q = 1."""
    return str(Fraction(value))


def parse_rational(value: Any, field: str) -> Fraction:
    """
    Parse an exact rational.

    Args:
        value: A JSON integer or a string "p", "p/q".
        field: Field path used in the error message.

    Raises:
        SpecParseError: On floats, booleans, malformed strings or a zero denominator.
    """
    if isinstance(value, bool):
        raise SpecParseError(f"expected a rational, got {value!r}", field)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str) and _RATIONAL.fullmatch(value.strip()):
        try:
            return Fraction(value.strip())
        except ZeroDivisionError:
            raise SpecParseError(f"zero denominator in {value!r}", field)
    raise SpecParseError(f"expected an exact rational 'p/q', got {value!r}", field)


def _require(obj: Any, key: str, field: str) -> Any:
    if not isinstance(obj, dict):
        raise SpecParseError(f"expected an object, got {type(obj).__name__}", field)
    if key not in obj:
        raise SpecParseError(f"missing key '{key}'", field)
    return obj[key]


def _parse_int(value: Any, field: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecParseError(f"expected an integer, got {value!r}", field)
    if value < minimum:
        raise SpecParseError(f"expected an integer >= {minimum}, got {value}", field)
    return value


def parse_multiindex(value: Any, field: str, n: Optional[int] = None) -> MultiIndex:
    """A list of nonnegative integers, optionally of fixed length n."""
    if not isinstance(value, list):
        raise SpecParseError(f"expected a list of integers, got {value!r}", field)
    alpha = tuple(_parse_int(v, f"{field}[{k}]") for k, v in enumerate(value))
    if n is not None and len(alpha) != n:
        raise SpecParseError(f"expected {n} entries, got {len(alpha)}", field)
    return alpha


def parse_series(obj: Any, field: str = "series") -> Series:
    """
    Parse a series literal.

    Raises:
        SpecParseError: If the literal is malformed; the message names the field.
    """
    n = _parse_int(_require(obj, "n", field), f"{field}.n", minimum=1)
    trunc_degree = _parse_int(_require(obj, "degree", field), f"{field}.degree")
    terms = _require(obj, "terms", field)
    if not isinstance(terms, list):
        raise SpecParseError("expected a list of terms", f"{field}.terms")
    coeffs: dict[MultiIndex, Fraction] = {}
    for k, term in enumerate(terms):
        where = f"{field}.terms[{k}]"
        alpha = parse_multiindex(_require(term, "exp", where), f"{where}.exp", n)
        if sum(alpha) > trunc_degree:
            raise SpecParseError(f"exponent {list(alpha)} above degree {trunc_degree}", f"{where}.exp")
        if alpha in coeffs:
            raise SpecParseError(f"duplicate exponent {list(alpha)}", f"{where}.exp")
        coeffs[alpha] = parse_rational(_require(term, "coeff", where), f"{where}.coeff")
    return Series(n, trunc_degree, coeffs)


def parse_system(obj: Any, field: str = "system") -> SeriesSystem:
    """Parse a system literal; a bare series literal is read as a one-component system."""
    if isinstance(obj, dict) and "components" in obj:
        components = obj["components"]
        if not isinstance(components, list) or not components:
            raise SpecParseError("expected a nonempty list of series", f"{field}.components")
        parsed = [parse_series(c, f"{field}.components[{k}]") for k, c in enumerate(components)]
    else:
        parsed = [parse_series(obj, field)]
    try:
        return SeriesSystem(parsed)
    except FormalGaussianError as e:
        raise SpecParseError(str(e), field)


def parse_matrix(value: Any, field: str) -> list[list[Fraction]]:
    """A square matrix of exact rationals."""
    if not isinstance(value, list) or not value:
        raise SpecParseError("expected a nonempty list of rows", field)
    rows = []
    for r, row in enumerate(value):
        if not isinstance(row, list) or len(row) != len(value):
            raise SpecParseError(f"row {r} must have {len(value)} entries", field)
        rows.append([parse_rational(v, f"{field}[{r}][{c}]") for c, v in enumerate(row)])
    return rows


def series_to_json(series: Series) -> dict[str, Any]:
    """Stable JSON form: terms sorted by total degree, then lexicographic exponent."""
    return {
        "n": series.n_vars,
        "degree": series.trunc_degree,
        "terms": [
            {"exp": list(alpha), "coeff": format_rational(c)} for alpha, c in series.terms()
        ],
    }


def system_to_json(system: Sequence[Series]) -> dict[str, Any]:
    return {"components": [series_to_json(s) for s in system]}


def _default(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, Series):
        return series_to_json(value)
    if isinstance(value, SeriesSystem):
        return system_to_json(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(document: Any, indent: int = 2) -> str:
    """Deterministic JSON text with sorted keys and exact rationals."""
    return json.dumps(document, indent=indent or None, sort_keys=True, default=_default)


def loads(text: str, field: str = "input") -> Any:
    """
    Parse JSON text.

    Raises:
        SpecParseError: If the text is not valid JSON.
    """
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecParseError(f"invalid JSON: {e.msg} at line {e.lineno} column {e.colno}", field)
