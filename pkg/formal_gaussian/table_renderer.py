"""Markdown coefficient tables for the CLI table output mode."""

from typing import Any, Mapping, Sequence

from .codec import format_rational
from .series import Series


class TableRenderer:
    """Renders series and check results as markdown tables."""

    def __init__(self, variable: str = "X"):
        """
        Initialize table renderer.

        Args:
            variable: Name printed for the series variables.
        """
        self.variable = variable

    def generate_table_header(self, columns: Sequence[str]) -> str:
        """
        Generate markdown table header with column names.

        Returns:
            Markdown table header string (header + separator lines).
        """
        header_row = "| " + " | ".join(columns) + " |"
        separator_row = "|" + "|".join("-" * (len(name) + 2) for name in columns) + "|"
        return f"{header_row}\n{separator_row}\n"

    def format_monomial(self, alpha: Sequence[int]) -> str:
        """X0^2*X1 style monomial, "1" for the constant."""
        factors = [
            f"{self.variable}{i}" if a == 1 else f"{self.variable}{i}^{a}"
            for i, a in enumerate(alpha)
            if a
        ]
        return "*".join(factors) or "1"

    def render_system(self, system: Sequence[Series]) -> str:
        """Rows sorted by component, then (total degree, lexicographic exponent)."""
        lines = [self.generate_table_header(["component", "degree", "monomial", "coefficient"])]
        for component, series in enumerate(system):
            for alpha, c in series.terms():
                lines.append(
                    f"| {component} | {sum(alpha)} | {self.format_monomial(alpha)} | {format_rational(c)} |\n"
                )
        return "".join(lines)

    def render_records(self, records: Sequence[Mapping[str, Any]], columns: Sequence[str]) -> str:
        """One row per record; missing cells stay empty."""
        lines = [self.generate_table_header(columns)]
        for record in records:
            cells = [str(record.get(name, "")) for name in columns]
            lines.append("| " + " | ".join(cells) + " |\n")
        return "".join(lines)
