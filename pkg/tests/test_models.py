"""Tests for Pydantic models."""

from fractions import Fraction

import pytest
from pydantic import ValidationError

from formal_gaussian.models import (
    CheckReport,
    Config,
    CorrelationSpec,
    DegreeDiagnostics,
    InversionResult,
    JobSpec,
    LimitsConfig,
    OutputConfig,
    RouteComparison,
)
from formal_gaussian.series import Series, SeriesSystem


class TestLimitsConfig:
    """Tests for LimitsConfig model."""

    def test_defaults(self):
        limits = LimitsConfig()
        assert limits.max_labeled_size == 10
        assert limits.max_degree == 12
        assert limits.max_matrix_vars == 2
        assert limits.max_matrix_degree == 3
        assert limits.max_permanent_size == 12

    def test_labeled_size_cap(self):
        """Test that the labeled enumeration cap cannot be raised past 12."""
        with pytest.raises(ValidationError):
            LimitsConfig(max_labeled_size=13)

    def test_matrix_vars_cap(self):
        with pytest.raises(ValidationError):
            LimitsConfig(max_matrix_vars=5)

    def test_permanent_size_cap(self):
        with pytest.raises(ValidationError):
            LimitsConfig(max_permanent_size=21)


class TestOutputConfig:
    """Tests for OutputConfig model."""

    def test_invalid_format_raises_error(self):
        with pytest.raises(ValidationError):
            OutputConfig(format="xml")

    def test_default_config(self):
        config = Config()
        assert config.output.format == "json"
        assert config.logging.file is None


class TestJobSpec:
    """Tests for JobSpec model."""

    def test_valid_revert_job(self):
        spec = JobSpec(command="revert", inputs={"F": {}}, degree=3)
        assert spec.flavor == "reversion"
        assert spec.out_format == "json"

    def test_missing_input_raises_error(self):
        """Test that each command checks the fields it reads."""
        with pytest.raises(ValidationError, match="needs input field"):
            JobSpec(command="compose", inputs={"F": {}})

    def test_zw_check_flavor_decides_input(self):
        JobSpec(command="zw-check", inputs={"G": {}}, flavor="lagrange-good")
        with pytest.raises(ValidationError, match=r"\['F'\]"):
            JobSpec(command="zw-check", inputs={"G": {}})

    def test_diagrams_needs_bound(self):
        with pytest.raises(ValidationError, match="degree bound"):
            JobSpec(command="diagrams")
        assert JobSpec(command="diagrams", degree=2).inputs == {}

    def test_degree_must_be_positive(self):
        with pytest.raises(ValidationError):
            JobSpec(command="revert", inputs={"F": {}}, degree=0)

    def test_unknown_command(self):
        with pytest.raises(ValidationError):
            JobSpec(command="integrate")


class TestCorrelationSpec:
    """Tests for CorrelationSpec model."""

    def test_defaults(self):
        spec = CorrelationSpec(I=[0])
        assert spec.J == []
        assert spec.kind == "unnormalized"

    def test_negative_index_raises_error(self):
        with pytest.raises(ValidationError, match="nonnegative"):
            CorrelationSpec(I=[-1])

    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            CorrelationSpec(kind="partial")


class TestResults:
    """Tests for result models."""

    def test_inversion_result_must_be_constant_free(self):
        with pytest.raises(ValidationError, match="constant-free"):
            InversionResult(series=SeriesSystem([Series.constant(1, 1, 2)]))

    def test_inversion_result(self):
        diagnostics = [DegreeDiagnostics(degree=1, classes=1, inverse_aut_sum=Fraction(1))]
        result = InversionResult(series=SeriesSystem([Series.variable(0, 1, 2)]), diagnostics=diagnostics)
        assert result.diagnostics[0].inverse_aut_sum == 1

    def test_route_comparison(self):
        one = Series.constant(1, 1, 2)
        agreeing = RouteComparison(name="z", routes={"a": one, "b": one})
        assert agreeing.agree
        assert agreeing.value() == one
        differing = RouteComparison(name="z", routes={"a": one, "b": one * 2})
        assert not differing.agree

    def test_check_report_dump(self):
        report = CheckReport(name="identity", passed=True, lhs="1", rhs="1")
        assert report.model_dump() == {
            "name": "identity",
            "passed": True,
            "lhs": "1",
            "rhs": "1",
            "detail": "",
        }
