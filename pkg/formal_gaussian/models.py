"""Pydantic data models for configuration, job specifications and results."""

from fractions import Fraction
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .series import Series, SeriesSystem

Command = Literal[
    "compose",
    "revert",
    "lg-solve",
    "lg-check",
    "zw-check",
    "diagrams",
    "wick",
    "lg-matrix-check",
]


class LimitsConfig(BaseModel):
    """Resource guards for the exponential parts of the engine."""

    max_labeled_size: int = Field(default=10, ge=0, le=12)
    max_degree: int = Field(default=12, ge=1)
    max_matrix_vars: int = Field(default=2, ge=1, le=4)
    max_matrix_degree: int = Field(default=3, ge=1, le=6)
    max_permanent_size: int = Field(default=12, ge=1, le=20)


class OutputConfig(BaseModel):
    """Result document configuration."""

    format: Literal["json", "table"] = Field(default="json")
    indent: int = Field(default=2, ge=0, le=8)


class LoggingConfig(BaseModel):
    """Logging configuration."""

    level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(default="WARNING")
    file: Optional[str] = Field(default=None)
    rotation: bool = Field(default=True)


class Config(BaseModel):
    """Main configuration model."""

    limits: LimitsConfig = Field(default_factory=LimitsConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)


class JobSpec(BaseModel):
    """One CLI job: a command, its parsed JSON payload and options."""

    command: Command
    inputs: dict[str, Any] = Field(default_factory=dict)
    degree: Optional[int] = Field(default=None, ge=1)
    flavor: Literal["composition", "reversion", "lagrange-good"] = Field(default="reversion")
    out_format: Literal["json", "table"] = Field(default="json")

    @model_validator(mode="after")
    def validate_required_inputs(self) -> "JobSpec":
        """Check that the payload carries the fields the command reads."""
        required = {
            "compose": ("F", "G"),
            "revert": ("F",),
            "lg-solve": ("G",),
            "lg-check": ("G",),
            "zw-check": (),
            "diagrams": (),
            "wick": ("A", "alpha1", "alpha2"),
            "lg-matrix-check": ("G",),
        }[self.command]
        missing = [name for name in required if name not in self.inputs]
        if missing:
            raise ValueError(f"command '{self.command}' needs input field(s) {missing}")
        if self.command == "zw-check":
            key = "G" if self.flavor == "lagrange-good" else "F"
            if key not in self.inputs:
                raise ValueError(f"zw-check with flavor '{self.flavor}' needs input field ['{key}']")
        if self.command == "diagrams" and self.degree is None:
            raise ValueError("command 'diagrams' needs a degree bound")
        return self


class CorrelationSpec(BaseModel):
    """Which correlation to compute: u insertions I, ubar insertions J and the kind."""

    I: list[int] = Field(default_factory=list)
    J: list[int] = Field(default_factory=list)
    kind: Literal["unnormalized", "normalized", "connected"] = Field(default="unnormalized")

    @field_validator("I", "J")
    @classmethod
    def validate_indices(cls, v: list[int]) -> list[int]:
        """Indices are 0-based and nonnegative; the upper bound depends on the system."""
        if any(index < 0 for index in v):
            raise ValueError("insertion indices must be nonnegative")
        return v


class DegreeDiagnostics(BaseModel):
    """Diagram census of one Y-degree."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    degree: int
    classes: int
    inverse_aut_sum: Fraction


class InversionResult(BaseModel):
    """Compositional inverse with the tree census that backs it."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    series: SeriesSystem
    diagnostics: list[DegreeDiagnostics] = Field(default_factory=list)

    @field_validator("series")
    @classmethod
    def validate_constant_free(cls, v: SeriesSystem) -> SeriesSystem:
        """An inverse of a constant-free system is constant-free."""
        if not v.is_constant_free:
            raise ValueError("inverse series must be constant-free")
        return v


class CheckReport(BaseModel):
    """Outcome of an identity check with both sides rendered exactly."""

    name: str
    passed: bool
    lhs: str = ""
    rhs: str = ""
    detail: str = ""


class RouteComparison(BaseModel):
    """The same quantity computed along independent routes."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    routes: dict[str, Series]

    @property
    def agree(self) -> bool:
        values = list(self.routes.values())
        return all(value == values[0] for value in values[1:])

    def value(self) -> Series:
        """The common value (the first route)."""
        return next(iter(self.routes.values()))
