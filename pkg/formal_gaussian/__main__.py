"""Command-line entry point for the formal Gaussian integration engine."""

import argparse
import logging
import sys
from dataclasses import dataclass, field
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from pydantic import ValidationError

from .codec import (
    dumps,
    format_rational,
    loads,
    parse_matrix,
    parse_multiindex,
    parse_system,
    system_to_json,
)
from .config import load_config
from .diagrams import (
    aut_order,
    class_degree,
    enumerate_composition_classes,
    enumerate_lg_trees,
    enumerate_reversion_trees,
)
from .exceptions import (
    ConfigValidationError,
    DomainError,
    FormalGaussianError,
    ResourceLimitError,
    ResultWriteError,
    SpecParseError,
)
from .inversion import (
    compose_diagrammatic,
    free_energy_W,
    revert,
    revert_by_trees,
    revert_oracle,
    reversion_z_routes,
)
from .lagrange import (
    lg_free_energy,
    lg_identity_sweep,
    lg_matrix_identity_check,
    lg_partition_Z,
    lg_solve,
    lg_solve_by_trees,
    lg_solve_oracle,
)
from .models import Config, JobSpec
from .result_writer import ResultWriter
from .series import SeriesSystem, compose_direct, truncate_system
from .table_renderer import TableRenderer
from .wick import CovarianceSpec, gaussian_integral_monomial

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_RESOURCE = 4

COMMANDS = ("compose", "revert", "lg-solve", "lg-check", "zw-check", "diagrams", "wick", "lg-matrix-check")


def setup_logging(config: Config) -> None:
    """
    Set up logging configuration.

    Records go to stderr; stdout carries only result documents.

    Args:
        config: Application configuration object.
    """
    log_config = config.logging

    root_logger = logging.getLogger()
    root_logger.setLevel(log_config.level)

    formatter = logging.Formatter(
        "%(asctime)s [%(levelname)s] %(name)s:%(lineno)d - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_config.level)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if log_config.file:
        log_file = Path(log_config.file)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        if log_config.rotation:
            file_handler = RotatingFileHandler(
                log_file,
                maxBytes=10 * 1024 * 1024,  # 10MB
                backupCount=5,
                encoding="utf-8",
            )
        else:
            file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setLevel(log_config.level)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)


@dataclass
class Outcome:
    """Result of one command before rendering."""

    result: Any
    diagnostics: dict[str, Any] = field(default_factory=dict)
    table: Callable[[TableRenderer], str] = lambda renderer: ""
    # Printed without the result/diagnostics envelope; diagnostics go to the log.
    bare: bool = False


def _system(spec: JobSpec, key: str) -> SeriesSystem:
    return parse_system(spec.inputs[key], key)


def _degree(spec: JobSpec, default: int, config: Config) -> int:
    D = spec.degree if spec.degree is not None else default
    if D > config.limits.max_degree:
        raise ResourceLimitError(f"degree {D} exceeds limits.max_degree={config.limits.max_degree}")
    return D


def _system_outcome(system: SeriesSystem, diagnostics: dict[str, Any]) -> Outcome:
    return Outcome(
        result=system_to_json(system),
        diagnostics=diagnostics,
        table=lambda renderer: renderer.render_system(system),
    )


def _run_compose(spec: JobSpec, config: Config) -> Outcome:
    F, G = _system(spec, "F"), _system(spec, "G")
    D = _degree(spec, min(F.trunc_degree, G.trunc_degree), config)
    F, G = truncate_system(F, D, "F"), truncate_system(G, D, "G")
    composed = compose_diagrammatic(F, G)
    return _system_outcome(composed, {"degree": D, "direct_agrees": composed == compose_direct(F, G)})


def _run_revert(spec: JobSpec, config: Config) -> Outcome:
    F = _system(spec, "F")
    D = _degree(spec, F.trunc_degree, config)
    inverse = revert(F, D)
    diagnostics = {
        "degree": D,
        "trees_agree": inverse.series == revert_by_trees(F, D),
        "oracle_agrees": inverse.series == revert_oracle(F, D),
        "tree_classes": [
            {"degree": d.degree, "classes": d.classes, "inverse_aut_sum": d.inverse_aut_sum}
            for d in inverse.diagnostics
        ],
    }
    return _system_outcome(inverse.series, diagnostics)


def _run_lg_solve(spec: JobSpec, config: Config) -> Outcome:
    G = _system(spec, "G")
    D = _degree(spec, G.trunc_degree + 1, config)
    F = lg_solve(G, D)
    diagnostics = {
        "degree": D,
        "oracle_agrees": F == lg_solve_oracle(G, D),
        "trees_agree": F == lg_solve_by_trees(G, D),
    }
    return _system_outcome(F, diagnostics)


def _report_outcome(reports: Sequence[Any]) -> Outcome:
    records = [report.model_dump() for report in reports]
    return Outcome(
        result=records,
        diagnostics={"checked": len(records), "passed": sum(r["passed"] for r in records)},
        table=lambda renderer: renderer.render_records(records, ["name", "passed", "lhs", "rhs", "detail"]),
    )


def _run_lg_check(spec: JobSpec, config: Config) -> Outcome:
    G = _system(spec, "G")
    n = len(G)
    D = _degree(spec, G.trunc_degree, config)
    omegas = spec.inputs.get("omegas", [[0] * n])
    if not isinstance(omegas, list):
        raise SpecParseError("expected a list of multiindices", "omegas")
    parsed = [parse_multiindex(omega, f"omegas[{k}]", n) for k, omega in enumerate(omegas)]
    return _report_outcome(lg_identity_sweep(G, D, parsed))


def _run_lg_matrix_check(spec: JobSpec, config: Config) -> Outcome:
    G = _system(spec, "G")
    n = len(G)
    D = _degree(spec, min(G.trunc_degree, config.limits.max_matrix_degree), config)
    omega = parse_multiindex(spec.inputs.get("omega", [0] * n), "omega", n)
    return _report_outcome([lg_matrix_identity_check(G, omega, D, config.limits)])


def _run_zw_check(spec: JobSpec, config: Config) -> Outcome:
    if spec.flavor == "lagrange-good":
        G = _system(spec, "G")
        D = _degree(spec, G.trunc_degree, config)
        z_routes, w_routes = lg_partition_Z(G, D), lg_free_energy(G, D)
    else:
        F = _system(spec, "F")
        D = _degree(spec, F.trunc_degree - 1, config)
        z_routes = reversion_z_routes(F, D, gaussian=bool(spec.inputs.get("gaussian", False)))
        w_routes = None
    Z = z_routes.value()
    W = w_routes.value() if w_routes is not None else free_energy_W(F, D)
    diagnostics = {
        "degree": D,
        "Z_routes": sorted(z_routes.routes),
        "Z_agree": z_routes.agree,
    }
    if w_routes is not None:
        diagnostics["W_routes"] = sorted(w_routes.routes)
        diagnostics["W_agree"] = w_routes.agree
    system = SeriesSystem([Z, W])
    return Outcome(
        result={"Z": system[0], "W": system[1]},
        diagnostics=diagnostics,
        table=lambda renderer: renderer.render_system(system),
    )


def _run_diagrams(spec: JobSpec, config: Config) -> Outcome:
    bound = _degree(spec, 1, config)
    if spec.flavor == "composition":
        classes = [c for d in range(1, bound + 1) for c in enumerate_composition_classes(d)]
    elif spec.flavor == "lagrange-good":
        classes = enumerate_lg_trees(bound)
    else:
        classes = enumerate_reversion_trees(bound)
    records = [{"class": c.encoding, "aut": aut_order(c), "degree": class_degree(c)} for c in classes]
    return Outcome(
        result=records,
        diagnostics={"flavor": spec.flavor, "bound": bound, "classes": len(records)},
        table=lambda renderer: renderer.render_records(records, ["class", "aut", "degree"]),
        bare=True,
    )


def _run_wick(spec: JobSpec, config: Config) -> Outcome:
    cov = CovarianceSpec.from_matrix(parse_matrix(spec.inputs["A"], "A"))
    alpha1 = parse_multiindex(spec.inputs["alpha1"], "alpha1", cov.n)
    alpha2 = parse_multiindex(spec.inputs["alpha2"], "alpha2", cov.n)
    value = gaussian_integral_monomial(cov, alpha1, alpha2, max_size=config.limits.max_permanent_size)
    pairings = value * cov.det_A
    record = {"integral": format_rational(value), "pairing_sum": format_rational(pairings)}
    return Outcome(
        result={"value": format_rational(value)},
        diagnostics={"det_A": cov.det_A, "pairing_sum": pairings},
        table=lambda renderer: renderer.render_records([record], ["integral", "pairing_sum"]),
        bare=True,
    )


HANDLERS: dict[str, Callable[[JobSpec, Config], Outcome]] = {
    "compose": _run_compose,
    "revert": _run_revert,
    "lg-solve": _run_lg_solve,
    "lg-check": _run_lg_check,
    "lg-matrix-check": _run_lg_matrix_check,
    "zw-check": _run_zw_check,
    "diagrams": _run_diagrams,
    "wick": _run_wick,
}


def run(spec: JobSpec, config: Optional[Config] = None) -> str:
    """
    Execute one job and render its output document.

    Returns:
        The JSON document {"result": ..., "diagnostics": ...}, the bare result
        for wick and diagrams, or a markdown table.

    Raises:
        FormalGaussianError: Library errors propagate unchanged.
    """
    config = config or Config()
    logger.info("Running %s", spec.command)
    outcome = HANDLERS[spec.command](spec, config)
    if spec.out_format == "table":
        return outcome.table(TableRenderer())
    if outcome.bare:
        logger.info("%s diagnostics: %s", spec.command, dumps(outcome.diagnostics, 0))
        return dumps(outcome.result, config.output.indent)
    return dumps({"result": outcome.result, "diagnostics": outcome.diagnostics}, config.output.indent)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="formal-gaussian",
        description="Exact formal Gaussian integration: composition, reversion and Lagrange-Good inversion",
    )
    parser.add_argument("command", choices=COMMANDS, help="Operation to run")
    parser.add_argument("--in", dest="input", type=str, help="Input JSON file (default: stdin)")
    parser.add_argument("--out", type=str, help="Output file (default: stdout)")
    parser.add_argument("--out-format", choices=("json", "table"), help="Output mode (default: from config)")
    parser.add_argument("--degree", "--bound", dest="degree", type=int, help="Truncation degree or class bound")
    parser.add_argument(
        "--flavor",
        choices=("composition", "reversion", "lagrange-good"),
        default="reversion",
        help="Diagram flavor for diagrams and zw-check",
    )
    parser.add_argument("--config", type=str, help="Path to configuration file (default: config.yaml)")
    return parser


def _read_inputs(args: argparse.Namespace) -> dict[str, Any]:
    if args.input:
        try:
            text = Path(args.input).read_text(encoding="utf-8")
        except OSError as e:
            raise SpecParseError(f"cannot read input file: {e}", "--in")
    elif args.command == "diagrams":
        return {}
    else:
        text = sys.stdin.read()
    payload = loads(text) if text.strip() else {}
    if not isinstance(payload, dict):
        raise SpecParseError("top-level JSON value must be an object", "input")
    return payload


def _job_spec(args: argparse.Namespace, config: Config) -> JobSpec:
    try:
        return JobSpec(
            command=args.command,
            inputs=_read_inputs(args),
            degree=args.degree,
            flavor=args.flavor,
            out_format=args.out_format or config.output.format,
        )
    except ValidationError as e:
        error = e.errors()[0]
        field_ = " -> ".join(str(loc) for loc in error["loc"]) or "job"
        raise SpecParseError(error["msg"], field_)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Main application entry point.

    Returns:
        Exit code: 0 ok, 1 configuration or output error, 2 parse error,
        3 math-domain error, 4 resource guard.
    """
    args = build_parser().parse_args(argv)

    try:
        config = load_config(args.config)
    except ConfigValidationError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    setup_logging(config)

    try:
        spec = _job_spec(args, config)
        document = run(spec, config)
        ResultWriter(args.out).write(document)
        return EXIT_OK

    except SpecParseError as e:
        logger.error("Parse error: %s", e)
        return EXIT_PARSE

    except DomainError as e:
        logger.error("Domain error: %s", e)
        return EXIT_DOMAIN

    except ResourceLimitError as e:
        logger.error("Resource limit: %s", e)
        return EXIT_RESOURCE

    except (ConfigValidationError, ResultWriteError) as e:
        logger.error("Configuration error: %s", e)
        return EXIT_CONFIG

    except FormalGaussianError as e:
        logger.error("Application error: %s", e)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
