"""CSV result tables: comma separated, ``%.17g`` numbers, ``\\n`` line endings."""
import csv
import math
from logging import getLogger
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from gauss_stab.exceptions import GaussStabError
from gauss_stab.pipeline.nodes import ScenarioResult

LOGGER = getLogger(__name__)

STAGES = (
    ("prepare_prior", None),
    ("prepare_field", None),
    ("certify_l2", "l2"),
    ("certify_l1", "l1"),
    ("diagnose_operators", "operators"),
    ("diagnose_hermite", "hermite_diag"),
)

SUMMARY_COLUMNS = [
    "name",
    "kind",
    "passed",
    "failed_stages",
    "slope_a",
    "variance",
    "epsilon",
    "levy",
    "l2_bound",
    "l2_slack",
    "l2_passed",
    "eps_l1",
    "sup_dev",
    "sup_dev_bound",
    "weighted_T_l1",
    "max_abs_c_n",
    "envelope_sum",
    "proof_chain_holds",
    "tight_chain_holds",
    "l1_passed",
    "operators_passed",
    "hermite_passed",
]


class NonFiniteCell(GaussStabError):
    """A table cell holds NaN or an infinity."""


def format_cell(value: Any, column: str = "") -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise NonFiniteCell(f"column '{column}' holds the non-finite value {value}")
        return "%.17g" % value
    return str(value)


def write_table(
    path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> Path:
    """Format every cell first so a non-finite value leaves no partial file."""
    path = Path(path)
    formatted = [
        [format_cell(value, column) for column, value in zip(header, row)] for row in rows
    ]
    with open(path, mode="w", encoding="utf-8", newline="") as file_handler:
        writer = csv.writer(file_handler, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(formatted)
    return path


def _quantities(values: Dict[str, Any]) -> List[List[Any]]:
    return [[key, value] for key, value in values.items()]


def _stage_rows(result: ScenarioResult) -> List[List[Any]]:
    failures = {failure.stage: failure for failure in result.failures}
    rows = []
    for stage, certificate in STAGES:
        if certificate is not None and certificate not in result.scenario.certificates:
            rows.append([stage, "skipped", None, None])
        elif stage in failures:
            rows.append([stage, "failed", failures[stage].error, failures[stage].message])
        elif _blocked(result, stage):
            rows.append([stage, "blocked", None, None])
        else:
            rows.append([stage, "ok", None, None])
    return rows


def _blocked(result: ScenarioResult, stage: str) -> bool:
    """A stage that returned an upstream failure instead of running."""
    produced = {
        "prepare_prior": result.prior,
        "prepare_field": result.posterior,
        "certify_l2": result.l2,
        "certify_l1": result.l1,
        "diagnose_operators": result.operators,
        "diagnose_hermite": result.hermite,
    }
    return produced[stage] is None


def write_scenario_tables(result: ScenarioResult, out_dir: Union[str, Path]) -> List[Path]:
    """Tables of one scenario instance in ``out_dir/<name>/``."""
    directory = Path(out_dir) / result.name
    directory.mkdir(parents=True, exist_ok=True)
    written = []

    if result.posterior is not None:
        table = result.posterior
        a = result.prior.slope_a
        written.append(
            write_table(
                directory / "posterior.csv",
                ["y", "marginal", "cond_mean", "cond_median", "a_y"],
                zip(table.y, table.marginal, table.cond_mean, table.cond_median, (a * y for y in table.y)),
            )
        )
    if result.l2 is not None:
        scalars = result.l2.dict(exclude={"profile_h", "profile_violation"})
        written.append(
            write_table(directory / "l2_certificate.csv", ["quantity", "value"], _quantities(scalars))
        )
    if result.l1 is not None:
        scalars = result.l1.dict(exclude={"per_n", "psi", "y"})
        scalars["passed"] = result.l1.passed
        written.append(
            write_table(directory / "l1_certificate.csv", ["quantity", "value"], _quantities(scalars))
        )
        columns = ["n", "c_n", "phi_l1", "bound", "passed", "adjoint_residual", "majorant"]
        written.append(
            write_table(
                directory / "l1_coefficients.csv",
                columns,
                ([getattr(entry, column) for column in columns] for entry in result.l1.per_n),
            )
        )
    if result.operators is not None:
        diagnostics = result.operators
        scalars = diagnostics.dict(exclude={"dawson", "phi", "phi_l1_orders", "phi_l1_norms"})
        scalars.update({f"dawson_{key}": value for key, value in diagnostics.dawson.dict().items()})
        written.append(
            write_table(directory / "operators.csv", ["quantity", "value"], _quantities(scalars))
        )
        columns = ["n", "fourier_l1_norm", "majorant", "adjoint_residual", "residual_window"]
        written.append(
            write_table(
                directory / "phi_functions.csv",
                columns,
                ([getattr(phi, column) for column in columns] for phi in diagnostics.phi),
            )
        )
    if result.hermite is not None:
        scalars = result.hermite.dict(exclude={"coefficients"})
        written.append(
            write_table(directory / "hermite.csv", ["quantity", "value"], _quantities(scalars))
        )
        written.append(
            write_table(
                directory / "hermite_coefficients.csv",
                ["n", "c_n"],
                enumerate(result.hermite.coefficients),
            )
        )
    written.append(
        write_table(directory / "status.csv", ["stage", "outcome", "error", "message"], _stage_rows(result))
    )
    return written


def summary_row(result: ScenarioResult) -> Dict[str, Any]:
    row: Dict[str, Optional[Any]] = dict.fromkeys(SUMMARY_COLUMNS)
    row.update(
        name=result.name,
        kind=result.scenario.prior.kind,
        passed=result.passed,
        failed_stages=";".join(failure.stage for failure in result.failures),
    )
    if result.prior is not None:
        row.update(slope_a=result.prior.slope_a, variance=result.prior.variance)
    if result.l2 is not None:
        row.update(
            epsilon=result.l2.epsilon,
            levy=result.l2.levy,
            l2_bound=result.l2.bound,
            l2_slack=result.l2.slack,
            l2_passed=result.l2.passed,
        )
    if result.l1 is not None:
        row.update(
            eps_l1=result.l1.eps_l1,
            sup_dev=result.l1.sup_dev,
            sup_dev_bound=result.l1.sup_dev_bound,
            weighted_T_l1=result.l1.weighted_T_l1,
            max_abs_c_n=max(abs(entry.c_n) for entry in result.l1.per_n),
            envelope_sum=result.l1.envelope_sum,
            proof_chain_holds=result.l1.proof_chain_holds,
            tight_chain_holds=result.l1.tight_chain_holds,
            l1_passed=result.l1.passed,
        )
    if result.operators is not None:
        row.update(operators_passed=result.operators.passed)
    if result.hermite is not None:
        row.update(hermite_passed=result.hermite.passed)
    return row


def write_summary(results: Iterable[ScenarioResult], out_dir: Union[str, Path]) -> Path:
    ordered = sorted(results, key=lambda result: result.name)
    rows = [summary_row(result) for result in ordered]
    return write_table(
        Path(out_dir) / "summary.csv",
        SUMMARY_COLUMNS,
        ([row[column] for column in SUMMARY_COLUMNS] for row in rows),
    )
