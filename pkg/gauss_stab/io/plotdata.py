"""Whitespace separated data files for external plotting tools."""
from logging import getLogger
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Union

from gauss_stab.io.csv_tables import format_cell
from gauss_stab.pipeline.nodes import ScenarioResult

LOGGER = getLogger(__name__)


def write_columns(
    path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> Path:
    path = Path(path)
    lines = [" ".join(format_cell(v, c) for c, v in zip(header, row)) for row in rows]
    with open(path, mode="w", encoding="utf-8", newline="") as file_handler:
        file_handler.write("# " + " ".join(header) + "\n")
        file_handler.writelines(line + "\n" for line in lines)
    return path


def emit_plotdata(result: ScenarioResult, out_dir: Union[str, Path]) -> List[Path]:
    """Write the plot files whose source data the scenario produced."""
    directory = Path(out_dir) / result.name
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    if result.posterior is not None:
        a = result.prior.slope_a
        table = result.posterior
        written.append(
            write_columns(
                directory / "psi_vs_ay.dat",
                ["y", "psi", "a_y"],
                ((y, psi, a * y) for y, psi in zip(table.y, table.cond_median)),
            )
        )
    if result.l1 is not None:
        written.append(
            write_columns(
                directory / "hermite_coeffs.dat",
                ["n", "abs_c_n", "bound_n"],
                ((entry.n, abs(entry.c_n), entry.bound) for entry in result.l1.per_n),
            )
        )
    if result.l2 is not None:
        written.append(
            write_columns(
                directory / "levy_profile.dat",
                ["h", "violation"],
                zip(result.l2.profile_h, result.l2.profile_violation),
            )
        )
    if result.operators is not None:
        written.append(
            write_columns(
                directory / "phi_l1_growth.dat",
                ["n", "phi_l1"],
                zip(result.operators.phi_l1_orders, result.operators.phi_l1_norms),
            )
        )
    LOGGER.debug(f"Scenario '{result.name}': {len(written)} plot file(s) written")
    return written
