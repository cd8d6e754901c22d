from .csv_tables import (
    NonFiniteCell,
    format_cell,
    summary_row,
    write_scenario_tables,
    write_summary,
    write_table,
)
from .plotdata import emit_plotdata, write_columns
