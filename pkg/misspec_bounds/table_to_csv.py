import logging
from numbers import Integral, Real
from pathlib import Path

import numpy as np

from misspec_bounds.models.result_table import ResultTable

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 17


def format_value(value) -> str:
    """
    Decimal (never scientific) notation with 17 significant digits; integers
    and strings are written as they are.
    """
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, Integral):
        return str(int(value))
    if isinstance(value, Real):
        return np.format_float_positional(
            float(value), precision=SIGNIFICANT_DIGITS, unique=False, fractional=False, trim="-"
        )
    return str(value)


def emit_csv(table: ResultTable, path) -> Path:
    """
    Writes a ResultTable as UTF-8 CSV with a header row, rows in table order.

    Raises:
        OSError: If the file cannot be written.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    formatted = table.frame.copy()
    for column in formatted.columns:
        formatted[column] = formatted[column].map(format_value).astype(object)
    formatted.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    logger.info("Wrote %s (%d rows)", path, len(formatted))
    return path


def emit_gnuplot_stub(table: ResultTable, csv_path) -> Path:
    """Writes <name>.gp plotting every column against the first."""
    csv_path = Path(csv_path)
    script = csv_path.with_suffix(".gp")
    columns = table.columns
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{columns[0]}'" if columns else "",
        "set logscale y",
        "set terminal pngcairo size 900,600",
        f"set output '{csv_path.stem}.png'",
    ]
    numeric = [i + 1 for i, c in enumerate(columns) if i > 0 and table.frame[c].dtype.kind in "fiu"]
    if numeric:
        plots = ", \\\n     ".join(f"'{csv_path.name}' using 1:{i} with linespoints" for i in numeric)
        lines.append(f"plot {plots}")
    script.write_text("\n".join(line for line in lines if line) + "\n", encoding="utf-8")
    return script
