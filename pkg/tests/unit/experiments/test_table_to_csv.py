import numpy as np
import pandas as pd
import pytest

from misspec_bounds.models.result_table import ResultTable
from misspec_bounds.table_to_csv import emit_csv, emit_gnuplot_stub, format_value


@pytest.fixture
def table():
    frame = pd.DataFrame({"N": [2, 3], "mcrb": [0.2625, 1e-20], "g": ["identity", "vuong"]})
    return ResultTable("demo", frame)


@pytest.mark.parametrize("value, expected", [
    (3, "3"),
    (np.int64(12), "12"),
    (0.1, "0.10000000000000001"),
    (0.25, "0.25"),
    (2.5e10, "25000000000"),
    (True, "true"),
    ("vuong", "vuong"),
])
def test_format_value(value, expected):
    assert format_value(value) == expected


def test_emit_csv(table, tmp_path):
    path = emit_csv(table, tmp_path / "nested" / "demo.csv")
    lines = path.read_text(encoding="utf-8").split("\n")
    assert lines[0] == "N,mcrb,g"
    assert lines[1] == "2,0.26250000000000001,identity"
    assert "e" not in lines[2].split(",")[1]
    assert lines[-1] == ""


def test_emit_csv_unwritable(table, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("", encoding="utf-8")
    with pytest.raises(OSError):
        emit_csv(table, blocker / "demo.csv")


def test_gnuplot_stub(table, tmp_path):
    csv_path = emit_csv(table, tmp_path / "demo.csv")
    script = emit_gnuplot_stub(table, csv_path).read_text(encoding="utf-8")
    assert "set datafile separator ','" in script
    assert "'demo.csv' using 1:2 with linespoints" in script
    assert "using 1:3" not in script
