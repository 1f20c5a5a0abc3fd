import numpy as np
import pytest

from qfeedback.errors import ParameterDomainError
from qfeedback.tables import format_table, parse_table, read_table, render_value, write_table


def test_render_value_nine_significant_digits():
    assert render_value(2.0 / 3.0) == "0.666666667"
    assert render_value(1.0) == "1"
    assert render_value(8.264462809917354) == "8.26446281"
    assert render_value(1.23456789012e-7) == "1.23456789e-07"


def test_format_table_layout():
    text = format_table(["a", "b"], [[1.0, 2.0], [0.5, float("nan")]],
                        command="qfb demo", seed=7, meta=[("note", "x")])
    lines = text.split("\n")
    assert lines[0].startswith("# tool: qfb ")
    assert lines[1] == "# command: qfb demo"
    assert lines[2] == "# seed: 7"
    assert lines[3] == "# note: x"
    assert lines[4] == "a,b"
    assert lines[5] == "1,2"
    assert lines[6] == "0.5,"  # NaN renders as an empty (missing) cell
    assert text.endswith("\n")
    assert "\r" not in text


def test_format_table_row_length_check():
    with pytest.raises(ParameterDomainError):
        format_table(["a", "b"], [[1.0]])


def test_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    rows = [[0.1, 2.0 / 3.0], [0.2, float("nan")]]
    write_table(path, ["x", "y"], rows, command="qfb t", seed=3)
    parsed = read_table(path)
    assert parsed.columns == ["x", "y"]
    assert parsed.meta["seed"] == "3"
    assert parsed.meta["command"] == "qfb t"
    assert parsed.rows[0, 1] == pytest.approx(2.0 / 3.0, rel=1e-8)
    assert np.isnan(parsed.rows[1, 1])


def test_parse_requires_header():
    with pytest.raises(ParameterDomainError):
        parse_table("# only: comments\n")
