import math

import pytest

from skewmeasures.errors import DomainError, TableNotFoundError
from skewmeasures.tables import (PART_ONE, PART_TWO, compare_value, evaluate_row, get_table,
                                 known_tables, printed_tolerance, render_csv, render_markdown,
                                 reproduce)

SKEWNESS_COLUMNS = ["mardia_skew", "malkovich_afifi", "isogai_direction", "song_approx",
                    "bbq_vector", "bbq_scalar", "mori_vector", "kollo_vector", "srivastava"]


def verdicts_by_column(comparisons):
    return {c.column: c.verdict for c in comparisons}


def test_known_tables():
    assert known_tables() == ("1", "2", "17")
    assert len(get_table("1").rows) == 6
    assert len(get_table(17).rows) == 2
    with pytest.raises(TableNotFoundError) as info:
        get_table("99")
    assert "1, 2, 17" in str(info.value)


def test_printed_tolerance():
    assert printed_tolerance("0") == 1e-12
    assert printed_tolerance("0.0239") == pytest.approx(5e-5)
    assert printed_tolerance("9.9624e-5") == pytest.approx(9.9624e-8)
    assert printed_tolerance("8") == 0.5
    assert printed_tolerance("24690.5000") == pytest.approx(24.6905)


def test_compare_value():
    assert compare_value((0.02392,), ("0.0239",)) == "MATCH"
    assert compare_value((0.0242,), ("0.0239",)) == "MISMATCH"
    assert compare_value((1e-11,), ("0",)) == "MISMATCH"
    assert compare_value((math.nan,), ("1",)) == "MISMATCH"
    assert compare_value(None, ("1",)) == "n/a"
    assert compare_value((1.0,), None) == "n/a"
    with pytest.raises(DomainError):
        compare_value((1.0, 2.0), ("1",))


def test_every_row_covers_every_column():
    columns = [name for name, _ in PART_ONE + PART_TWO]
    for table_id in known_tables():
        for row in get_table(table_id).rows:
            assert sorted(row.published) == sorted(columns), row.label
            assert row.distribution().k == len(row.delta)


def test_skew_normal_row():
    report, comparisons = evaluate_row(get_table("1").rows[0])
    verdicts = verdicts_by_column(comparisons)
    assert verdicts["mardia_skew"] == "MATCH"
    assert verdicts["malkovich_afifi"] == "MATCH"
    assert verdicts["isogai_direction"] == "MATCH"
    # published beta_2 lies below the elliptical value of 8
    assert verdicts["mardia_kurt"] == "MISMATCH"
    assert report.mardia_kurt > 8.0


def test_elliptical_table():
    results = reproduce("2")
    assert [row.label for row, _ in results] == ["SN", "St(5)", "SLo", "SLa", "SPII(2)",
                                                 "SPVII(4)"]
    for row, comparisons in results:
        verdicts = verdicts_by_column(comparisons)
        for column in SKEWNESS_COLUMNS:
            assert verdicts[column] == "MATCH", (row.label, column)
    by_label = {row.label: verdicts_by_column(c) for row, c in results}
    assert by_label["SN"]["mardia_kurt"] == "MATCH"
    assert by_label["St(5)"]["mardia_kurt"] == "MISMATCH"


def test_markdown_has_both_parts():
    text = render_markdown("2")
    assert "### Table 2-1:" in text
    assert "### Table 2-2:" in text
    assert "| 1 | SN |" in text
    assert "MATCH" in text


def test_csv_is_long_format():
    lines = render_csv("2").splitlines()
    assert lines[0] == "table,row,distribution,measure,component,computed,published,verdict"
    assert lines[1].startswith("2-1,1,SN,mardia_skew,1,")
    assert any(line.startswith("2-2,6,SPVII(4),bbq_vector,2,") for line in lines)
