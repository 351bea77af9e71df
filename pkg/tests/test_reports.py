import json

import numpy as np
import pytest

from skewmeasures.distribution import SkewElliptical, sample
from skewmeasures.errors import DomainError
from skewmeasures.generators import parse_family
from skewmeasures.inference import (CriticalValues, Sample, TestConfig, TestResult, b2_star_sq,
                                    empirical_measures, standardize)
from skewmeasures.measures import MeasureReport, report_all
from skewmeasures.reports import flatten, from_dict, from_json, render, to_dict, to_json

OMEGA = [[2.0, 1.0], [1.0, 3.0]]


def measure_report(label="normal"):
    return report_all(SkewElliptical([0, 0], OMEGA, [0.2, 1.0], parse_family(label, 2)))


def test_measure_report_json_round_trip():
    report = measure_report()
    text = to_json(report)
    assert text.endswith("\n")
    assert from_json(text, "measures") == report
    assert list(json.loads(text))[:4] == ["family", "k", "delta_star", "convention"]


def test_missing_measures_are_null():
    report = measure_report("t:3.5")
    payload = json.loads(to_json(report))
    assert payload["mardia_kurt"] is None
    assert payload["status"]["mardia_kurt"] == "m>4 required"
    assert from_json(to_json(report), "measures").mardia_kurt is None


def test_critical_values_round_trip():
    critical = CriticalValues(K_b1=1.25, K_b2=0.5, K=2.9, alpha=0.05, n=50, n_reps=100,
                              family="normal", seed=7)
    assert from_json(to_json(critical), "critical_values") == critical


def test_test_result_round_trip():
    D = SkewElliptical([0, 0], OMEGA, [0.2, 1.0], parse_family("normal", 2))
    X, _ = standardize(Sample(sample(D, 120, seed=3)))
    result = b2_star_sq(X, TestConfig(K=3.0))
    back = from_dict(TestResult, json.loads(to_json(result)))
    assert back.b1_star == result.b1_star
    np.testing.assert_array_equal(back.b1_direction, result.b1_direction)
    np.testing.assert_array_equal(back.b2_directions[1], result.b2_directions[1])
    assert back.converged == result.converged
    assert back.dominant == result.dominant


def test_non_finite_values_become_null():
    assert to_dict({"value": float("inf"), "items": np.array([1.0, np.nan])}) == {
        "value": None, "items": [1.0, None]}
    with pytest.raises(DomainError):
        to_dict(object())


def test_flatten():
    flat = flatten({"a": {"b": 1, "c": [2.0, 3.0]}, "flags": ["x", "y"], "empty": {}})
    assert flat == {"a.b": 1, "a.c[1]": 2.0, "a.c[2]": 3.0, "flags": "x; y"}
    nested = flatten({"d": [[1, 2], [3, 4]]})
    assert nested["d[2].1"] == 3


def test_csv_rendering_of_vectors():
    text = render(measure_report(), "csv")
    header = text.splitlines()[0].split(",")
    assert "bbq_vector[1]" in header
    assert "isogai_vector[2]" in header
    assert len(text.splitlines()) == 2


def test_csv_rendering_of_many_reports():
    reports = [measure_report(label) for label in ("normal", "t:5", "laplace")]
    lines = render(reports, "csv").splitlines()
    assert len(lines) == 4
    assert lines[2].startswith("t:5,")


def test_markdown_rendering():
    text = render(measure_report(), "markdown")
    assert text.startswith("| field | value |")
    assert "| mardia_skew |" in text
    data = Sample(sample(SkewElliptical([0, 0], OMEGA, [0.2, 1.0], parse_family("normal", 2)),
                         60, seed=2))
    assert "| b1k |" in render(empirical_measures(data), "markdown")


def test_unknown_format_and_kind():
    with pytest.raises(DomainError):
        render(measure_report(), "xml")
    with pytest.raises(DomainError):
        from_json("{}", "histogram")


def test_field_names_come_first_in_order():
    names = list(to_dict(measure_report()))
    assert names[4:4 + len(MeasureReport.measure_names())] == list(MeasureReport.measure_names())
