"""Skewness and kurtosis measures of skew-elliptical distributions."""
from .distribution import SkewElliptical, pdf, sample, validate
from .errors import SkewMeasuresError
from .generators import GeneratorFamily, parse_family
from .measures import MeasureReport, report_all

__all__ = [
    "GeneratorFamily",
    "MeasureReport",
    "SkewElliptical",
    "SkewMeasuresError",
    "parse_family",
    "pdf",
    "report_all",
    "sample",
    "validate",
]
