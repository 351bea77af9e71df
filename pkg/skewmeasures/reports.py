"""Serialize measure and test reports to JSON, CSV or markdown."""
import io
import json
import math
import logging
from dataclasses import fields, is_dataclass
from typing import Any, Dict, List, Sequence, Type, Union

import numpy as np
import pandas as pd

from .errors import DomainError
from .inference import CriticalValues, EmpiricalReport, TestResult
from .measures import MeasureReport

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv", "markdown")

REPORT_TYPES: Dict[str, Type] = {
    "measures": MeasureReport,
    "test": TestResult,
    "critical_values": CriticalValues,
    "empirical": EmpiricalReport,
}

# fields decoded back to numpy arrays
_ARRAY_FIELDS = {
    TestResult: {"b1_direction"},
    EmpiricalReport: {"bbq_vector", "mori_vector", "kollo_vector"},
}


def _plain(value: Any) -> Any:
    """JSON-ready copy of a field value; non-finite floats become None"""
    if is_dataclass(value) and not isinstance(value, type):
        return to_dict(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def to_dict(report) -> Dict[str, Any]:
    """Dataclass report as a dict in field declaration order"""
    if isinstance(report, dict):
        return {k: _plain(v) for k, v in report.items()}
    if not is_dataclass(report):
        raise DomainError(f"cannot serialize {type(report).__name__}")
    return {f.name: _plain(getattr(report, f.name)) for f in fields(report)}


def from_dict(cls: Type, data: Dict[str, Any]):
    """Rebuild a report dataclass from its to_dict form"""
    arrays = _ARRAY_FIELDS.get(cls, set())
    kwargs = {}
    for f in fields(cls):
        if f.name not in data:
            continue
        value = data[f.name]
        if f.name in arrays and value is not None:
            value = np.array(value, dtype=float)
        elif isinstance(value, list):
            value = tuple(np.array(v, dtype=float) if isinstance(v, list) else v for v in value)
        kwargs[f.name] = value
    return cls(**kwargs)


def to_json(report) -> str:
    payload = [to_dict(r) for r in report] if isinstance(report, list) else to_dict(report)
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def from_json(text: str, kind: str):
    """Parse a JSON report of the given kind ('measures', 'test', ...)"""
    if kind not in REPORT_TYPES:
        raise DomainError(f"unknown report kind '{kind}', expected one of {sorted(REPORT_TYPES)}")
    payload = json.loads(text)
    cls = REPORT_TYPES[kind]
    if isinstance(payload, list):
        return [from_dict(cls, item) for item in payload]
    return from_dict(cls, payload)


def flatten(data: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    """Nested dicts become dotted keys and lists become 1-based indexed keys"""
    flat: Dict[str, Any] = {}
    for key, value in data.items():
        name = f"{prefix}.{key}" if prefix else key
        if isinstance(value, dict):
            if value:
                flat.update(flatten(value, name))
        elif isinstance(value, list):
            if all(isinstance(v, str) for v in value):
                flat[name] = "; ".join(str(v) for v in value)
            else:
                for i, item in enumerate(value, start=1):
                    if isinstance(item, (list, dict)):
                        nested = item if isinstance(item, dict) else {
                            str(j): v for j, v in enumerate(item, start=1)}
                        flat.update(flatten(nested, f"{name}[{i}]"))
                    else:
                        flat[f"{name}[{i}]"] = item
        else:
            flat[name] = value
    return flat


def _cell(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def markdown_table(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    lines = ["| " + " | ".join(header) + " |",
             "|" + "|".join("---" for _ in header) + "|"]
    for row in rows:
        lines.append("| " + " | ".join(_cell(v) for v in row) + " |")
    return "\n".join(lines) + "\n"


def to_csv(records: List[Dict[str, Any]]) -> str:
    frame = pd.DataFrame([flatten(r) for r in records])
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def to_markdown(records: List[Dict[str, Any]]) -> str:
    flat = [flatten(r) for r in records]
    if len(flat) == 1:
        return markdown_table(("field", "value"), list(flat[0].items()))
    header: List[str] = []
    for row in flat:
        header.extend(k for k in row if k not in header)
    return markdown_table(header, [[row.get(k) for k in header] for row in flat])


def render(report: Union[Any, List[Any]], fmt: str = "json") -> str:
    """Render one report (or a list of reports) in json, csv or markdown"""
    if fmt not in FORMATS:
        raise DomainError(f"unknown format '{fmt}', expected one of {', '.join(FORMATS)}")
    if fmt == "json":
        return to_json(report)
    records = [to_dict(r) for r in report] if isinstance(report, list) else [to_dict(report)]
    if fmt == "csv":
        return to_csv(records)
    return to_markdown(records)
