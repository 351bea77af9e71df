"""Built-in manifest of published measure tables and side-by-side reproduction.

Published values are kept as printed strings so the comparison tolerance can
respect the printed precision: a value matches when it lies within the larger
of a relative tolerance and half a unit in the last printed digit. Printed
zeros must be reproduced to 1e-12.
"""
import io
import math
import logging
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .distribution import SkewElliptical, validate
from .errors import DomainError, TableNotFoundError
from .generators import parse_family
from .measures import MeasureReport, report_all

logger = logging.getLogger(__name__)

RELATIVE_TOLERANCE = 1e-3
ZERO_TOLERANCE = 1e-12

Published = Union[str, Tuple[str, ...], None]

# (report field, heading) per part of a two-part table
PART_ONE = (
    ("mardia_skew", "β1,k"),
    ("mardia_kurt", "β2,k"),
    ("malkovich_afifi", "β1*"),
    ("isogai_direction", "Isogai δ"),
)
PART_TWO = (
    ("song_approx", "Song S(f)"),
    ("bbq_vector", "BBQ T"),
    ("bbq_scalar", "BBQ Q*"),
    ("mori_vector", "Móri s(Y)"),
    ("kollo_vector", "Kollo b(Y)"),
    ("srivastava", "Srivastava s²1,k"),
)


@dataclass(frozen=True)
class TableRow:
    label: str
    family: str
    mu: Tuple[float, ...]
    omega: Tuple[Tuple[float, ...], ...]
    delta: Tuple[float, ...]
    published: Dict[str, Published] = field(default_factory=dict)

    def distribution(self) -> SkewElliptical:
        k = len(self.delta)
        return validate(self.mu, self.omega, self.delta, parse_family(self.family, k))


@dataclass(frozen=True)
class PublishedTable:
    table_id: str
    caption: str
    rows: Tuple[TableRow, ...]


@dataclass(frozen=True)
class Comparison:
    column: str
    computed: Optional[Tuple[float, ...]]
    published: Optional[Tuple[str, ...]]
    verdict: str


_OMEGA_2 = ((2.0, 1.0), (1.0, 3.0))
_FAMILIES_2 = (
    ("SN", "normal"),
    ("St(5)", "t:5"),
    ("SLo", "logistic"),
    ("SLa", "laplace"),
    ("SPII(2)", "pearson2:2"),
    ("SPVII(4)", "pearson7:4"),
)

_SKEWED_2 = {
    "SN": dict(mardia_skew="9.9624e-5", mardia_kurt="7.5698", malkovich_afifi="9.9624e-5",
               song_approx="2.5021e-5", bbq_vector=("-3.0238e-5", "0.0239"),
               bbq_scalar="5.7115e-4", mori_vector=("-8.0636e-5", "0.0637"),
               kollo_vector=("-8.0432e-5", "0.0636"), srivastava="1.7219"),
    "St(5)": dict(mardia_skew="0.2153", mardia_kurt="38.0429", malkovich_afifi="0.1640",
                  song_approx="0.0521", bbq_vector=("3.5695e-4", "0.3880"), bbq_scalar="0.1506",
                  mori_vector=("9.5187e-4", "1.0347"), kollo_vector=("0.4788", "1.0353"),
                  srivastava="2.8037"),
    "SLo": dict(mardia_skew="3.9460", mardia_kurt="11.3448", malkovich_afifi="3.0742",
                song_approx="1.8931", bbq_vector=("2.3531", "-17.9186"), bbq_scalar="326.6140",
                mori_vector=("6.2748", "-47.7830"), kollo_vector=("-1.6552", "-38.0525"),
                srivastava="24690.5000"),
    "SLa": dict(mardia_skew="0.0576", mardia_kurt="69.9447", malkovich_afifi="0.0442",
                song_approx="0.5609", bbq_vector=("8.8128e-5", "0.2069"), bbq_scalar="0.0428",
                mori_vector=("2.3501e-4", "0.5518"), kollo_vector=("0.2451", "0.5520"),
                srivastava="2.1174"),
    "SPII(2)": dict(mardia_skew="0.0088", mardia_kurt="4.1372", malkovich_afifi="0.0062",
                    song_approx="2.0361e-67", bbq_vector=("1.2653e-4", "-0.0598"),
                    bbq_scalar="0.0036", mori_vector=("3.3741e-4", "-0.1596"),
                    kollo_vector=("-0.1094", "-0.1596"), srivastava="1.5687"),
    "SPVII(4)": dict(mardia_skew="0.2153", mardia_kurt="16.0892", malkovich_afifi="0.1640",
                     song_approx="0.0393", bbq_vector=("3.5695e-4", "0.3880"), bbq_scalar="0.1506",
                     mori_vector=("9.5187e-4", "1.0347"), kollo_vector=("0.4788", "1.0353"),
                     srivastava="2.8037"),
}

_NULL_KURTOSIS_2 = {"SN": "8", "St(5)": "40", "SLo": "4.9812", "SLa": "79.5",
                    "SPII(2)": "4.1212", "SPVII(4)": "16"}


def _null_row(kurtosis: str) -> Dict[str, Published]:
    zeros = ("0", "0")
    return dict(mardia_skew="0", mardia_kurt=kurtosis, malkovich_afifi="0",
                isogai_direction=zeros, song_approx="0", bbq_vector=zeros, bbq_scalar="0",
                mori_vector=zeros, kollo_vector=zeros, srivastava="0")


TABLES: Dict[str, PublishedTable] = {
    "1": PublishedTable(
        "1", "Bivariate skew-elliptical laws, mu = 0, Omega = [[2,1],[1,3]], delta = (0.2, 1)",
        tuple(TableRow(label, family, (0.0, 0.0), _OMEGA_2, (0.2, 1.0),
                       dict(_SKEWED_2[label], isogai_direction=("0.2", "1")))
              for label, family in _FAMILIES_2)),
    "2": PublishedTable(
        "2", "Bivariate elliptical laws, mu = 0, Omega = [[2,1],[1,3]], delta = 0",
        tuple(TableRow(label, family, (0.0, 0.0), _OMEGA_2, (0.0, 0.0),
                       _null_row(_NULL_KURTOSIS_2[label]))
              for label, family in _FAMILIES_2)),
    "17": PublishedTable(
        "17", "Skew-normal fits to daily log-returns of two market sectors",
        (
            TableRow(
                "U (consumer staples)", "normal",
                (4.48872, 5.02663, 4.15431),
                ((0.10117, 0.02285, 0.02948), (0.02285, 0.06727, 0.01941),
                 (0.02948, 0.01941, 0.04078)),
                (-0.1494547, -0.2270945, -0.1434309),
                dict(mardia_skew="0.42214", mardia_kurt="17.29465", malkovich_afifi="0.42214",
                     isogai_direction=("-0.14945", "-0.22709", "-0.14343"),
                     song_approx="0.17980", bbq_vector=("-0.04137", "-0.12790", "-0.08561"),
                     bbq_scalar="0.02540", mori_vector=("-0.20686", "-0.63950", "-0.42804"),
                     kollo_vector=("-0.52911", "-1.63568", "-1.09482"),
                     srivastava="9987.47500"),
            ),
            TableRow(
                "V (energy)", "normal",
                (4.71430, 4.11939, 5.16496),
                ((0.10042, 0.03895, 0.04782), (0.03895, 0.11667, 0.01062),
                 (0.04782, 0.01062, 0.08271)),
                (-0.09351741, 0.09451593, -0.26141400),
                dict(mardia_skew="0.66939", mardia_kurt="19.12467", malkovich_afifi="0.66939",
                     isogai_direction=("-0.09352", "0.09452", "-0.26141"),
                     song_approx="0.23603", bbq_vector=("-0.01384", "0.05874", "-0.16971"),
                     bbq_scalar="0.03244", mori_vector=("-0.06919", "0.29371", "-0.84854"),
                     kollo_vector=("-0.03322", "0.14101", "-0.40738"),
                     srivastava="5248.02100"),
            ),
        )),
}


def known_tables() -> Tuple[str, ...]:
    return tuple(TABLES)


def get_table(table_id: str) -> PublishedTable:
    try:
        return TABLES[str(table_id)]
    except KeyError:
        raise TableNotFoundError(str(table_id), known_tables())


def printed_tolerance(text: str, rtol: float = RELATIVE_TOLERANCE) -> float:
    """Acceptance band for a printed value"""
    value = Decimal(text)
    if value == 0:
        return ZERO_TOLERANCE
    half_unit = 0.5 * 10.0 ** value.as_tuple().exponent
    return max(rtol * abs(float(value)), half_unit)


def compare_value(computed: Optional[Sequence[float]], published: Optional[Sequence[str]],
                  rtol: float = RELATIVE_TOLERANCE) -> str:
    """MATCH, MISMATCH, or n/a when either side is missing"""
    if computed is None or published is None:
        return "n/a"
    if len(computed) != len(published):
        raise DomainError(f"cannot compare {len(computed)} computed values "
                          f"with {len(published)} published values")
    for value, text in zip(computed, published):
        if not math.isfinite(value) or abs(value - float(text)) > printed_tolerance(text, rtol):
            return "MISMATCH"
    return "MATCH"


def _isogai_direction(D: SkewElliptical, report: MeasureReport) -> Optional[Tuple[float, ...]]:
    """delta, signed by the orientation of the vectorial Isogai measure"""
    if report.isogai_vector is None:
        return None
    vector = np.asarray(report.isogai_vector)
    if not np.any(D.delta):
        return tuple(0.0 for _ in D.delta)
    sign = 1.0 if float(vector @ D.delta) >= 0 else -1.0
    return tuple(float(v) for v in sign * D.delta)


def _as_tuple(value) -> Optional[Tuple]:
    if value is None:
        return None
    return tuple(value) if isinstance(value, (tuple, list)) else (value,)


def evaluate_row(row: TableRow, convention: Optional[str] = None,
                 rtol: float = RELATIVE_TOLERANCE) -> Tuple[MeasureReport, List[Comparison]]:
    D = row.distribution()
    report = report_all(D, convention)
    computed = {name: getattr(report, name, None) for name, _ in PART_ONE + PART_TWO
                if name != "isogai_direction"}
    computed["isogai_direction"] = _isogai_direction(D, report)
    comparisons = []
    for name, _ in PART_ONE + PART_TWO:
        ours = _as_tuple(computed[name])
        theirs = _as_tuple(row.published.get(name))
        verdict = compare_value(ours, theirs, rtol)
        if verdict == "MISMATCH":
            logger.info("%s %s: computed %s, published %s", row.label, name, ours, theirs)
        comparisons.append(Comparison(name, ours, theirs, verdict))
    return report, comparisons


def reproduce(table_id: str, convention: Optional[str] = None,
              rtol: float = RELATIVE_TOLERANCE) -> List[Tuple[TableRow, List[Comparison]]]:
    table = get_table(table_id)
    return [(row, evaluate_row(row, convention, rtol)[1]) for row in table.rows]


def _number(value: float) -> str:
    return f"{value:.5g}"


def _cell(c: Comparison) -> str:
    if c.computed is None:
        ours = "null"
    elif len(c.computed) == 1:
        ours = _number(c.computed[0])
    else:
        ours = "(" + ", ".join(_number(v) for v in c.computed) + ")"
    if c.published is None:
        return ours
    theirs = c.published[0] if len(c.published) == 1 else "(" + ", ".join(c.published) + ")"
    return f"{ours} / {theirs} {c.verdict}"


def render_markdown(table_id: str, convention: Optional[str] = None) -> str:
    """Two-part markdown layout: computed / published VERDICT per cell"""
    table = get_table(table_id)
    results = reproduce(table_id, convention)
    out = []
    for part, columns in (("1", PART_ONE), ("2", PART_TWO)):
        out.append(f"### Table {table.table_id}-{part}: {table.caption}\n")
        header = ["#", "Distribution"] + [heading for _, heading in columns]
        out.append("| " + " | ".join(header) + " |")
        out.append("|" + "|".join("---" for _ in header) + "|")
        names = [name for name, _ in columns]
        for index, (row, comparisons) in enumerate(results, start=1):
            cells = [_cell(c) for c in comparisons if c.column in names]
            out.append("| " + " | ".join([str(index), row.label] + cells) + " |")
        out.append("")
    return "\n".join(out)


def to_frame(table_id: str, convention: Optional[str] = None) -> pd.DataFrame:
    """Long format: one line per table cell component"""
    records = []
    for index, (row, comparisons) in enumerate(reproduce(table_id, convention), start=1):
        for c in comparisons:
            part = "1" if c.column in dict(PART_ONE) else "2"
            width = max(len(c.computed or ()), len(c.published or ()))
            for component in range(width):
                records.append({
                    "table": f"{table_id}-{part}",
                    "row": index,
                    "distribution": row.label,
                    "measure": c.column,
                    "component": component + 1,
                    "computed": c.computed[component] if c.computed else None,
                    "published": c.published[component] if c.published else None,
                    "verdict": c.verdict,
                })
    return pd.DataFrame.from_records(records)


def render_csv(table_id: str, convention: Optional[str] = None) -> str:
    buffer = io.StringIO()
    to_frame(table_id, convention).to_csv(buffer, index=False, float_format="%.10g",
                                          lineterminator="\n")
    return buffer.getvalue()
