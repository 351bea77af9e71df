"""Read and write samples as header-first numeric CSV."""
import io
import re
import sys
import logging
from typing import Union

import numpy as np
import pandas as pd

from .errors import CsvParseError
from .inference import Sample

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"

_PANDAS_LINE = re.compile(r"line (\d+)")


def _read_frame(source) -> pd.DataFrame:
    try:
        return pd.read_csv(source, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise CsvParseError("empty file, a header row is required")
    except pd.errors.ParserError as e:
        match = _PANDAS_LINE.search(str(e))
        line = int(match.group(1)) if match else None
        raise CsvParseError(f"wrong number of fields ({e})", line=line)


def read_sample_csv(source: Union[str, io.IOBase]) -> Sample:
    """Read a CSV with a header row and one draw per row into a Sample"""
    df = _read_frame(source)
    if df.shape[1] == 0:
        raise CsvParseError("header row has no columns", line=1)
    k = df.shape[1]
    values = np.empty(df.shape, dtype=float)
    # header is line 1, data rows start at line 2
    for position, row in enumerate(df.itertuples(index=False, name=None)):
        line = position + 2
        # pandas pads a short row with empty strings
        present = k
        while present and row[present - 1] == "":
            present -= 1
        if present < k:
            raise CsvParseError(f"expected {k} fields, saw {present}", line=line)
        for column, cell in enumerate(row):
            try:
                values[position, column] = float(cell)
            except ValueError:
                raise CsvParseError(f"non-numeric value {cell!r} in column "
                                    f"'{df.columns[column]}'", line=line)
    logger.debug("Read %d rows of dimension %d", values.shape[0], k)
    return Sample(values)


def write_sample_csv(data, target: Union[str, io.IOBase, None] = None) -> str:
    """Write draws with header y1..yk; returns the CSV text"""
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    columns = [f"y{i + 1}" for i in range(data.shape[1])]
    text = pd.DataFrame(data, columns=columns).to_csv(index=False, float_format=FLOAT_FORMAT,
                                                      lineterminator="\n")
    if target is None or target == "-":
        if target == "-":
            sys.stdout.write(text)
        return text
    if isinstance(target, str):
        with open(target, "w", newline="") as fh:
            fh.write(text)
    else:
        target.write(text)
    return text
