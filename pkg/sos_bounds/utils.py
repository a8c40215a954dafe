import csv
import io
import json
import logging
import pickle
import sys
from collections import OrderedDict
from fractions import Fraction
from itertools import product
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple

import h5py
import numpy as np
from scipy.io import savemat

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12
SCHEMA_VERSION = 1


def load_json_ordered(filename: str) -> OrderedDict:
    """Loads json file as an ordered dict.
    Args:
        filename: Path to json file to be loaded.
    Returns:
        OrderedDict: odict
            OrderedDict containing data from json file.
    """
    with open(filename) as f:
        odict = json.load(f, object_pairs_hook=OrderedDict)
    return odict


def format_value(value: Any) -> str:
    """Formats one table cell. Floats (including mpmath values) get 12 significant digits,
    exact rationals are written as ``num/den``.
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, str):
        return value
    return f"{float(value):.{SIGNIFICANT_DIGITS}g}"


def header_comment(schema: str, **meta: Any) -> str:
    """Returns the leading comment line of every CSV table."""
    parts = [f"schema={schema}/v{SCHEMA_VERSION}"]
    parts.extend(f"{key}={value}" for key, value in meta.items())
    return "# " + " ".join(parts)


def write_table(
    stream: TextIO,
    schema: str,
    columns: Sequence[str],
    rows: Sequence[Sequence[Any]],
    **meta: Any,
) -> None:
    """Writes ``rows`` as CSV to ``stream`` with a schema header comment."""
    stream.write(header_comment(schema, **meta) + "\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])


def table_to_string(
    schema: str, columns: Sequence[str], rows: Sequence[Sequence[Any]], **meta: Any
) -> str:
    buf = io.StringIO()
    write_table(buf, schema, columns, rows, **meta)
    return buf.getvalue()


def _column_array(values: Sequence[Any]) -> np.ndarray:
    if all(isinstance(v, str) for v in values):
        return np.array(values, dtype="S")
    return np.array(
        [np.nan if v is None else float(v) for v in values], dtype=np.double
    )


def table_to_arrays(
    columns: Sequence[str], rows: Sequence[Sequence[Any]]
) -> Dict[str, np.ndarray]:
    """Converts a row table into a dict of column arrays (floats or byte strings)."""
    data = {}
    for i, name in enumerate(columns):
        values = [row[i] for row in rows]
        if any(isinstance(v, str) for v in values):
            values = [format_value(v) for v in values]
        data[name] = _column_array(values)
    return data


def set_h5_attrs(g, kwargs):
    """Adds data to HDF5 group `g` from dict `kwargs`."""
    for name, value in kwargs.items():
        if isinstance(value, dict):
            sub_g = g.create_group(name)
            set_h5_attrs(sub_g, value)
        else:
            if isinstance(value, np.ndarray):
                g.create_dataset(name, data=value)
            else:
                g.attrs[name] = value


def export_table(
    path: Optional[str],
    schema: str,
    columns: Sequence[str],
    rows: Sequence[Sequence[Any]],
    **meta: Any,
) -> None:
    """Writes a result table to ``path``.

    The format follows the file extension: .h5 (HDF5 via h5py), .mat (MATLAB via scipy),
    .pickle (dict of column arrays); anything else, or None for stdout, is CSV.

    Args:
        path: Output path, or None to print CSV to stdout.
        schema: Table schema name recorded in the header/attributes.
        columns: Column names.
        rows: Table rows.
        meta: Extra metadata (seed, precision, ...) recorded alongside the table.
    """
    if path is None:
        write_table(sys.stdout, schema, columns, rows, **meta)
        return
    if path.endswith(".h5"):
        data = {schema: table_to_arrays(columns, rows)}
        with h5py.File(path, "w") as df:
            set_h5_attrs(df, data)
            df[schema].attrs["schema"] = f"{schema}/v{SCHEMA_VERSION}"
            for key, value in meta.items():
                df[schema].attrs[key] = str(value)
    elif path.endswith(".mat"):
        data = table_to_arrays(columns, rows)
        data["meta"] = {key: str(value) for key, value in meta.items()}
        savemat(path, {schema.replace("-", "_"): data})
    elif path.endswith(".pickle"):
        data = table_to_arrays(columns, rows)
        with open(path, "wb") as f:
            pickle.dump({"schema": schema, "meta": meta, "data": data}, f)
    else:
        with open(path, "w", newline="") as f:
            write_table(f, schema, columns, rows, **meta)
    logger.info("Wrote %d rows of %s to %s", len(rows), schema, path)


def grid_vector(lo: Fraction, hi: Fraction, step: Fraction) -> List[Fraction]:
    """Exact rational points lo, lo + step, ... up to and including hi when reached."""
    step = Fraction(step)
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    count = int((Fraction(hi) - Fraction(lo)) / step)
    return [Fraction(lo) + i * step for i in range(count + 1)]


def make_grid(vectors: Sequence[Sequence[Fraction]]) -> List[Tuple[Fraction, ...]]:
    """Cartesian product of per-axis vectors, first axis slowest (``indexing="ij"``)."""
    return [tuple(point) for point in product(*vectors)]


def fit_line(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, np.ndarray]:
    """Returns ``(slope, offset, residuals)`` of the best-fit line ``slope * x + offset``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, offset = np.polyfit(x, y, 1)
    return float(slope), float(offset), y - (slope * x + offset)
