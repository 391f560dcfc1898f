"""CSV emission: header row, LF endings, floats with 17 significant digits."""

import csv
from fractions import Fraction
import io
import os

import numpy as np


def format_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating, Fraction)):
        return "%.17g" % float(v)
    if isinstance(v, (complex, np.complexfloating)):
        raise TypeError("split complex values into re/im columns")
    return str(v)


def render(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError("row length does not match header")
        w.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    text = render(header, rows)
    d = os.path.dirname(os.fspath(path))
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
