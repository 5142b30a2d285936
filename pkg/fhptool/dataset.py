"""CSV datasets.

coefficients  rows (index, value); index k >= 1 is the coefficient on e_k,
              indices 1-d0 .. 0 are the kernel coordinates in order
grid          rows (s, value) sampling a profile on [0, pi]
series        rows (t, value) of a classical time series

Indices (or s, t) must be strictly increasing. A first row that does not
parse as numbers is taken as a header. Row numbers in messages are 1-based
lines of the file.
"""

import csv
import logging
from typing import List, Optional, Text, Tuple, Union

import numpy as np
from schema_salad.exceptions import ValidationException

from .heat import analyze_grid
from .spectral import H1, HilbertElement

_logger = logging.getLogger("fhptool")

COEFFICIENTS = "coefficients"
GRID = "grid"
SERIES = "series"


def _read_rows(path):  # type: (Text) -> List[Tuple[int, float, float]]
    """(row number, first column, value) for every data row."""
    rows = []  # type: List[Tuple[int, float, float]]
    try:
        with open(path, newline="", encoding="utf-8") as f:
            for lineno, record in enumerate(csv.reader(f), start=1):
                if not record or all(not field.strip() for field in record):
                    continue
                if len(record) != 2:
                    raise ValidationException(u"%s: row %d: expected 2 columns, got %d"
                                              % (path, lineno, len(record)))
                try:
                    key, value = float(record[0]), float(record[1])
                except ValueError:
                    if not rows and lineno == 1:
                        continue
                    raise ValidationException(u"%s: row %d: not a number: %s"
                                              % (path, lineno, ",".join(record)))
                if not (np.isfinite(key) and np.isfinite(value)):
                    raise ValidationException(u"%s: row %d: value is not finite"
                                              % (path, lineno))
                if rows and key <= rows[-1][1]:
                    raise ValidationException(u"%s: row %d: %r does not increase on %r"
                                              % (path, lineno, key, rows[-1][1]))
                rows.append((lineno, key, value))
    except UnicodeDecodeError as e:
        raise ValidationException(u"%s: not valid UTF-8 text (%s)" % (path, e.reason))
    except IOError as e:
        raise ValidationException(u"%s: %s" % (path, e.strerror or e))
    _logger.debug(u"read %d rows from %s", len(rows), path)
    return rows


def read_coefficients(path, truncation=None, kernel_dim=None):
    # type: (Text, Optional[int], Optional[int]) -> HilbertElement
    rows = _read_rows(path)
    for lineno, index, _ in rows:
        if index != int(index):
            raise ValidationException(u"%s: row %d: index %r is not an integer"
                                      % (path, lineno, index))
    kernel_rows = [(lineno, int(i), v) for lineno, i, v in rows if i <= 0]
    span_rows = [(lineno, int(i), v) for lineno, i, v in rows if i > 0]

    d0 = kernel_dim if kernel_dim is not None else (
        1 - kernel_rows[0][1] if kernel_rows else 0)
    n = truncation if truncation is not None else (span_rows[-1][1] if span_rows else 0)
    if n < 1:
        raise ValidationException(u"%s: no span coefficients" % path)

    kernel = np.zeros(d0)
    for lineno, index, value in kernel_rows:
        if index < 1 - d0:
            raise ValidationException(u"%s: row %d: kernel index %d outside %d..0"
                                      % (path, lineno, index, 1 - d0))
        kernel[index + d0 - 1] = value
    span = np.zeros(n)
    for lineno, index, value in span_rows:
        if index > n:
            raise ValidationException(u"%s: row %d: index %d exceeds truncation N=%d"
                                      % (path, lineno, index, n))
        span[index - 1] = value
    return HilbertElement(span, kernel, H1)


def read_grid(path, truncation):  # type: (Text, int) -> HilbertElement
    rows = _read_rows(path)
    for lineno, s, _ in rows:
        if not 0.0 <= s <= np.pi:
            raise ValidationException(u"%s: row %d: grid point %r outside [0, pi]"
                                      % (path, lineno, s))
    if len(rows) < 2:
        raise ValidationException(u"%s: a grid needs at least 2 points" % path)
    s = np.array([r[1] for r in rows])
    values = np.array([r[2] for r in rows])
    return analyze_grid(s, values, truncation)


def read_series(path):  # type: (Text) -> Tuple[np.ndarray, np.ndarray]
    rows = _read_rows(path)
    if len(rows) < 3:
        raise ValidationException(u"%s: a series needs at least 3 rows" % path)
    return np.array([r[1] for r in rows]), np.array([r[2] for r in rows])


def ingest_dataset(path, fmt, truncation=None, kernel_dim=None):
    # type: (Text, Text, Optional[int], Optional[int]) -> Union[HilbertElement, Tuple[np.ndarray, np.ndarray]]
    if fmt == COEFFICIENTS:
        return read_coefficients(path, truncation, kernel_dim)
    if fmt == GRID:
        if truncation is None:
            raise ValidationException(u"grid datasets need a truncation")
        return read_grid(path, truncation)
    if fmt == SERIES:
        return read_series(path)
    raise ValidationException(u"unknown dataset format '%s'" % fmt)
