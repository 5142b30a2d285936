"""Result emission: CSV tables, a JSON summary, a long-format series file and
the run manifest.

Everything except the manifest is a pure function of the report, so equal
reports give byte-identical files. The manifest carries timestamps and the
sha1 checksum of every other file.
"""

import csv
import datetime
import hashlib
import io
import json
import logging
import os
import tempfile
from collections import OrderedDict
from typing import Any, Dict, Iterable, List, Optional, Sequence, Text

import numpy as np

from .errors import EmissionError

_logger = logging.getLogger("fhptool")

SUMMARY = "summary.json"
SERIES = "series.csv"
MANIFEST = "manifest.json"


def format_value(value):  # type: (Any) -> Text
    """17 significant digits, so every float64 survives a CSV round trip."""
    if value is None:
        return u""
    if isinstance(value, (bool, np.bool_)):
        return u"true" if value else u"false"
    if isinstance(value, (int, np.integer)):
        return u"%d" % value
    if isinstance(value, (float, np.floating)):
        return u"%.17g" % value
    return u"%s" % value


def jsonable(value):  # type: (Any) -> Any
    if isinstance(value, dict):
        return dict((str(k), jsonable(v)) for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


class Table(object):
    def __init__(self, columns):  # type: (Sequence[Text]) -> None
        self.columns = list(columns)
        self.rows = []  # type: List[Dict[Text, Any]]

    def add(self, row):  # type: (Dict[Text, Any]) -> None
        unknown = set(row) - set(self.columns)
        if unknown:
            raise ValueError(u"unknown columns %s" % sorted(unknown))
        self.rows.append(row)

    def extend(self, rows):  # type: (Iterable[Dict[Text, Any]]) -> None
        for row in rows:
            self.add(row)

    def render(self):  # type: () -> Text
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_value(row.get(c)) for c in self.columns])
        return out.getvalue()


class Report(object):
    """Everything a command produces: named tables, a summary mapping,
    coefficient-indexed series and the admissibility decisions."""

    def __init__(self, command):  # type: (Text) -> None
        self.command = command
        self.tables = OrderedDict()  # type: OrderedDict[Text, Table]
        self.summary = OrderedDict()  # type: OrderedDict[Text, Any]
        self.series = Table(["quantity", "index", "value"])
        self.decisions = {}  # type: Dict[Text, Any]
        self.warnings = []  # type: List[Text]

    def table(self, name, columns):  # type: (Text, Sequence[Text]) -> Table
        if name not in self.tables:
            self.tables[name] = Table(columns)
        return self.tables[name]

    def add_series(self, quantity, values, start=1):
        # type: (Text, Iterable[float], int) -> None
        for i, value in enumerate(values, start=start):
            self.series.add({"quantity": quantity, "index": i, "value": float(value)})

    def warn(self, message):  # type: (Text) -> None
        _logger.warning(message)
        self.warnings.append(message)

    def render_summary(self):  # type: () -> Text
        doc = {"command": self.command,
               "summary": jsonable(self.summary),
               "decisions": jsonable(self.decisions),
               "warnings": list(self.warnings)}
        return json.dumps(doc, indent=4, sort_keys=True) + "\n"


def checksum(data):  # type: (bytes) -> Text
    return "sha1$%s" % hashlib.sha1(data).hexdigest()


def preflight(output_dir):  # type: (Text) -> None
    """Make sure output_dir exists and is writable before anything runs."""
    try:
        if not os.path.isdir(output_dir):
            os.makedirs(output_dir)
        with tempfile.TemporaryFile(dir=output_dir):
            pass
    except (IOError, OSError) as e:
        raise EmissionError(u"cannot write to output directory '%s': %s"
                            % (output_dir, e.strerror or e))


def _write(output_dir, name, text):  # type: (Text, Text, Text) -> Dict[Text, Any]
    data = text.encode("utf-8")
    path = os.path.join(output_dir, name)
    try:
        with open(path, "wb") as f:
            f.write(data)
    except (IOError, OSError) as e:
        raise EmissionError(u"cannot write '%s': %s" % (path, e.strerror or e))
    _logger.debug(u"wrote %s (%d bytes)", path, len(data))
    return {"path": name, "checksum": checksum(data), "size": len(data)}


def _now():  # type: () -> Text
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


class RunManifest(object):
    """manifest.json: written when a run starts, finalized when it ends."""

    def __init__(self, output_dir, command, config, version):
        # type: (Text, Text, Dict[Text, Any], Text) -> None
        self.output_dir = output_dir
        self.doc = OrderedDict([
            ("version", version),
            ("command", command),
            ("status", "running"),
            ("started", _now()),
            ("finished", None),
            ("config", jsonable(config)),
            ("decisions", {}),
            ("warnings", []),
            ("files", []),
        ])  # type: OrderedDict[Text, Any]

    def write(self):  # type: () -> None
        text = json.dumps(self.doc, indent=4) + "\n"
        path = os.path.join(self.output_dir, MANIFEST)
        try:
            with open(path, "w") as f:
                f.write(text)
        except (IOError, OSError) as e:
            raise EmissionError(u"cannot write '%s': %s" % (path, e.strerror or e))

    def finalize(self, status, files=None, report=None):
        # type: (Text, Optional[List[Dict[Text, Any]]], Optional[Report]) -> None
        self.doc["status"] = status
        self.doc["finished"] = _now()
        if files is not None:
            self.doc["files"] = files
        if report is not None:
            self.doc["decisions"] = jsonable(report.decisions)
            self.doc["warnings"] = list(report.warnings)
        self.write()


def emit_results(report, output_dir):
    # type: (Report, Text) -> List[Dict[Text, Any]]
    """Write one CSV per table, the summary and the series; return the file
    listing with checksums, in write order."""
    files = []
    for name, table in report.tables.items():
        files.append(_write(output_dir, u"%s.csv" % name, table.render()))
    files.append(_write(output_dir, SERIES, report.series.render()))
    files.append(_write(output_dir, SUMMARY, report.render_summary()))
    return files
