import hashlib
import json
import os
import shutil
import tempfile
import unittest

import numpy as np

from fhptool.emit import (MANIFEST, SERIES, SUMMARY, Report, RunManifest, Table, checksum,
                          emit_results, format_value, preflight)
from fhptool.errors import EmissionError
from fhptool.load_config import load_config
from fhptool.runner import run_command


class TestFormatting(unittest.TestCase):
    def test_format_value(self):
        self.assertEqual(format_value(None), "")
        self.assertEqual(format_value(True), "true")
        self.assertEqual(format_value(np.bool_(False)), "false")
        self.assertEqual(format_value(np.int64(3)), "3")
        self.assertEqual(format_value(0.1), "0.10000000000000001")
        self.assertEqual(float(format_value(1.0 / 3.0)), 1.0 / 3.0)
        self.assertEqual(format_value("ProvenConvergent"), "ProvenConvergent")

    def test_table(self):
        table = Table(["k", "value"])
        table.add({"k": 1, "value": 0.5})
        table.add({"k": 2})
        self.assertEqual(table.render(), "k,value\n1,0.5\n2,\n")
        with self.assertRaises(ValueError):
            table.add({"j": 1})

    def test_summary_is_sorted_json(self):
        report = Report("filter")
        report.summary["b"] = np.float64(2.0)
        report.summary["a"] = np.arange(2)
        report.decisions["trace_qv"] = "ProvenConvergent"
        doc = json.loads(report.render_summary())
        self.assertEqual(doc["summary"], {"a": [0, 1], "b": 2.0})
        self.assertEqual(doc["command"], "filter")
        self.assertEqual(report.render_summary(), report.render_summary())


class TestFiles(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def test_checksum(self):
        self.assertEqual(checksum(b"abc"), "sha1$" + hashlib.sha1(b"abc").hexdigest())

    def test_emit_and_manifest(self):
        out = os.path.join(self.tmpdir, "nested", "out")
        preflight(out)
        report = Report("admissibility")
        report.table("checks", ["check"]).add({"check": "trace_qv"})
        report.add_series("qv", [1.0, 0.25])
        report.warn("something diverged")
        manifest = RunManifest(out, "admissibility", {"run": {"seed": 1}}, "fhptool 1.0")
        manifest.write()
        with open(os.path.join(out, MANIFEST)) as f:
            self.assertEqual(json.load(f)["status"], "running")
        files = emit_results(report, out)
        self.assertEqual([f["path"] for f in files], ["checks.csv", SERIES, SUMMARY])
        with open(os.path.join(out, SERIES)) as f:
            self.assertEqual(f.read(), "quantity,index,value\nqv,1,1\nqv,2,0.25\n")
        manifest.finalize("success", files, report)
        with open(os.path.join(out, MANIFEST)) as f:
            doc = json.load(f)
        self.assertEqual(doc["status"], "success")
        self.assertEqual(doc["warnings"], ["something diverged"])
        self.assertEqual(doc["files"][0]["size"], len("check\ntrace_qv\n"))
        self.assertIsNotNone(doc["finished"])

    def test_preflight_rejects_file(self):
        blocker = os.path.join(self.tmpdir, "blocker")
        with open(blocker, "w") as f:
            f.write("")
        with self.assertRaises(EmissionError):
            preflight(blocker)
        with self.assertRaises(EmissionError):
            preflight(os.path.join(blocker, "below"))

    def test_reemission_gives_identical_digests(self):
        cfg = load_config(None, env={}, overrides={("run", "command"): "filter"})
        listings = []
        for name in ("first", "second"):
            out = os.path.join(self.tmpdir, name)
            preflight(out)
            listings.append(emit_results(run_command(cfg), out))
            for entry in listings[-1]:
                with open(os.path.join(out, entry["path"]), "rb") as f:
                    self.assertEqual(checksum(f.read()), entry["checksum"])
        self.assertEqual(listings[0], listings[1])
        again = emit_results(run_command(cfg), os.path.join(self.tmpdir, "first"))
        self.assertEqual(again, listings[0])
