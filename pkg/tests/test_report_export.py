import json

import numpy as np
import pandas as pd
import pytest

from report_export import SCHEMA_VERSION, Report, ReportExporter, plain


@pytest.fixture
def report():
    table = pd.DataFrame({"check": ["a", "b"], "residual": [np.float64(1e-9), np.nan],
                          "passed": [np.bool_(True), np.bool_(False)]})
    return Report("identity-suite", {"alpha": np.float64(2.0), "n": np.int64(0),
                                     "phase": complex(0.5, -1.0), "bounds": {"A": 1.0, "B": 2.0}},
                  {"checks": table})


def test_plain_values():
    assert plain(np.float64(1.5)) == 1.5 and type(plain(np.float64(1.5))) is float
    assert plain(np.int32(3)) == 3 and type(plain(np.int32(3))) is int
    assert plain(np.bool_(True)) is True
    assert plain(complex(1.0, 2.0)) == {"re": 1.0, "im": 2.0}
    assert plain(complex(1.0, 0.0)) == 1.0
    assert plain(float("inf")) == "inf"
    assert plain(np.arange(3)) == [0, 1, 2]
    assert plain((1, (2.0, "x"))) == [1, [2.0, "x"]]


def test_json_payload(report):
    body = json.loads(ReportExporter(report).to_json())
    assert body["schema_version"] == SCHEMA_VERSION
    assert body["command"] == "identity-suite"
    assert body["phase"] == {"re": 0.5, "im": -1.0}
    assert body["checks"][0] == {"check": "a", "residual": 1e-9, "passed": True}
    assert body["checks"][1]["residual"] == "nan"


def test_canonical_json_is_stable(report):
    first = ReportExporter(report).to_json(canonical=True)
    again = json.dumps(json.loads(first), sort_keys=True, separators=(",", ":"),
                       ensure_ascii=False) + "\n"
    assert first == again
    assert "\n" not in first[:-1] and ": " not in first


def test_text_rendering(report):
    text = ReportExporter(report).render("text")
    assert text.startswith("hyperlattice identity-suite")
    assert "[checks]" in text
    assert "alpha" in text and "2" in text


def test_excel_export(report, tmp_path):
    path = tmp_path / "report.xlsx"
    ReportExporter(report).export_to_excel(str(path))
    sheets = pd.read_excel(path, sheet_name=None, engine="openpyxl")
    assert list(sheets) == ["Summary", "checks"]
    summary = sheets["Summary"]
    assert list(summary.columns) == ["Metric", "Value"]
    assert "alpha" in set(summary["Metric"])
    assert list(sheets["checks"]["check"]) == ["a", "b"]
