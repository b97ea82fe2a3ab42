"""
report_export.py

Reports produced by the hyperlattice commands and their three renderings:
plain text, JSON (schema_version 1; canonical mode sorts keys and drops
whitespace so identical runs give identical bytes) and an Excel workbook with a
Summary sheet plus one sheet per table.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

# ─── CONFIG ────────────────────────────────────────────────────────────────────
SCHEMA_VERSION = 1
SHEET_NAME_MAX = 31


@dataclass
class Report:
    command: str
    values: Dict[str, object] = field(default_factory=dict)
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    failed: bool = False

    def payload(self):
        body = {"schema_version": SCHEMA_VERSION, "command": self.command}
        body.update({k: plain(v) for k, v in self.values.items()})
        for name, frame in self.tables.items():
            body[name] = plain(frame.to_dict(orient="records"))
        return body


def plain(value):
    """JSON-ready copy: numpy scalars unwrapped, complex as {re, im}, non-finite as strings."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        value = complex(value)
        if value.imag == 0.0:
            return plain(value.real)
        return {"re": plain(value.real), "im": plain(value.imag)}
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    return value


class ReportExporter:
    def __init__(self, report):
        self.report = report

    def to_json(self, canonical=False):
        if canonical:
            return json.dumps(self.report.payload(), sort_keys=True, separators=(",", ":"),
                              ensure_ascii=False) + "\n"
        return json.dumps(self.report.payload(), indent=2, ensure_ascii=False) + "\n"

    def to_text(self):
        lines = [f"hyperlattice {self.report.command}", ""]
        width = max((len(k) for k in self.report.values), default=0)
        for key, value in self.report.values.items():
            lines.append(f"  {key.ljust(width)} : {_text_value(value)}")
        for name, frame in self.report.tables.items():
            lines += ["", f"[{name}]", frame.to_string(index=False) if not frame.empty else "(empty)"]
        return "\n".join(lines) + "\n"

    def export_to_excel(self, filename):
        """Summary sheet of scalar values plus one worksheet per table."""
        summary = pd.DataFrame({
            "Metric": ["command", "schema_version"] + list(self.report.values),
            "Value": [self.report.command, SCHEMA_VERSION]
                     + [_text_value(v) for v in self.report.values.values()],
        })
        with pd.ExcelWriter(filename, engine="openpyxl") as writer:
            summary.to_excel(writer, sheet_name="Summary", index=False)
            for name, frame in self.report.tables.items():
                frame.to_excel(writer, sheet_name=name[:SHEET_NAME_MAX], index=False)
        logger.info("Report exported to %s (%d tables)", filename, len(self.report.tables))
        return filename

    def render(self, fmt, canonical=False):
        if fmt == "json":
            return self.to_json(canonical)
        return self.to_text()


def _text_value(value):
    value = plain(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True)
    return str(value)
