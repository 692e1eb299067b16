"""Per-method metric table with a fixed column layout."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

COLUMNS = ("SNR", "MOS", "L1_F0", "PCC_F0", "CER", "Emo", "EER")
ABSENT = "-"


@dataclass
class ReportRow:
    method: str
    metrics: dict[str, float | None] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    n_utterances: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        unknown = set(self.metrics) - set(COLUMNS)
        if unknown:
            raise ValueError(f"unknown report column(s): {sorted(unknown)}")
        self.metrics = {c: self.metrics.get(c) for c in COLUMNS}
        self.counts = {c: int(self.counts.get(c, 0)) for c in COLUMNS}

    def cell(self, column: str) -> str:
        v = self.metrics[column]
        return ABSENT if v is None else f"{v:.3f}"

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "metrics": self.metrics,
            "counts": self.counts,
            "n_utterances": self.n_utterances,
            "failures": [list(f) for f in self.failures],
        }

    @classmethod
    def from_dict(cls, d: dict) -> ReportRow:
        return cls(d["method"], dict(d.get("metrics", {})), dict(d.get("counts", {})),
                   int(d.get("n_utterances", 0)), [tuple(f) for f in d.get("failures", [])])


@dataclass
class EvaluationReport:
    rows: list[ReportRow] = field(default_factory=list)

    def row(self, method: str) -> ReportRow:
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)

    def to_json(self) -> str:
        return json.dumps({"columns": list(COLUMNS), "rows": [r.to_dict() for r in self.rows]},
                          indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> EvaluationReport:
        d = json.loads(text)
        return cls([ReportRow.from_dict(r) for r in d.get("rows", [])])


def render_csv(report: EvaluationReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("method",) + COLUMNS)
    for r in report.rows:
        w.writerow([r.method] + [r.cell(c) for c in COLUMNS])
    return buf.getvalue()


def render_markdown(report: EvaluationReport) -> str:
    lines = [
        "| method | " + " | ".join(COLUMNS) + " |",
        "|---|" + "---:|" * len(COLUMNS),
    ]
    for r in report.rows:
        lines.append(f"| {r.method} | " + " | ".join(r.cell(c) for c in COLUMNS) + " |")
    if report.rows:
        lines += ["", "Utterances contributing to each column (EER: trials).", ""]
        lines.append("| method | utterances | failed | " + " | ".join(COLUMNS) + " |")
        lines.append("|---|---:|---:|" + "---:|" * len(COLUMNS))
        for r in report.rows:
            lines.append(
                f"| {r.method} | {r.n_utterances} | {len(r.failures)} | "
                + " | ".join(str(r.counts[c]) for c in COLUMNS) + " |"
            )
        failed = [(r.method, uid, msg) for r in report.rows for uid, msg in r.failures]
        if failed:
            lines += ["", "Failures:", ""]
            lines += [f"- {m} / {uid}: {msg}" for m, uid, msg in failed]
    return "\n".join(lines) + "\n"


def emit_report(report: EvaluationReport, path, format: str = "markdown") -> Path:
    """Write ``report`` as ``markdown`` or ``csv``; returns the path written."""
    if format == "csv":
        text = render_csv(report)
    elif format == "markdown":
        text = render_markdown(report)
    else:
        raise ValueError(f"unknown report format {format!r}")
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path
