"""Report container and its CSV / JSON serializations.

CSV output has a mandatory header whose column order is fixed per report
kind; floats are written with 17 significant digits. JSON output keeps the
insertion order of every mapping and round-trips exactly.
"""
import csv
import io
import json
import sys
from dataclasses import dataclass, field

from ..exceptions import ConfigurationError, ReportIOError

SCHEMA = "hbsmimo.report/1"

RECORD_COLUMNS = (
    "label", "scheme", "M", "K", "L", "L_h", "n_rf", "g1", "g2", "xi", "snr_db",
    "bits", "bits_overridden", "trials", "skipped_trials", "seed", "support", "rho",
    "gamma_lin", "gamma_db", "rate_perfect", "rate_quantized", "rate_quantized_std",
    "delta_r", "delta_r_stderr", "bound", "qe_expected", "qe_measured", "qe_support",
    "captured_g1", "captured_g2", "max_user_excess", "reference",
)

COLUMNS = {
    "run": RECORD_COLUMNS,
    "table1": RECORD_COLUMNS,
    "sweep": ("snr_db", "scheme", "rate", "rate_std"),
    "qe": ("L", "N", "E_closed", "E_numeric", "bound_caseI", "bound_caseII"),
}


@dataclass
class RateReport:
    """Records of one CLI verb plus free-form metadata.

    ``meta["wall_clock_s"]`` is the only field allowed to differ between two
    runs of the same configuration and seed; it never appears in CSV output.
    """

    kind: str
    records: list
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in COLUMNS:
            raise ConfigurationError(f"unknown report kind {self.kind!r}")

    @property
    def columns(self):
        return COLUMNS[self.kind]

    def to_dict(self):
        return {"schema": SCHEMA, "kind": self.kind, "meta": self.meta,
                "records": self.records}

    @classmethod
    def from_dict(cls, d):
        if d.get("schema") != SCHEMA:
            raise ConfigurationError(f"unsupported report schema {d.get('schema')!r}")
        return cls(d["kind"], d["records"], d.get("meta", {}))


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def to_csv_text(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(report.columns)
    for rec in report.records:
        w.writerow([_cell(rec.get(c)) for c in report.columns])
    return buf.getvalue()


def to_json_text(report):
    return json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n"


def from_json_text(text):
    return RateReport.from_dict(json.loads(text))


def emit_report(report, path, fmt="csv"):
    """Write ``report`` to ``path`` (``"-"`` or ``None`` for stdout).

    Raises
    ------
    ReportIOError
        If the file cannot be written; the message names the path.
    """
    if fmt == "csv":
        text = to_csv_text(report)
    elif fmt == "json":
        text = to_json_text(report)
    else:
        raise ConfigurationError(f"format must be 'csv' or 'json', got {fmt!r}")
    if path in (None, "-"):
        sys.stdout.write(text)
        return text
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportIOError(f"cannot write report to {path}: {exc}") from exc
    return text
