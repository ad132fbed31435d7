"""Report persistence (JSON behind a ``#`` comment header) and CSV output."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ParseError
from .experiments import StabilityReport
from .solver import REPORT_VERSION, RunReport

__all__ = ["config_hash", "header_lines", "save_report", "load_report", "write_csv", "read_csv"]

_KINDS = {"run": RunReport, "stability": StabilityReport}


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def header_lines(cfg_hash: str | None = None, extra=()) -> list:
    lines = [f"# vascnet {__version__}", f"# config-sha256: {cfg_hash or 'none'}"]
    lines += [f"# {e}" for e in extra]
    return lines


def save_report(report, path, cfg_hash: str | None = None):
    """Write a :class:`RunReport` or :class:`StabilityReport`.

    Floats are written with ``repr`` precision, so a reload compares equal.
    """
    kind = "run" if isinstance(report, RunReport) else "stability"
    if not isinstance(report, _KINDS[kind]):
        raise TypeError(f"cannot save {type(report).__name__}")
    doc = {"format": "vascnet-report", "version": REPORT_VERSION, "kind": kind,
           "report": report.to_dict()}
    body = json.dumps(doc, indent=1, sort_keys=True)
    text = "\n".join(header_lines(cfg_hash)) + "\n" + body + "\n"
    Path(path).write_text(text, encoding="utf-8")


def load_report(path):
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    skip = 0
    while skip < len(lines) and lines[skip].startswith("#"):
        skip += 1
    body = "\n".join(lines[skip:])
    try:
        doc = json.loads(body)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed report: {exc.msg}", line=exc.lineno + skip) from None
    if not isinstance(doc, dict) or doc.get("format") != "vascnet-report":
        raise ParseError("not a vascnet report", line=skip + 1)
    version = doc.get("version")
    if not isinstance(version, int) or version > REPORT_VERSION or version < 1:
        raise ParseError(f"unsupported report version {version!r} "
                         f"(this build reads up to version {REPORT_VERSION})", line=skip + 1)
    kind = doc.get("kind")
    if kind not in _KINDS:
        raise ParseError(f"unknown report kind {kind!r}", line=skip + 1)
    try:
        return _KINDS[kind].from_dict(doc["report"])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"report is missing field {exc}", line=skip + 1) from None


def write_csv(path, columns: dict, header=()):
    """Write equal-length columns; ``header`` lines are prefixed with ``#``."""
    names = list(columns)
    arrs = [np.asarray(columns[k], dtype=float) for k in names]
    n = len(arrs[0])
    if any(len(a) != n for a in arrs):
        raise ValueError("columns differ in length")
    out = list(header)
    out.append(",".join(names))
    for i in range(n):
        out.append(",".join(repr(float(a[i])) for a in arrs))
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def read_csv(path) -> dict:
    """Inverse of :func:`write_csv` (comment lines are skipped)."""
    rows = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines()
            if ln and not ln.startswith("#")]
    names = rows[0].split(",")
    data = np.array([[float(v) for v in r.split(",")] for r in rows[1:]]).reshape(-1, len(names))
    return {k: data[:, j] for j, k in enumerate(names)}
