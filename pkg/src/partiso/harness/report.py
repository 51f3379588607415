"""JSON / CSV report emission.

Output is a pure function of its inputs: keys are sorted, floats use
``repr`` formatting, and wall-clock timings are never written.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path

from ..errors import ConfigError, IoError
from .scaling import ScalingTable
from .suites import TrialReport

SCHEMA_VERSION = "1.0"

SUITE_CSV_FIELDS = (
    "suite",
    "passes",
    "failures",
    "skipped",
    "worst_residual",
    "check",
    "threshold",
    "max_residual",
    "mean_residual",
)
SCALING_CSV_FIELDS = ("p", "n", "probe", "defect", "commutator_defect")


def _num(x):
    """JSON-safe number: non-finite values become null / 'inf' strings."""
    if isinstance(x, float):
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
    return x


def suite_to_dict(r: TrialReport) -> dict:
    return {
        "name": r.suite_name,
        "trials": r.trials,
        "passes": r.passes,
        "failures": r.failures,
        "skipped": r.skipped,
        "skip_reasons": r.skip_reasons,
        "worst_residual": _num(r.worst_residual),
        "checks": [
            {
                "name": c.name,
                "threshold": _num(c.threshold),
                "max_residual": _num(c.max_residual),
                "mean_residual": _num(c.mean_residual),
                "passes": c.passes,
                "failures": c.failures,
            }
            for c in r.checks
        ],
    }


def scaling_to_dict(t: ScalingTable) -> dict:
    return {
        "p": _num(float(t.p)),
        "seed": t.seed,
        "rows": [{k: _num(v) for k, v in row.items()} for row in t.rows],
        "classification": t.classification,
        "closed_form_residuals": {k: _num(v) for k, v in t.closed_form_residuals.items()},
    }


def render(reports, fmt: str = "json", config: dict | None = None) -> str:
    suites = [r for r in reports if isinstance(r, TrialReport)]
    tables = [r for r in reports if isinstance(r, ScalingTable)]
    if len(suites) + len(tables) != len(reports):
        raise TypeError("reports must be TrialReport or ScalingTable instances")
    if fmt == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "config": config or {},
            "suites": [suite_to_dict(r) for r in suites],
        }
        if tables:
            doc["scaling"] = [scaling_to_dict(t) for t in tables]
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        if tables and not suites:
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(SCALING_CSV_FIELDS)
            for t in tables:
                for row in t.rows:
                    writer.writerow([_num(float(t.p)), row["n"], row["probe"], repr(row["defect"]), repr(row["commutator_defect"])])
            return buf.getvalue()
        if tables:
            raise ConfigError("CSV output cannot mix suite reports and scaling tables")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SUITE_CSV_FIELDS)
        for r in suites:
            for c in r.checks:
                writer.writerow(
                    [r.suite_name, r.passes, r.failures, r.skipped, repr(r.worst_residual), c.name, repr(c.threshold), repr(c.max_residual), repr(c.mean_residual)]
                )
        return buf.getvalue()
    raise ConfigError(f"unknown format {fmt!r}")


def emit_report(reports, fmt: str = "json", path=None, config: dict | None = None) -> None:
    """Write ``reports`` to ``path`` (``None`` or ``"-"`` for stdout)."""
    text = render(list(reports), fmt, config)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise IoError(f"cannot write report to {path}: {exc}") from exc
