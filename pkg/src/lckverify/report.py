"""Deterministic serialization of suite and integral reports (json, csv, text)."""

from __future__ import annotations

import csv
import io
import json

__all__ = ["FORMATS", "render", "render_suite", "render_integrals", "integral_report"]

FORMATS = ("json", "csv", "text")

CSV_FIELDS = ("id", "paper_anchor", "max_residual", "mean_residual", "tolerance", "pass", "witness",
              "expected_failure", "note")


def _json(obj):
    # insertion order is the schema order; floats go through repr, which is exact and stable
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=True) + "\n"


def _rows(checks, expected):
    for c in checks:
        yield {
            "id": c["id"],
            "paper_anchor": c.get("paper_anchor", ""),
            "max_residual": repr(c["max_residual"]),
            "mean_residual": repr(c["mean_residual"]),
            "tolerance": repr(c["tolerance"]),
            "pass": str(c["pass"]).lower(),
            "witness": " ".join(repr(x) for x in c["witness"]),
            "expected_failure": str(c["id"] in expected).lower(),
            "note": c.get("note", ""),
        }


def _csv(checks, expected):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in _rows(checks, expected):
        w.writerow(row)
    return buf.getvalue()


def _text(header, checks, expected, skipped, overall):
    lines = [header]
    width = max([len(c["id"]) for c in checks] + [8])
    for c in checks:
        status = "pass" if c["pass"] else "FAIL"
        if c["id"] in expected:
            status += " (expected failure)" if not c["pass"] else " (UNEXPECTED PASS)"
        lines.append(f"  {c['id']:<{width}}  max {c['max_residual']:.3e}  tol {c['tolerance']:.1e}  {status}")
    for s in skipped:
        lines.append(f"  {s['id']:<{width}}  skipped: {s['reason']}")
    lines.append(f"overall: {'PASS' if overall else 'FAIL'}")
    return "\n".join(lines) + "\n"


def render_suite(report, fmt="json"):
    d = report.to_dict()
    if fmt == "json":
        return _json(d)
    expected = set(d["expected_failures"])
    if fmt == "csv":
        return _csv(d["checks"], expected)
    if fmt == "text":
        m = d["model"]
        params = " ".join(f"{k}={v}" for k, v in m.items())
        header = f"suite {params} engine={d['engine']} samples={d['samples']} seed={d['seed']}"
        return _text(header, d["checks"], expected, d["skipped"], d["overall_pass"])
    raise ValueError(f"unknown format {fmt!r}")


def integral_report(model, grid, engine, verdicts):
    return {
        "model": model,
        "grid": {"n_r": grid.n_r, "n_ang": grid.n_ang, "radial": grid.radial},
        "engine": engine,
        "checks": [v.as_dict() for v in verdicts],
        "overall_pass": all(v.passed for v in verdicts),
    }


def render_integrals(rep, fmt="json"):
    if fmt == "json":
        return _json(rep)
    if fmt == "csv":
        return _csv(rep["checks"], set())
    if fmt == "text":
        g = rep["grid"]
        params = " ".join(f"{k}={v}" for k, v in rep["model"].items())
        header = f"integrals {params} grid=({g['n_r']}, {g['n_ang']}^3) engine={rep['engine']}"
        return _text(header, rep["checks"], set(), [], rep["overall_pass"])
    raise ValueError(f"unknown format {fmt!r}")


def render(obj, fmt="json"):
    if isinstance(obj, dict):
        return render_integrals(obj, fmt)
    return render_suite(obj, fmt)
