"""JSON report for a :class:`~drscert.classifier.Diagnosis`.

Keys are emitted in a fixed order and floats with ``repr`` precision, so
equal diagnoses give byte-identical reports. Non-finite numbers become
``null``; absent certificates are left out.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .classifier import Diagnosis

__all__ = ["report_dict", "write_report", "text_summary"]


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _vec(v):
    return [_num(t) for t in np.asarray(v, dtype=float).ravel()]


def _trace(out) -> dict:
    s = out.summary()
    return {
        "verdict": s["verdict"],
        "iters": s["iters"],
        "norm_z": _num(s["norm_z"]),
        "min_residual": _num(s["min_residual"]),
        "final_residual": _num(s["final_residual"]),
        "x_half_drift": _num(s["x_half_drift"]),
    }


def _repair(rep) -> dict:
    doc = {
        "kind": rep.kind.value,
        "interior_scale": _num(rep.interior_scale),
        "shift": _vec(rep.shift),
    }
    if rep.kind.value == "FeasibilityShift":
        doc["b"] = _vec(rep.problem.b)
    else:
        doc["c"] = _vec(rep.problem.c)
    return doc


def report_dict(diag: Diagnosis) -> dict:
    doc = {"cases": list(diag.cases), "certainty": diag.certainty.value}
    if diag.solution is not None:
        doc["solution"] = _vec(diag.solution)
    if diag.hyperplane is not None:
        doc["hyperplane"] = {"h": _vec(diag.hyperplane.h), "beta": _num(diag.hyperplane.beta)}
    if diag.direction is not None:
        doc["direction"] = _vec(diag.direction.u)
    if diag.farkas is not None:
        doc["farkas"] = _vec(diag.farkas.y)
    doc["repairs"] = [_repair(r) for r in diag.repairs]
    doc["diagnostics"] = {name: _trace(out) for name, out in sorted(diag.traces.items())}
    doc["verification"] = {
        name: {
            "passed": rep.passed,
            "checks": [{"name": c.name, "value": _num(c.value), "passed": c.passed} for c in rep.checks],
        }
        for name, rep in sorted(diag.verification.items())
    }
    doc["tests"] = {
        key: getattr(diag, key).value
        for key in ("feasibility", "primal", "boundedness")
        if getattr(diag, key) is not None
    }
    doc["notes"] = list(diag.notes)
    doc["params"] = diag.params_used.to_dict()
    return doc


def write_report(diag: Diagnosis) -> bytes:
    return (json.dumps(report_dict(diag), indent=1, allow_nan=False) + "\n").encode("utf-8")


def text_summary(diag: Diagnosis, name: str = "") -> str:
    head = f"{name}: " if name else ""
    lines = [f"{head}cases={{{diag.label}}} certainty={diag.certainty.value}"]
    for op, out in sorted(diag.traces.items()):
        s = out.summary()
        lines.append(
            f"  {op}: {s['verdict']:<26} iters={s['iters']:<7d} |z|={s['norm_z']:.3e} "
            f"min_res={s['min_residual']:.3e}"
        )
    if diag.solution is not None:
        lines.append("  solution: " + np.array2string(np.asarray(diag.solution), precision=6))
    if diag.hyperplane is not None:
        lines.append(
            "  hyperplane: h=" + np.array2string(diag.hyperplane.h, precision=6) + f" beta={diag.hyperplane.beta:.6g}"
        )
    if diag.direction is not None:
        lines.append("  direction: " + np.array2string(diag.direction.u, precision=6))
    for rep in diag.repairs:
        lines.append(f"  repair: {rep.kind.value} shift=" + np.array2string(rep.shift, precision=4))
    for name, rep in sorted(diag.verification.items()):
        lines.append(f"  verify {name}: {'pass' if rep.passed else 'FAIL'}")
    for note in diag.notes:
        lines.append(f"  note: {note}")
    return "\n".join(lines)
