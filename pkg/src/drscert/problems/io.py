"""JSON problem documents.

Layout::

    {"name": str,
     "A": [[float, ...], ...], "b": [float, ...], "c": [float, ...],
     "cones": [{"type": "nonneg" | "soc" | "rsoc" | "psd" | "zero" | "free", "dim": int}, ...],
     "ground_truth": "a" ... "g"        # optional}

``psd`` blocks give the matrix side in ``dim`` and take ``dim (dim + 1) / 2``
coordinates in scaled vectorized form.
"""

from __future__ import annotations

import json
import math

import numpy as np

from ..cones import KINDS, ConeBlock, ConeSpec
from .core import CASES, ConicProblem

__all__ = ["ProblemFormatError", "read_problem", "write_problem", "problem_to_dict", "problem_from_dict"]


class ProblemFormatError(ValueError):
    """A problem document does not match the schema."""

    def __init__(self, field: str, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}field {field!r}: {message}")
        self.field = field
        self.line = line


def _number_list(value, field):
    if not isinstance(value, list):
        raise ProblemFormatError(field, f"expected a list of numbers, got {type(value).__name__}")
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ProblemFormatError(f"{field}[{i}]", f"expected a finite number, got {v!r}")
        out.append(float(v))
    return out


def problem_from_dict(doc: dict) -> ConicProblem:
    if not isinstance(doc, dict):
        raise ProblemFormatError("<root>", "expected a JSON object")
    for key in ("A", "b", "c", "cones"):
        if key not in doc:
            raise ProblemFormatError(key, "missing required field")
    unknown = set(doc) - {"name", "A", "b", "c", "cones", "ground_truth"}
    if unknown:
        raise ProblemFormatError(sorted(unknown)[0], "unknown field")

    name = doc.get("name", "")
    if not isinstance(name, str):
        raise ProblemFormatError("name", "expected a string")

    if not isinstance(doc["A"], list) or not doc["A"]:
        raise ProblemFormatError("A", "expected a nonempty list of rows")
    rows = [_number_list(row, f"A[{i}]") for i, row in enumerate(doc["A"])]
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ProblemFormatError(f"A[{i}]", f"row has {len(row)} entries, row 0 has {width}")
    b = _number_list(doc["b"], "b")
    c = _number_list(doc["c"], "c")
    if len(b) != len(rows):
        raise ProblemFormatError("b", f"has {len(b)} entries but A has {len(rows)} rows")
    if len(c) != width:
        raise ProblemFormatError("c", f"has {len(c)} entries but A has {width} columns")

    cones = doc["cones"]
    if not isinstance(cones, list) or not cones:
        raise ProblemFormatError("cones", "expected a nonempty list of blocks")
    blocks = []
    for i, blk in enumerate(cones):
        field = f"cones[{i}]"
        if not isinstance(blk, dict) or set(blk) != {"type", "dim"}:
            raise ProblemFormatError(field, 'expected an object with keys "type" and "dim"')
        if blk["type"] not in KINDS:
            raise ProblemFormatError(f"{field}.type", f"unknown cone type {blk['type']!r}")
        dim = blk["dim"]
        if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
            raise ProblemFormatError(f"{field}.dim", f"expected a positive integer, got {dim!r}")
        try:
            blocks.append(ConeBlock(blk["type"], dim))
        except ValueError as exc:
            raise ProblemFormatError(f"{field}.dim", str(exc)) from None
    cone = ConeSpec(blocks)
    if cone.total_dim != width:
        raise ProblemFormatError(
            "cones", f"blocks cover {cone.total_dim} coordinates but A has {width} columns"
        )

    truth = doc.get("ground_truth")
    if truth is not None and truth not in CASES:
        raise ProblemFormatError("ground_truth", f"expected one of {CASES}, got {truth!r}")
    return ConicProblem(A=np.array(rows), b=b, c=c, cone=cone, name=name, ground_truth=truth)


def read_problem(data: bytes | str) -> ConicProblem:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError("<document>", exc.msg, line=exc.lineno) from None
    return problem_from_dict(doc)


def problem_to_dict(problem: ConicProblem) -> dict:
    doc = {
        "name": problem.name,
        "A": problem.A.tolist(),
        "b": problem.b.tolist(),
        "c": problem.c.tolist(),
        "cones": [{"type": blk.kind, "dim": blk.size} for blk in problem.cone.blocks],
    }
    if problem.ground_truth is not None:
        doc["ground_truth"] = problem.ground_truth
    return doc


def write_problem(problem: ConicProblem) -> bytes:
    return (json.dumps(problem_to_dict(problem), indent=1) + "\n").encode("utf-8")
