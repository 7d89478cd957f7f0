"""The worked examples of the seven-case taxonomy, one instance per case.

Ids ``b_sdp`` and ``b_counter`` are extra case-(b) instances: a 3x3 SDP
whose dual optimum (-2) sits strictly below the primal optimum (0), and a
second order cone program whose primal iterates do not converge even though
a solution set ``{(0, t, t)}`` exists.
"""

from __future__ import annotations

import numpy as np

from ..cones import ConeSpec, svec
from .core import ConicProblem

__all__ = ["GALLERY_IDS", "canonical_example", "gallery"]

GALLERY_IDS = ("a", "b", "b_sdp", "b_counter", "c", "d", "e", "f", "g")


def _sym(i, j, n=3):
    M = np.zeros((n, n))
    M[i, j] += 0.5
    M[j, i] += 0.5
    return M


def _soc(A, b, c, name, truth):
    return ConicProblem(A=A, b=b, c=c, cone=ConeSpec.single("soc", 3), name=name, ground_truth=truth)


def _rsoc(A, b, c, name, truth):
    return ConicProblem(A=A, b=b, c=c, cone=ConeSpec.single("rsoc", 3), name=name, ground_truth=truth)


def canonical_example(case_id: str) -> ConicProblem:
    """Return the worked example for ``case_id`` (see :data:`GALLERY_IDS`)."""
    if case_id == "a":
        # min x3  s.t.  x1 = 1,  x3 >= ||(x1, x2)||;  x* = (1, 0, 1), p* = 1
        return _soc([[1, 0, 0]], [1], [0, 0, 1], "a", "a")
    if case_id == "b":
        # min x2  s.t.  x1 = x3 = 1;  x* = (1, 0, 1), p* = 0, dual optimum unattained
        return _soc([[1, 0, 0], [0, 0, 1]], [1, 1], [0, 1, 0], "b", "b")
    if case_id == "b_sdp":
        # min 2 X12  s.t.  X22 = 0,  X33 = X12 + 1,  X psd  (1-based entries)
        A = [svec(_sym(1, 1)), svec(_sym(2, 2) - _sym(0, 1))]
        return ConicProblem(
            A=A, b=[0, 1], c=svec(2 * _sym(0, 1)), cone=ConeSpec.single("psd", 3), name="b_sdp", ground_truth="b"
        )
    if case_id == "b_counter":
        # min x1  s.t.  x2 - x3 = 0;  solutions {(0, t, t)}, dual infeasible
        return _soc([[0, 1, -1]], [0], [1, 0, 0], "b_counter", "b")
    if case_id == "c":
        # min x3  s.t.  x1 = sqrt(2),  2 x2 x3 >= x1^2;  p* = 0 unattained
        return _rsoc([[1, 0, 0]], [np.sqrt(2.0)], [0, 0, 1], "c", "c")
    if case_id == "d":
        # min x1  s.t.  x2 = 0;  improving direction (-1, 0, 1)
        return _soc([[0, 1, 0]], [0], [1, 0, 0], "d", "d")
    if case_id == "e":
        # min x1  s.t.  x2 = 1,  2 x2 x3 >= x1^2;  p* = -inf, no improving direction
        return _rsoc([[0, 1, 0]], [1], [1, 0, 0], "e", "e")
    if case_id == "f":
        # x3 = -1 in the second order cone; distance 1
        return _soc([[0, 0, 1]], [-1], [0, 0, 0], "f", "f")
    if case_id == "g":
        # x2 + x3 = 0, x1 = 1 in the second order cone; distance 0, unattained
        return _soc([[0, 1, 1], [1, 0, 0]], [0, 1], [0, 0, 0], "g", "g")
    raise KeyError(f"unknown gallery id {case_id!r}; expected one of {GALLERY_IDS}")


def gallery() -> dict[str, ConicProblem]:
    return {cid: canonical_example(cid) for cid in GALLERY_IDS}
