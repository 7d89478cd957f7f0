"""Certificates extracted from fixed-point runs, and checks that re-derive them.

Every certificate here can be re-checked with :func:`verify_certificate`
using only the problem data: no iteration is involved in verification.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .affine import build_projector
from .cones import (
    distance_to_cone,
    distance_to_dual_cone,
    dual_interior_point,
    interior_point,
    project_cone,
)
from .operators import T3, IterationParams, OperatorContext, Verdict, run_fixed_point
from .problems import ConicProblem

__all__ = [
    "CertificateError",
    "UncertifiedDirection",
    "OracleInconclusive",
    "Hyperplane",
    "ImprovingDirection",
    "Solution",
    "FarkasRows",
    "RepairKind",
    "Repair",
    "Check",
    "VerificationReport",
    "OracleResult",
    "context_for",
    "separating_hyperplane",
    "improving_direction",
    "verify_certificate",
    "repair_feasibility",
    "repair_objective",
    "displacement_oracle",
]


class CertificateError(RuntimeError):
    """A certificate could not be formed from the supplied estimate."""


class UncertifiedDirection(CertificateError):
    def __init__(self, message, raw, report):
        super().__init__(message)
        self.raw = raw
        self.report = report


class OracleInconclusive(RuntimeError):
    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class Hyperplane:
    """``{x | h^T x = beta}`` with ``h^T y1 <= 0 < beta < h^T y2`` for cone points
    ``y1`` and affine points ``y2``."""

    h: np.ndarray
    beta: float


@dataclass(frozen=True)
class ImprovingDirection:
    u: np.ndarray


@dataclass(frozen=True)
class Solution:
    """A primal point, optionally with the dual slack estimate ``s``."""

    x: np.ndarray
    s: np.ndarray | None = None


@dataclass(frozen=True)
class FarkasRows:
    """``y`` with ``A^T y = 0`` and ``b^T y = 1``: the linear system alone is inconsistent."""

    y: np.ndarray


class RepairKind(str, enum.Enum):
    FEASIBILITY_SHIFT = "FeasibilityShift"
    OBJECTIVE_SHIFT = "ObjectiveShift"


@dataclass(frozen=True)
class Repair:
    kind: RepairKind
    shift: np.ndarray
    problem: ConicProblem
    interior_scale: float


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    passed: bool


@dataclass
class VerificationReport:
    kind: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(chk.passed for chk in self.checks)

    def add(self, name: str, value: float, passed: bool):
        self.checks.append(Check(name, float(value), bool(passed)))

    def residual(self, name: str) -> float:
        for chk in self.checks:
            if chk.name == name:
                return chk.value
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "passed": self.passed,
            "checks": [{"name": c.name, "value": c.value, "passed": c.passed} for c in self.checks],
        }


def context_for(problem: ConicProblem, gamma: float = 1.0) -> OperatorContext:
    return OperatorContext(build_projector(problem.A, problem.b), problem.cone, problem.c, gamma)


def separating_hyperplane(v, x0) -> Hyperplane:
    """``h = -v``, ``beta = -(v^T x0) / 2`` from a nonzero displacement ``v``."""
    v = np.asarray(v, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    inner = float(v @ x0)
    if not inner < 0:
        raise CertificateError(
            f"v^T x0 = {inner:.3e} is not negative; the displacement estimate cannot separate"
        )
    return Hyperplane(h=-v, beta=-inner / 2.0)


def improving_direction(problem: ConicProblem, params: IterationParams, z0=None, outcome=None, tol=None):
    """Run T3 and turn a persistent step into a unit improving direction.

    Returns ``None`` when the smallest step seen is at most ``eps_residual``
    or the iteration converged. Raises :class:`UncertifiedDirection` when the
    candidate fails :func:`verify_certificate` at ``tol`` (default
    ``eps_residual``). A finished T3 ``outcome`` may be passed to skip the run.
    """
    if outcome is None:
        outcome = run_fixed_point(T3, context_for(problem, params.gamma), params, z0)
    if outcome.verdict is Verdict.Z_CONVERGED or not outcome.min_residual_norm > params.eps_residual:
        return None
    # z^{k+1} - z^k tends to gamma * P_{N(A) cap K}(-c)
    raw = -outcome.v_hat
    u = raw / np.linalg.norm(raw)
    cert = ImprovingDirection(u)
    report = verify_certificate(problem, cert, tol=params.eps_residual if tol is None else tol)
    if not report.passed:
        raise UncertifiedDirection("improving direction candidate failed verification", raw, report)
    return cert


def verify_certificate(problem: ConicProblem, cert, tol: float = 1e-8) -> VerificationReport:
    """Re-check a certificate against the problem data by direct computation."""
    A, b, c, cone = problem.A, problem.b, problem.c, problem.cone
    if isinstance(cert, Hyperplane):
        rep = VerificationReport("hyperplane")
        P = build_projector(A, b)
        h = cert.h
        # h lies in -K*: every cone point has h^T y <= 0
        rep.add("dist(-h, K*)", distance_to_dual_cone(-h, cone), distance_to_dual_cone(-h, cone) <= tol)
        dh = float(np.linalg.norm(P.nullspace(h)))
        rep.add("||D h||", dh, dh <= tol)
        rep.add("beta", cert.beta, cert.beta > 0)
        # h in range(A^T) makes h^T x constant (= h^T x0) on the affine set
        gap = 2.0 * cert.beta - float(h @ P.x0)
        rep.add("2 beta - h^T x0", gap, gap <= tol)
        return rep
    if isinstance(cert, ImprovingDirection):
        rep = VerificationReport("direction")
        u = cert.u
        au = float(np.linalg.norm(A @ u))
        rep.add("||A u||", au, au <= tol)
        dk = distance_to_cone(u, cone)
        rep.add("dist(u, K)", dk, dk <= tol)
        cu = float(c @ u)
        rep.add("c^T u", cu, cu < 0)
        return rep
    if isinstance(cert, FarkasRows):
        rep = VerificationReport("farkas")
        aty = float(np.linalg.norm(A.T @ cert.y))
        rep.add("||A^T y||", aty, aty <= tol * (1.0 + np.linalg.norm(cert.y)))
        by = float(b @ cert.y)
        rep.add("|b^T y - 1|", abs(by - 1.0), abs(by - 1.0) <= tol)
        return rep
    if isinstance(cert, Solution):
        rep = VerificationReport("solution")
        x = cert.x
        r = float(np.linalg.norm(A @ x - b))
        rep.add("||A x - b||", r, r <= tol * (1.0 + np.linalg.norm(b)))
        dk = distance_to_cone(x, cone)
        rep.add("dist(x, K)", dk, dk <= tol * (1.0 + np.linalg.norm(x)))
        if cert.s is not None:
            s = cert.s
            ds = distance_to_dual_cone(s, cone)
            rep.add("dist(s, K*)", ds, ds <= tol * (1.0 + np.linalg.norm(s)))
            P = build_projector(A, b)
            # dual feasibility: c - s in range(A^T)
            dres = float(np.linalg.norm(P.nullspace(c - s)))
            rep.add("||D (c - s)||", dres, dres <= tol * (1.0 + np.linalg.norm(c)))
            comp = abs(float(x @ s))
            rep.add("|x^T s|", comp, comp <= tol * (1.0 + np.linalg.norm(x) * np.linalg.norm(s)))
        return rep
    raise TypeError(f"cannot verify {type(cert).__name__}")


def _check_scale(eps_r):
    if not eps_r > 0:
        raise ValueError(f"interior scale must be positive, got {eps_r!r}")


def repair_feasibility(problem: ConicProblem, v, eps_r: float) -> Repair:
    """Shift the right-hand side to ``b + A (v + d)`` with ``d`` interior to K.

    The shifted constraint ``K cap {x | A (x - v - d) = b}`` is strongly
    feasible; ``v`` may be zero for problems that are feasible or weakly
    infeasible.
    """
    _check_scale(eps_r)
    v = np.asarray(v, dtype=float)
    shift = v + interior_point(problem.cone, eps_r)
    new = problem.replace(b=problem.b + problem.A @ shift, name=problem.name + "+feas", ground_truth=None)
    return Repair(RepairKind.FEASIBILITY_SHIFT, shift, new, eps_r)


def repair_objective(problem: ConicProblem, w, eps_r: float) -> Repair:
    """Replace ``c`` by ``c + w + s`` with ``s`` interior to the dual cone."""
    _check_scale(eps_r)
    w = np.asarray(w, dtype=float)
    shift = w + dual_interior_point(problem.cone, eps_r)
    new = problem.replace(c=problem.c + shift, name=problem.name + "+obj", ground_truth=None)
    return Repair(RepairKind.OBJECTIVE_SHIFT, shift, new, eps_r)


@dataclass(frozen=True)
class OracleResult:
    """Best-approximation estimate ``v = y_cone - x_affine``.

    ``conclusive`` is False when the budget ran out before the pair settled,
    or when the pair settled only after travelling far out (distance to K
    approached but not attained); ``v`` is then the last estimate and
    ``pair_norm`` shows how far the pair went.
    """

    v: np.ndarray
    conclusive: bool
    iterations: int
    pair_norm: float
    fixed_point_gap: float


# a pair further out than this multiple of the data scale counts as drifting off
ORACLE_DRIFT = 1e3


def displacement_oracle(
    problem: ConicProblem, budget: int = 20_000, tol: float = 1e-13, strict: bool = False
) -> OracleResult:
    """Alternating projections between K and ``{x | A x = b}``.

    Meant as a test oracle for small instances: it solves the affine
    projection directly with least squares and uses the numpy cone
    projections, sharing nothing with the compiled engine.

    After each alternating step the pair is pushed further along the step
    taken on the affine side, with the push doubled on success and halved
    on failure; a push is kept only if it lowers the distance to K. Every
    accepted point lowers ``||y - x||``, and since ``v`` is the unique
    smallest element of the closure of ``K - {x | A x = b}``, the
    differences still converge to ``v``. Without the push, instances whose
    distance is approached only at infinity would need billions of steps.

    With ``strict`` an inconclusive run raises :class:`OracleInconclusive`.
    """
    A = problem.A
    b = problem.b
    cone = problem.cone
    gram = A @ A.T

    def p_aff(y):
        lam = np.linalg.lstsq(gram, A @ y - b, rcond=None)[0]
        return y - A.T @ lam

    x = p_aff(np.zeros(A.shape[1]))
    y = project_cone(x, cone)
    dist = float(np.linalg.norm(y - x))
    ref = 1.0 + float(np.linalg.norm(x))
    push = 1.0
    gap = np.inf
    settled = False
    it = 0
    for it in range(1, budget + 1):
        x_new = p_aff(y)
        y_new = project_cone(x_new, cone)
        gap = float(np.linalg.norm(y_new - y))
        step = x_new - x
        x, y = x_new, y_new
        dist = float(np.linalg.norm(y - x))

        pushed = False
        while push >= 1.0:
            xe = x + push * step
            ye = project_cone(xe, cone)
            de = float(np.linalg.norm(ye - xe))
            if de < dist:
                x, y, dist = xe, ye, de
                push *= 2.0
                pushed = True
                break
            push /= 2.0
        push = max(push, 1.0)

        if not np.isfinite(dist) or np.linalg.norm(x) > 1e8 * ref:
            break
        if gap <= tol * ref and not pushed:
            settled = True
            break

    pair_norm = float(np.linalg.norm(x) + np.linalg.norm(y))
    result = OracleResult(
        v=y - x,
        conclusive=bool(settled and pair_norm <= ORACLE_DRIFT * ref),
        iterations=it,
        pair_norm=pair_norm,
        fixed_point_gap=gap,
    )
    if strict and not result.conclusive:
        raise OracleInconclusive(f"displacement did not settle in {it} alternating steps", result)
    return result
