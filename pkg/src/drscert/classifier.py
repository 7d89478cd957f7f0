"""Compose the three fixed-point runs into a case label or candidate set.

Cases follow the usual taxonomy of a conic program ``min c^T x, A x = b,
x in K``:

====  ==========================================================
a     solvable, dual solvable, no duality gap
b     solvable, but the dual is unsolvable or there is a gap
c     finite optimal value that is not attained
d     unbounded with an improving direction
e     unbounded without an improving direction
f     strongly infeasible
g     weakly infeasible
====  ==========================================================

Only a, d, f and g can always be told apart; b, c and e come back as
candidate sets unless the primal run gives extra evidence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .affine import AffineProjector, build_projector
from .certificates import (
    CertificateError,
    FarkasRows,
    Hyperplane,
    ImprovingDirection,
    Solution,
    UncertifiedDirection,
    improving_direction,
    VerificationReport,
    repair_feasibility,
    repair_objective,
    separating_hyperplane,
    verify_certificate,
)
from .operators import (
    T1,
    T2,
    T3,
    IterationOutcome,
    IterationParams,
    OperatorContext,
    OperatorKind,
    Verdict,
    default_params,
    problem_scale,
    run_fixed_point,
)
from .problems import CASES, ConicProblem

__all__ = [
    "Certainty",
    "FeasibilityStatus",
    "FeasibilityResult",
    "BoundednessStatus",
    "BoundednessResult",
    "PrimalStatus",
    "PrimalResult",
    "Diagnosis",
    "PreconditionError",
    "test_feasibility",
    "test_boundedness",
    "solve_primal",
    "classify",
    "params_for",
    "repair_scale",
    "certificate_tol",
]

# keep pytest from collecting the test_* operations when imported into tests
__test__ = False

FEASIBLE_CASES = ("a", "b", "c", "d", "e")
INFEASIBLE_CASES = ("f", "g")
LP_CASES = ("a", "d", "f")
# a continued run may not push z past this; it only needs to not stop early
_NO_LIMIT = 1e300


class Certainty(str, enum.Enum):
    DEFINITE = "Definite"
    CANDIDATE_SET = "CandidateSet"
    INDETERMINATE = "Indeterminate"


class FeasibilityStatus(str, enum.Enum):
    FEASIBLE = "Feasible"
    STRONGLY_INFEASIBLE = "StronglyInfeasible"
    WEAKLY_INFEASIBLE = "WeaklyInfeasible"
    INDETERMINATE = "Indeterminate"


class BoundednessStatus(str, enum.Enum):
    UNBOUNDED_WITH_DIRECTION = "UnboundedWithDirection"
    DUAL_FEASIBLE = "DualFeasible"
    NO_DIRECTION_FOUND = "NoDirectionFound"
    INDETERMINATE = "Indeterminate"


class PrimalStatus(str, enum.Enum):
    SOLVED = "Solved"
    SOLVED_PATHOLOGICAL = "SolvedPathological"
    NOT_SOLVED = "NotSolved"


class PreconditionError(ValueError):
    """An operation was called on a problem that does not meet its contract."""


@dataclass
class FeasibilityResult:
    status: FeasibilityStatus
    x: np.ndarray | None = None
    v: np.ndarray | None = None
    farkas: FarkasRows | None = None
    outcome: IterationOutcome | None = None


@dataclass
class BoundednessResult:
    status: BoundednessStatus
    direction: ImprovingDirection | None = None
    # z^{k+1} - z^k at the smallest step, i.e. gamma times the dual shift
    raw: np.ndarray | None = None
    outcome: IterationOutcome | None = None
    report: VerificationReport | None = None


@dataclass
class PrimalResult:
    status: PrimalStatus
    x: np.ndarray | None = None
    s: np.ndarray | None = None
    outcome: IterationOutcome | None = None

    @property
    def case(self):
        return {PrimalStatus.SOLVED: "a", PrimalStatus.SOLVED_PATHOLOGICAL: "b"}.get(self.status)


@dataclass
class Diagnosis:
    """Outcome of :func:`classify`.

    ``traces`` maps operator names to full outcomes; ``verification`` holds
    the report for every certificate attached. ``notes`` records why a
    result was downgraded, if it was.
    """

    cases: tuple
    certainty: Certainty
    params_used: IterationParams
    solution: np.ndarray | None = None
    hyperplane: Hyperplane | None = None
    direction: ImprovingDirection | None = None
    farkas: FarkasRows | None = None
    repairs: list = field(default_factory=list)
    traces: dict = field(default_factory=dict)
    verification: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    feasibility: FeasibilityStatus | None = None
    boundedness: BoundednessStatus | None = None
    primal: PrimalStatus | None = None

    def __post_init__(self):
        cases = tuple(sorted(set(self.cases)))
        if not cases or not set(cases) <= set(CASES):
            raise ValueError(f"invalid case set {self.cases!r}")
        if self.certainty is Certainty.DEFINITE and len(cases) != 1:
            raise ValueError("a Definite diagnosis needs exactly one case")
        self.cases = cases

    @property
    def label(self) -> str:
        return ",".join(self.cases)

    def summaries(self) -> dict:
        return {name: out.summary() for name, out in self.traces.items()}


def params_for(problem: ConicProblem, proj: AffineProjector | None = None, gamma: float | None = None, **overrides):
    """Default parameters scaled to ``problem``; see :func:`operators.default_params`.

    ``None`` overrides are ignored, so parsed command-line options can be
    passed straight through.
    """
    proj = proj if proj is not None else build_projector(problem.A, problem.b)
    gamma = 1.0 if gamma is None else gamma
    return default_params(problem_scale(proj, problem.c, gamma), gamma=gamma, **overrides)


def repair_scale(proj: AffineProjector) -> float:
    """Default interior scale ``1e-2 (1 + ||x0||)`` for repairs."""
    return 1e-2 * (1.0 + float(np.linalg.norm(proj.x0)))


def _context(problem, proj, params):
    return OperatorContext(proj, problem.cone, problem.c, params.gamma)


def _pick_z0(z0, kind: OperatorKind):
    if isinstance(z0, dict):
        return z0.get(kind.name)
    return z0


def _continue(kind, ctx, params, outcome):
    """Keep iterating from where ``outcome`` stopped, with the budget left.

    Used when a diverging run stopped at ``big_M`` before its step settled
    well enough for a certificate. The smaller of the two minimal steps wins;
    the verdict is that of the first leg.
    """
    left = int(params.max_iters) - outcome.iters_run
    if left <= 0:
        return outcome
    more = run_fixed_point(kind, ctx, params.with_(max_iters=left, big_M=_NO_LIMIT), outcome.z_final)
    if more.min_residual_norm >= outcome.min_residual_norm:
        more.v_hat = outcome.v_hat
        more.min_residual_norm = outcome.min_residual_norm
    more.verdict = outcome.verdict
    more.params = outcome.params
    more.iters_run += outcome.iters_run
    # traces stay those of the first leg so that index i still means k = i * stride
    more.norm_z_trace = outcome.norm_z_trace
    more.min_residual_trace = outcome.min_residual_trace
    return more


def certificate_tol(params: IterationParams) -> float:
    """Tolerance at which attached certificates are verified."""
    return 1e-3 * params.eps_residual


def test_feasibility(problem: ConicProblem, params: IterationParams | None = None, z0=None, proj=None):
    """Run T2 and read off feasibility.

    ``ZConverged`` gives a feasible point, a large persistent step gives
    strong infeasibility with ``v = v_hat``, a vanishing step on a diverging
    iterate gives weak infeasibility. An inconsistent linear system is
    reported as strongly infeasible with a row certificate and no iteration.
    """
    proj = proj if proj is not None else build_projector(problem.A, problem.b)
    if not proj.consistent:
        return FeasibilityResult(FeasibilityStatus.STRONGLY_INFEASIBLE, farkas=FarkasRows(proj.inconsistency.y))
    params = params if params is not None else params_for(problem, proj)
    out = run_fixed_point(T2, _context(problem, proj, params), params, z0)
    if out.verdict is Verdict.Z_CONVERGED:
        return FeasibilityResult(FeasibilityStatus.FEASIBLE, x=out.x_half_final.copy(), outcome=out)
    if out.verdict is Verdict.Z_DIVERGING_RESIDUAL_LARGE:
        return FeasibilityResult(FeasibilityStatus.STRONGLY_INFEASIBLE, v=out.v_hat.copy(), outcome=out)
    if out.verdict is Verdict.Z_DIVERGING_RESIDUAL_SMALL:
        return FeasibilityResult(FeasibilityStatus.WEAKLY_INFEASIBLE, outcome=out)
    return FeasibilityResult(FeasibilityStatus.INDETERMINATE, outcome=out)


def test_boundedness(
    problem: ConicProblem,
    params: IterationParams | None = None,
    z0=None,
    proj=None,
    assume_feasible: bool = False,
    tol: float | None = None,
):
    """Run T3 on a feasible problem and look for an improving direction.

    Unless ``assume_feasible`` is set the problem is first checked with
    :func:`test_feasibility`, and anything other than ``Feasible`` raises
    :class:`PreconditionError`. A candidate direction that fails
    verification at ``tol`` after continuing the run gives ``Indeterminate``.
    """
    proj = proj if proj is not None else build_projector(problem.A, problem.b)
    params = params if params is not None else params_for(problem, proj)
    if not assume_feasible:
        feas = test_feasibility(problem, params, None, proj)
        if feas.status is not FeasibilityStatus.FEASIBLE:
            raise PreconditionError(f"boundedness test needs a feasible problem, got {feas.status.value}")
    tol = certificate_tol(params) if tol is None else tol
    ctx = _context(problem, proj, params)
    out = run_fixed_point(T3, ctx, params, z0)
    if out.verdict is Verdict.Z_CONVERGED:
        return BoundednessResult(BoundednessStatus.DUAL_FEASIBLE, outcome=out)
    if out.verdict is Verdict.Z_DIVERGING_RESIDUAL_SMALL:
        return BoundednessResult(BoundednessStatus.NO_DIRECTION_FOUND, outcome=out)
    if out.verdict is Verdict.EXHAUSTED:
        return BoundednessResult(BoundednessStatus.INDETERMINATE, outcome=out)

    direction, report = _direction(problem, out, tol)
    if direction is None:
        out = _continue(T3, ctx, params, out)
        direction, report = _direction(problem, out, tol)
    if direction is None:
        return BoundednessResult(BoundednessStatus.INDETERMINATE, raw=-out.v_hat, outcome=out, report=report)
    return BoundednessResult(
        BoundednessStatus.UNBOUNDED_WITH_DIRECTION, direction=direction, raw=-out.v_hat, outcome=out, report=report
    )


def _direction(problem, out, tol):
    try:
        cert = improving_direction(problem, out.params, outcome=out, tol=tol)
    except UncertifiedDirection as err:
        return None, err.report
    return cert, verify_certificate(problem, cert, tol=tol)


def solve_primal(problem: ConicProblem, params: IterationParams | None = None, z0=None, proj=None):
    """Run T1 and try to read off a solution.

    ``ZConverged`` gives ``Solved`` with ``x = x^{k+1/2}`` and dual slack
    ``s = (x - z) / gamma``. Otherwise, if ``x^{k+1/2}`` stopped moving over
    the last windows while the last step stayed at most ``eps_residual``,
    the limit point is reported as ``SolvedPathological``. That branch is
    only meaningful for problems known to be feasible.
    """
    proj = proj if proj is not None else build_projector(problem.A, problem.b)
    if not proj.consistent:
        return PrimalResult(PrimalStatus.NOT_SOLVED)
    params = params if params is not None else params_for(problem, proj)
    out = run_fixed_point(T1, _context(problem, proj, params), params, z0)
    x = out.x_half_final.copy()
    if out.verdict is Verdict.Z_CONVERGED:
        s = (x - out.z_final) / params.gamma
        return PrimalResult(PrimalStatus.SOLVED, x=x, s=s, outcome=out)
    last = float(np.linalg.norm(out.residual_final))
    if out.x_half_stalled and last <= params.eps_residual:
        return PrimalResult(PrimalStatus.SOLVED_PATHOLOGICAL, x=x, outcome=out)
    return PrimalResult(PrimalStatus.NOT_SOLVED, outcome=out)


def classify(
    problem: ConicProblem,
    params: IterationParams | None = None,
    z0=None,
    eps_r: float | None = None,
    tol: float | None = None,
) -> Diagnosis:
    """Run the feasibility, primal and boundedness tests and combine them.

    Parameters
    ----------
    problem : ConicProblem
    params : IterationParams, optional
        Defaults to :func:`params_for` on ``problem``.
    z0 : array or dict, optional
        Common start for all runs, or a dict keyed by ``"T1"``, ``"T2"``,
        ``"T3"``.
    eps_r : float, optional
        Interior scale for repairs; defaults to :func:`repair_scale`.
    tol : float, optional
        Verification tolerance for attached certificates; defaults to
        :func:`certificate_tol`.

    Returns
    -------
    Diagnosis
        Never raises for numerical reasons other than a non-finite iterate;
        the weakest answer is ``Indeterminate`` with all consistent cases.
    """
    proj = build_projector(problem.A, problem.b)
    params = params if params is not None else params_for(problem, proj)
    eps_r = repair_scale(proj) if eps_r is None else eps_r
    tol = certificate_tol(params) if tol is None else tol
    diag = _classify(problem, proj, params, z0, eps_r, tol)
    if problem.cone.is_orthant:
        _restrict_lp(diag)
    return diag


def _classify(problem, proj, params, z0, eps_r, tol):
    def make(cases, certainty, **kw):
        return Diagnosis(cases=cases, certainty=certainty, params_used=params, **kw)

    if not proj.consistent:
        farkas = FarkasRows(proj.inconsistency.y)
        rep = verify_certificate(problem, farkas, tol=1e-8)
        return make(
            ("f",),
            Certainty.DEFINITE if rep.passed else Certainty.INDETERMINATE,
            farkas=farkas,
            verification={"farkas": rep},
            feasibility=FeasibilityStatus.STRONGLY_INFEASIBLE,
            notes=["linear constraints are inconsistent; no iteration run"],
        )

    feas = test_feasibility(problem, params, _pick_z0(z0, T2), proj)
    traces = {"T2": feas.outcome}

    if feas.status is FeasibilityStatus.INDETERMINATE:
        return make(CASES, Certainty.INDETERMINATE, traces=traces, feasibility=feas.status,
                    notes=["feasibility run exhausted its budget"])

    if feas.status is FeasibilityStatus.STRONGLY_INFEASIBLE:
        ctx = _context(problem, proj, params)
        hyper, rep = _hyperplane(problem, proj, feas.v, tol)
        if hyper is None:
            out = _continue(T2, ctx, params, feas.outcome)
            traces["T2"] = out
            hyper, rep = _hyperplane(problem, proj, out.v_hat, tol)
        if hyper is None:
            return make(INFEASIBLE_CASES, Certainty.INDETERMINATE, traces=traces, feasibility=feas.status,
                        verification={"hyperplane": rep} if rep else {},
                        notes=["separating hyperplane failed verification"])
        v = -hyper.h
        return make(("f",), Certainty.DEFINITE, hyperplane=hyper, traces=traces, feasibility=feas.status,
                    verification={"hyperplane": rep}, repairs=[repair_feasibility(problem, v, eps_r)])

    if feas.status is FeasibilityStatus.WEAKLY_INFEASIBLE:
        zero = np.zeros(problem.A.shape[1])
        return make(("g",), Certainty.DEFINITE, traces=traces, feasibility=feas.status,
                    repairs=[repair_feasibility(problem, zero, eps_r)])

    primal = solve_primal(problem, params, _pick_z0(z0, T1), proj)
    traces["T1"] = primal.outcome
    verification = {}
    if primal.status is PrimalStatus.SOLVED:
        rep = verify_certificate(problem, Solution(primal.x, primal.s), tol=tol)
        verification["solution"] = rep
        if rep.passed:
            return make(("a",), Certainty.DEFINITE, solution=primal.x, traces=traces, feasibility=feas.status,
                        primal=primal.status, verification=verification)
        primal = PrimalResult(PrimalStatus.NOT_SOLVED, outcome=primal.outcome)
    elif primal.status is PrimalStatus.SOLVED_PATHOLOGICAL:
        # the limit point only needs to be feasible to the run's own accuracy
        rep = verify_certificate(problem, Solution(primal.x), tol=params.eps_residual)
        verification["solution"] = rep
        if not rep.passed:
            primal = PrimalResult(PrimalStatus.NOT_SOLVED, outcome=primal.outcome)

    bound = test_boundedness(problem, params, _pick_z0(z0, T3), proj, assume_feasible=True, tol=tol)
    traces["T3"] = bound.outcome
    common = dict(traces=traces, feasibility=feas.status, boundedness=bound.status, primal=primal.status)
    pathological = primal.status is PrimalStatus.SOLVED_PATHOLOGICAL

    if bound.status is BoundednessStatus.UNBOUNDED_WITH_DIRECTION:
        verification["direction"] = bound.report
        verification.pop("solution", None)
        w = bound.raw / params.gamma
        notes = ["primal limit point discarded: an improving direction exists"] if pathological else []
        return make(("d",), Certainty.DEFINITE, direction=bound.direction, verification=verification,
                    repairs=[repair_objective(problem, w, eps_r)], notes=notes,
                    **{**common, "primal": PrimalStatus.NOT_SOLVED})

    solution = primal.x if pathological else None
    if bound.status is BoundednessStatus.INDETERMINATE:
        notes = ["boundedness run did not settle"]
        if bound.report is not None:
            verification["direction"] = bound.report
            notes = ["improving direction candidate failed verification"]
        cases = ("b",) if pathological else ("b", "c", "d", "e")
        return make(cases, Certainty.INDETERMINATE, solution=solution, verification=verification,
                    notes=notes, **common)

    if pathological:
        return make(("b",), Certainty.DEFINITE, solution=solution, verification=verification, **common)
    if bound.status is BoundednessStatus.DUAL_FEASIBLE:
        return make(("b", "c"), Certainty.CANDIDATE_SET, verification=verification, **common)
    zero = np.zeros(problem.A.shape[1])
    return make(("b", "c", "e"), Certainty.CANDIDATE_SET, verification=verification,
                repairs=[repair_objective(problem, zero, eps_r)], **common)


def _hyperplane(problem, proj, v, tol):
    try:
        hyper = separating_hyperplane(v, proj.x0)
    except CertificateError:
        return None, None
    rep = verify_certificate(problem, hyper, tol=tol)
    return (hyper if rep.passed else None), rep


def _restrict_lp(diag: Diagnosis):
    # orthant cones admit only cases a, d and f; anything else means the
    # run did not reach its limit behaviour
    allowed = set(LP_CASES)
    if set(diag.cases) <= allowed:
        return
    if diag.feasibility is FeasibilityStatus.FEASIBLE:
        keep = ("a", "d")
    elif diag.feasibility is FeasibilityStatus.INDETERMINATE:
        keep = LP_CASES
    else:
        keep = ("f",)
    diag.notes.append(f"cases {diag.label} impossible for a linear program; restricted to {','.join(keep)}")
    diag.cases = keep
    diag.certainty = Certainty.INDETERMINATE
    diag.solution = None
    diag.repairs = []
