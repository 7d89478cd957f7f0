"""Detection-rate experiments on generated weakly infeasible SDPs.

Two detectors, both reading a single T2 run started at the origin:

* strong infeasibility: the instance counts as *not* strongly infeasible
  when ``||z^N - z^{N+1}|| < tol``;
* infeasibility: the instance counts as infeasible when
  ``1 / ||z^N|| <= threshold``, evaluated at several ``N`` from one run.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .affine import build_projector
from .operators import T2, IterationParams, OperatorContext, run_fixed_point
from .problems import ConicProblem, generate_weakly_infeasible_sdp, messy_transform

__all__ = [
    "THREADS_ENV",
    "default_threads",
    "wisdp_suite",
    "StrongResult",
    "InfeasResult",
    "strong_infeasibility_run",
    "infeasibility_run",
    "run_suite",
    "detection_table",
]

THREADS_ENV = "DRSCERT_THREADS"
STRONG_TOL = 1e-3
INFEAS_THRESHOLD = 8e-2
# runs in this module go the full distance; nothing should stop them early
_NO_LIMIT = 1e300


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            val = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
        if val < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
        return val
    return os.cpu_count() or 1


def wisdp_suite(n: int, m: int, count: int, seed: int = 0, messy: bool = False) -> list[ConicProblem]:
    """``count`` instances; instance ``i`` uses seed ``seed + i``."""
    out = []
    for i in range(count):
        inst = generate_weakly_infeasible_sdp(n, m, seed + i)
        if messy:
            inst = messy_transform(inst, [seed + i, 1])
        out.append(inst.to_problem())
    return out


def _fixed_length(N: int, stride: int, gamma: float) -> IterationParams:
    return IterationParams(
        gamma=gamma,
        max_iters=int(N),
        eps_residual=1.0,
        big_M=_NO_LIMIT,
        conv_tol=1e-15,
        window=100,
        record_stride=int(stride),
    )


def _t2_context(problem: ConicProblem, gamma: float) -> OperatorContext:
    return OperatorContext(build_projector(problem.A, problem.b), problem.cone, problem.c, gamma)


@dataclass(frozen=True)
class StrongResult:
    name: str
    N: int
    step_norm: float
    not_strongly_infeasible: bool


@dataclass(frozen=True)
class InfeasResult:
    name: str
    checkpoints: tuple
    norm_z: tuple
    infeasible: tuple


def strong_infeasibility_run(problem: ConicProblem, N: int = 50_000, tol: float = STRONG_TOL, gamma: float = 1.0):
    """``||z^N - z^{N+1}||`` for T2 from the origin, and whether it is below ``tol``."""
    out = run_fixed_point(T2, _t2_context(problem, gamma), _fixed_length(N + 1, N + 1, gamma))
    # a converged run has stopped moving, so its last step stands in for step N
    step = float(np.linalg.norm(out.residual_final))
    return StrongResult(problem.name, int(N), step, step < tol)


def infeasibility_run(problem: ConicProblem, checkpoints=(10_000, 100_000, 1_000_000),
                      threshold: float = INFEAS_THRESHOLD, gamma: float = 1.0):
    """``||z^N||`` at each checkpoint of one T2 run, flagged by ``1 / ||z^N|| <= threshold``."""
    checkpoints = tuple(sorted(int(N) for N in checkpoints))
    if not checkpoints or checkpoints[0] < 1:
        raise ValueError("checkpoints must be positive")
    stride = int(np.gcd.reduce(checkpoints))
    out = run_fixed_point(T2, _t2_context(problem, gamma), _fixed_length(checkpoints[-1], stride, gamma))
    norms = []
    for N in checkpoints:
        i = N // stride
        # past the end of the trace the run converged and z stayed put
        norms.append(float(out.norm_z_trace[i]) if i < len(out.norm_z_trace) else out.norm_z)
    flags = tuple(bool(nz > 0 and 1.0 / nz <= threshold) for nz in norms)
    return InfeasResult(problem.name, checkpoints, tuple(norms), flags)


def run_suite(fn, problems, threads: int | None = None, **kw):
    """Map ``fn`` over ``problems`` on a thread pool; results keep input order."""
    threads = default_threads() if threads is None else threads
    if threads <= 1 or len(problems) <= 1:
        return [fn(p, **kw) for p in problems]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda p: fn(p, **kw), problems))


def detection_table(results: dict) -> list[dict]:
    """One row per (set, N): ``{"set", "N", "detected", "count", "rate"}``."""
    rows = []
    for label, res in results.items():
        if not res:
            continue
        if isinstance(res[0], StrongResult):
            hits = sum(r.not_strongly_infeasible for r in res)
            rows.append({"set": label, "N": res[0].N, "detected": hits, "count": len(res), "rate": hits / len(res)})
        else:
            for j, N in enumerate(res[0].checkpoints):
                hits = sum(r.infeasible[j] for r in res)
                rows.append({"set": label, "N": N, "detected": hits, "count": len(res), "rate": hits / len(res)})
    return rows
