"""The three Douglas-Rachford fixed-point operators and the iteration engine.

All three operators share the step ::

    x_half = P_K(z)
    x_next = D (2 x_half - z) + offset
    z_next = z + x_next - x_half

and differ only in the constant ``offset``:

==========  ====================  ======================================
operator    offset                meaning
==========  ====================  ======================================
``T1``      ``x0 - gamma D c``    DRS on the conic program itself
``T2``      ``x0``                objective dropped (feasibility)
``T3``      ``-gamma D c``        right-hand side dropped (boundedness)
==========  ====================  ======================================
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .affine import AffineProjector
from .cones import ConeSpec, projector

__all__ = [
    "OperatorKind",
    "T1",
    "T2",
    "T3",
    "IterationParams",
    "Verdict",
    "IterationOutcome",
    "NumericalBlowup",
    "OperatorContext",
    "apply_operator",
    "drs_three_step",
    "run_fixed_point",
    "default_params",
    "problem_scale",
]


@dataclass(frozen=True)
class OperatorKind:
    include_b: bool
    include_c: bool

    def __post_init__(self):
        if not (self.include_b or self.include_c):
            raise ValueError("an operator must keep at least one of b and c")

    @property
    def name(self) -> str:
        return {(True, True): "T1", (True, False): "T2", (False, True): "T3"}[
            (self.include_b, self.include_c)
        ]

    def __str__(self):
        return self.name


T1 = OperatorKind(True, True)
T2 = OperatorKind(True, False)
T3 = OperatorKind(False, True)


@dataclass(frozen=True)
class IterationParams:
    """Knobs shared by every fixed-point run.

    ``eps_residual`` and ``big_M`` are absolute; :func:`default_params` scales
    them to a problem. ``drift_tol`` bounds the relative movement of
    ``x^{k+1/2}`` across one window for it to count as settled.
    """

    gamma: float = 1.0
    max_iters: int = 100_000
    eps_residual: float = 1e-2
    big_M: float = 1e2
    conv_tol: float = 1e-9
    window: int = 100
    record_stride: int = 100
    drift_tol: float = 1e-5

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        if not (isinstance(self.max_iters, (int, np.integer)) and self.max_iters >= 1):
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        if not self.eps_residual > 0:
            raise ValueError(f"eps_residual must be positive, got {self.eps_residual!r}")
        if not self.big_M > 1:
            raise ValueError(f"big_M must exceed 1, got {self.big_M!r}")
        if not self.conv_tol > 0:
            raise ValueError(f"conv_tol must be positive, got {self.conv_tol!r}")
        if not self.drift_tol > 0:
            raise ValueError(f"drift_tol must be positive, got {self.drift_tol!r}")
        for name in ("window", "record_stride"):
            val = getattr(self, name)
            if not (isinstance(val, (int, np.integer)) and val >= 1):
                raise ValueError(f"{name} must be a positive integer, got {val!r}")

    def with_(self, **changes) -> "IterationParams":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self) -> dict:
        return {
            "gamma": float(self.gamma),
            "max_iters": int(self.max_iters),
            "eps_residual": float(self.eps_residual),
            "big_M": float(self.big_M),
            "conv_tol": float(self.conv_tol),
            "window": int(self.window),
            "record_stride": int(self.record_stride),
            "drift_tol": float(self.drift_tol),
        }


def problem_scale(proj: AffineProjector, c: np.ndarray, gamma: float = 1.0) -> float:
    """``1 + ||x0|| + gamma ||D c||``: the size of the constant offsets in T1-T3."""
    return 1.0 + float(np.linalg.norm(proj.x0)) + gamma * float(np.linalg.norm(proj.nullspace(c)))


def default_params(scale: float = 1.0, **overrides) -> IterationParams:
    """Defaults with ``eps_residual = 1e-2 s`` and ``big_M = 1e2 s`` for scale ``s``."""
    base = IterationParams(eps_residual=1e-2 * scale, big_M=1e2 * scale)
    return base.with_(**overrides)


class Verdict(str, enum.Enum):
    Z_CONVERGED = "ZConverged"
    Z_DIVERGING_RESIDUAL_LARGE = "ZDiverging.ResidualLarge"
    Z_DIVERGING_RESIDUAL_SMALL = "ZDiverging.ResidualSmall"
    EXHAUSTED = "Exhausted"


class NumericalBlowup(FloatingPointError):
    """The iterate stopped being finite."""

    def __init__(self, message, iteration, norm_z_trace):
        super().__init__(message)
        self.iteration = iteration
        self.norm_z_trace = norm_z_trace


@dataclass
class IterationOutcome:
    """Everything one fixed-point run learned.

    ``residual_final`` and ``v_hat`` are differences ``z^k - z^{k+1}``;
    ``v_hat`` is taken at the step with the smallest residual norm seen.
    ``norm_z_trace[i]`` and ``min_residual_trace[i]`` are sampled at
    ``k = i * record_stride``.
    """

    kind: OperatorKind
    verdict: Verdict
    z_final: np.ndarray
    residual_final: np.ndarray
    v_hat: np.ndarray
    min_residual_norm: float
    x_half_final: np.ndarray
    x_next_final: np.ndarray
    x_half_drift: float
    x_half_stalled: bool
    iters_run: int
    norm_z_trace: np.ndarray
    min_residual_trace: np.ndarray
    record_stride: int
    params: IterationParams = field(repr=False)

    @property
    def norm_z(self) -> float:
        return float(np.linalg.norm(self.z_final))

    def summary(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "iters": int(self.iters_run),
            "norm_z": float(np.linalg.norm(self.z_final)),
            "min_residual": float(self.min_residual_norm),
            "final_residual": float(np.linalg.norm(self.residual_final)),
            "x_half_drift": float(self.x_half_drift),
        }


@dataclass(frozen=True, eq=False)
class OperatorContext:
    """Problem data an operator needs: projector, cone, objective, step."""

    proj: AffineProjector
    cone: ConeSpec
    c: np.ndarray
    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        if self.c.shape != (self.proj.n,) or self.cone.total_dim != self.proj.n:
            raise ValueError(
                f"dimension mismatch: A has {self.proj.n} columns, c has {self.c.shape[0]} "
                f"entries, cone has {self.cone.total_dim} coordinates"
            )

    def offset(self, kind: OperatorKind) -> np.ndarray:
        off = np.zeros(self.proj.n)
        if kind.include_b:
            off += self.proj.x0
        if kind.include_c:
            off -= self.gamma * self.proj.nullspace(self.c)
        return off


def apply_operator(kind: OperatorKind, ctx: OperatorContext, z) -> tuple[np.ndarray, np.ndarray]:
    """One DRS step. Returns ``(z_next, x_half)``."""
    z = np.asarray(z, dtype=float)
    if z.shape != (ctx.proj.n,):
        raise ValueError(f"z has shape {z.shape}, expected ({ctx.proj.n},)")
    x_half = projector(ctx.cone)(z)
    x_next = ctx.proj.nullspace(2.0 * x_half - z) + ctx.offset(kind)
    return z + x_next - x_half, x_half


def drs_three_step(ctx: OperatorContext, z, include_b: bool = True, include_c: bool = True):
    """Literal three-step DRS with explicit proximal maps.

    The prox of the indicator of K is P_K; the prox of ``gamma (c^T x +
    indicator{A x = b})`` is the affine projection of ``u - gamma c``,
    ``u - A^+ (A u - b)`` with the pseudoinverse applied by an SVD least
    squares solve on the original rows. Nothing is shared with the
    precomputed projector, which makes this a check on :func:`apply_operator`.
    """
    A = ctx.proj.A_full
    b = ctx.proj.b_full if include_b else np.zeros(A.shape[0])
    c = ctx.c if include_c else np.zeros_like(ctx.c)
    z = np.asarray(z, dtype=float)

    x_half = projector(ctx.cone)(z)
    u = 2.0 * x_half - z - ctx.gamma * c
    # argmin_x gamma c^T x + 0.5||x - (2 x_half - z)||^2  s.t.  A x = b
    x_next = u - np.linalg.lstsq(A, A @ u - b, rcond=None)[0]
    return z + x_next - x_half, x_half


def run_fixed_point(
    kind: OperatorKind,
    ctx: OperatorContext,
    params: IterationParams,
    z0=None,
) -> IterationOutcome:
    """Iterate ``z <- T(z)`` and classify how the sequence behaves.

    Stops when the step ``||z^{k+1} - z^k||`` stays below
    ``conv_tol (1 + ||z^k||)`` for ``window`` consecutive steps
    (``ZConverged``), when ``||z^k|| >= big_M`` (``ZDiverging`` with the
    residual branch decided by ``min_residual_norm`` against
    ``eps_residual``), or after ``max_iters`` steps (``Exhausted``).
    """
    n = ctx.proj.n
    if ctx.gamma != params.gamma:
        ctx = OperatorContext(ctx.proj, ctx.cone, ctx.c, params.gamma)
    z = np.zeros(n) if z0 is None else np.array(z0, dtype=float)
    if z.shape != (n,):
        raise ValueError(f"z0 has shape {z.shape}, expected ({n},)")
    if not np.all(np.isfinite(z)):
        raise ValueError("z0 must be finite")

    kinds, sizes, starts = _kernels.encode_cone(ctx.cone)
    (
        code,
        iters,
        z_final,
        x_half,
        x_next,
        residual,
        v_hat,
        min_res,
        drift,
        stalled,
        norm_trace,
        minres_trace,
    ) = _kernels.run_loop(
        z,
        np.ascontiguousarray(ctx.proj.basis),
        ctx.offset(kind),
        kinds,
        sizes,
        starts,
        int(params.max_iters),
        int(params.window),
        int(params.record_stride),
        float(params.conv_tol),
        float(params.big_M),
        float(params.eps_residual),
        float(params.drift_tol),
    )
    if code == _kernels.BLOWUP:
        raise NumericalBlowup(
            f"non-finite iterate after {iters} steps of {kind}", int(iters), norm_trace
        )
    return IterationOutcome(
        kind=kind,
        verdict=_VERDICTS[code],
        z_final=z_final,
        residual_final=residual,
        v_hat=v_hat,
        min_residual_norm=float(min_res),
        x_half_final=x_half,
        x_next_final=x_next,
        x_half_drift=float(drift),
        x_half_stalled=bool(stalled),
        iters_run=int(iters),
        norm_z_trace=norm_trace,
        min_residual_trace=minres_trace,
        record_stride=int(params.record_stride),
        params=params,
    )


_VERDICTS = {
    _kernels.CONVERGED: Verdict.Z_CONVERGED,
    _kernels.DIVERGING_LARGE: Verdict.Z_DIVERGING_RESIDUAL_LARGE,
    _kernels.DIVERGING_SMALL: Verdict.Z_DIVERGING_RESIDUAL_SMALL,
    _kernels.EXHAUSTED: Verdict.EXHAUSTED,
}
