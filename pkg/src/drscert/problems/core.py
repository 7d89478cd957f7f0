"""Conic program data: ``minimize c^T x  s.t.  A x = b,  x in K``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..cones import ConeSpec, smat, svec

__all__ = ["CASES", "ConicProblem", "SdpInstance"]

CASES = ("a", "b", "c", "d", "e", "f", "g")


@dataclass(frozen=True, eq=False)
class ConicProblem:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    cone: ConeSpec
    name: str = ""
    ground_truth: str | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        if A.ndim != 2:
            raise ValueError(f"A must be a matrix, got {A.ndim} dimensions")
        m, n = A.shape
        if b.shape != (m,):
            raise ValueError(f"b has {b.shape[0]} entries but A has {m} rows")
        if c.shape != (n,):
            raise ValueError(f"c has {c.shape[0]} entries but A has {n} columns")
        if self.cone.total_dim != n:
            raise ValueError(f"cone has {self.cone.total_dim} coordinates but A has {n} columns")
        if self.ground_truth is not None and self.ground_truth not in CASES:
            raise ValueError(f"ground_truth must be one of {CASES}, got {self.ground_truth!r}")
        for arr in (A, b, c):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def replace(self, **changes) -> "ConicProblem":
        fields = dict(
            A=self.A, b=self.b, c=self.c, cone=self.cone, name=self.name, ground_truth=self.ground_truth
        )
        fields.update(changes)
        return ConicProblem(**fields)

    def objective(self, x) -> float:
        return float(self.c @ np.asarray(x, dtype=float))

    def same_data(self, other: "ConicProblem") -> bool:
        return (
            self.cone == other.cone
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.b, other.b)
            and np.array_equal(self.c, other.c)
        )


@dataclass(frozen=True, eq=False)
class SdpInstance:
    """``minimize C . X  s.t.  A_i . X = b_i,  X psd`` with ``.`` the trace inner product."""

    A: tuple[np.ndarray, ...]
    b: np.ndarray
    C: np.ndarray
    ground_truth: str | None = None
    name: str = ""

    def __post_init__(self):
        mats = tuple(np.asarray(M, dtype=float) for M in self.A)
        C = np.asarray(self.C, dtype=float)
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        side = C.shape[0]
        for i, M in enumerate(mats + (C,)):
            label = "C" if i == len(mats) else f"A[{i}]"
            if M.shape != (side, side):
                raise ValueError(f"{label} has shape {M.shape}, expected ({side}, {side})")
            if np.max(np.abs(M - M.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(M))):
                raise ValueError(f"{label} is not symmetric")
        if b.shape != (len(mats),):
            raise ValueError(f"b has {b.shape[0]} entries for {len(mats)} constraint matrices")
        object.__setattr__(self, "A", mats)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.C.shape[0]

    @property
    def m(self) -> int:
        return len(self.A)

    def to_problem(self) -> ConicProblem:
        rows = np.array([svec(M) for M in self.A])
        return ConicProblem(
            A=rows,
            b=self.b,
            c=svec(self.C),
            cone=ConeSpec.single("psd", self.n),
            name=self.name,
            ground_truth=self.ground_truth,
        )

    @classmethod
    def from_problem(cls, problem: ConicProblem) -> "SdpInstance":
        blocks = problem.cone.blocks
        if len(blocks) != 1 or blocks[0].kind != "psd":
            raise ValueError("only single-block psd problems convert to SdpInstance")
        return cls(
            A=tuple(smat(row) for row in problem.A),
            b=problem.b,
            C=smat(problem.c),
            ground_truth=problem.ground_truth,
            name=problem.name,
        )
