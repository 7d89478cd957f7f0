"""Projection onto the affine set ``{x | A x = b}`` and onto the null space of A."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack, solve_triangular

__all__ = ["AffineProjector", "AffineInconsistency", "build_projector", "project_affine"]

RANK_TOL = 1e-12


@dataclass(frozen=True)
class AffineInconsistency:
    """The rows of ``A x = b`` contradict each other.

    ``y`` satisfies ``A.T @ y ~ 0`` and ``b @ y = 1``, which rules out any
    solution of the linear system, let alone one in the cone.
    """

    y: np.ndarray
    residual: float


@dataclass(frozen=True, eq=False)
class AffineProjector:
    """Precomputed data for ``P(x) = D x + x0`` with ``D = I - A^T (A A^T)^{-1} A``.

    ``A`` and ``b`` hold the kept (independent) rows only, each scaled to
    unit norm; the affine set is unchanged by that. ``factor`` is the lower
    triangular ``L`` with ``A A^T = L L^T`` for those rows, and ``basis`` is
    the orthonormal basis ``Q = A^T L^{-T}`` of the row space, so applying
    ``D`` costs two matrix-vector products.
    """

    A: np.ndarray
    b: np.ndarray
    factor: np.ndarray
    basis: np.ndarray
    x0: np.ndarray
    effective_rank: int
    kept_rows: np.ndarray
    A_full: np.ndarray = field(repr=False)
    b_full: np.ndarray = field(repr=False)
    inconsistency: AffineInconsistency | None = None

    @property
    def n(self) -> int:
        return self.A_full.shape[1]

    @property
    def consistent(self) -> bool:
        return self.inconsistency is None

    def nullspace(self, x: np.ndarray) -> np.ndarray:
        """``D x``."""
        return x - self.basis @ (self.basis.T @ x)

    def rowspace(self, x: np.ndarray) -> np.ndarray:
        """``(I - D) x``, the projection onto the range of ``A^T``."""
        return self.basis @ (self.basis.T @ x)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.nullspace(x) + self.x0

    def dense_D(self) -> np.ndarray:
        return np.eye(self.n) - self.basis @ self.basis.T


def build_projector(A, b) -> AffineProjector:
    """Factor ``A A^T`` once and precompute ``x0 = A^T (A A^T)^{-1} b``.

    Rows are first scaled to unit norm. Dependent rows are found with a
    pivoted Cholesky factorization of the Gram matrix (pivots below
    ``1e-12`` times the largest are treated as zero) and dropped. The kept
    rows are then factored as ``A^T = Q R`` by Householder QR, which gives
    ``L = R^T`` without squaring the condition number of A. If a dropped
    row disagrees with the kept ones the projector still builds, but carries
    an :class:`AffineInconsistency` instead of being usable as an affine
    projection.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    m, n = A.shape
    if b.shape != (m,):
        raise ValueError(f"b has shape {b.shape}, expected ({m},)")
    if m == 0 or not np.any(A):
        raise ValueError("constraint matrix A is zero")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("A and b must be finite")

    norms = np.linalg.norm(A, axis=1)
    norms[norms == 0] = 1.0
    As = A / norms[:, None]
    bs = b / norms

    G = As @ As.T
    # dpstrf: P^T G P = L L^T, stopping once the remaining pivots fall below tol
    _, piv, rank, info = lapack.dpstrf(G, lower=1, tol=RANK_TOL * np.max(np.diag(G)))
    if info < 0:
        raise ValueError(f"pivoted Cholesky failed (info={info})")
    rank = int(rank)
    kept = np.sort(piv[:rank] - 1)
    Ak = As[kept]
    bk = bs[kept]

    Q, R = np.linalg.qr(Ak.T)
    # fix signs so that L = R^T is the Cholesky factor (positive diagonal)
    sgn = np.where(np.diag(R) < 0, -1.0, 1.0)
    basis = Q * sgn
    L = (R * sgn[:, None]).T
    # A_k x0 = b_k with x0 in range(A_k^T): x0 = Q L^{-1} b_k
    x0 = basis @ solve_triangular(L, bk, lower=True)

    inconsistency = None
    if rank < m:
        resid = A @ x0 - b
        tol = 1e-8 * (1.0 + np.linalg.norm(b))
        if np.linalg.norm(resid) > tol:
            inconsistency = _farkas_rows(A, b)

    return AffineProjector(
        A=Ak,
        b=bk,
        factor=L,
        basis=basis,
        x0=x0,
        effective_rank=rank,
        kept_rows=kept,
        A_full=A,
        b_full=b,
        inconsistency=inconsistency,
    )


def _farkas_rows(A: np.ndarray, b: np.ndarray) -> AffineInconsistency:
    # y in the left null space of A with b @ y = 1: the component of b
    # orthogonal to range(A), rescaled
    U, s, _ = np.linalg.svd(A, full_matrices=True)
    r = int(np.sum(s > RANK_TOL ** 0.5 * s[0]))
    left_null = U[:, r:]
    y = left_null @ (left_null.T @ b)
    y = y / (b @ y)
    return AffineInconsistency(y=y, residual=float(np.linalg.norm(A.T @ y)))


def project_affine(P: AffineProjector, x, to_nullspace: bool = False) -> np.ndarray:
    """``D x + x0``, or just ``D x`` when ``to_nullspace`` is set."""
    x = np.asarray(x, dtype=float)
    if x.shape != (P.n,):
        raise ValueError(f"point has shape {x.shape}, expected ({P.n},)")
    if to_nullspace:
        return P.nullspace(x)
    if not P.consistent:
        raise ValueError("affine set is empty: the rows of A x = b are inconsistent")
    return P(x)
