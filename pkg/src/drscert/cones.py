"""Products of standard cones: projections, duals, membership, interior points.

Vector layout conventions
-------------------------
* ``soc`` blocks store the radius coordinate last: ``(x_1, ..., x_k, t)`` with
  ``t >= ||x||``.
* ``rsoc`` blocks store ``(x_1, ..., x_k, u, w)`` with ``2 u w >= ||x||^2`` and
  ``u, w >= 0``.
* ``psd`` blocks hold a symmetric ``k x k`` matrix in scaled vectorized form
  (see :func:`svec`), occupying ``k (k + 1) / 2`` coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ConeBlock",
    "ConeSpec",
    "ConeDimensionError",
    "KINDS",
    "svec",
    "smat",
    "project_cone",
    "projector",
    "project_dual_cone",
    "project_polar_cone",
    "distance_to_cone",
    "distance_to_dual_cone",
    "interior_point",
    "dual_interior_point",
]

KINDS = ("nonneg", "soc", "rsoc", "psd", "zero", "free")

_SQRT2 = np.sqrt(2.0)


class ConeDimensionError(ValueError):
    """A vector does not match the layout of a cone."""


@dataclass(frozen=True)
class ConeBlock:
    """One factor of a product cone.

    ``size`` is the parameter used in problem documents: the vector length for
    every kind except ``psd``, where it is the matrix side.
    """

    kind: str
    size: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown cone kind {self.kind!r}; expected one of {KINDS}")
        if int(self.size) != self.size or self.size < 1:
            raise ValueError(f"{self.kind} block needs a positive integer size, got {self.size!r}")
        if self.kind == "soc" and self.size < 2:
            raise ValueError("soc block needs size >= 2")
        if self.kind == "rsoc" and self.size < 3:
            raise ValueError("rsoc block needs size >= 3")

    @property
    def dim(self) -> int:
        if self.kind == "psd":
            return self.size * (self.size + 1) // 2
        return self.size

    @property
    def self_dual(self) -> bool:
        return self.kind not in ("zero", "free")

    def dual(self) -> "ConeBlock":
        if self.kind == "zero":
            return ConeBlock("free", self.size)
        if self.kind == "free":
            return ConeBlock("zero", self.size)
        return self


class ConeSpec:
    """Cartesian product of :class:`ConeBlock` factors, in order."""

    def __init__(self, blocks: Iterable[ConeBlock]):
        self.blocks = tuple(blocks)
        if not self.blocks:
            raise ValueError("a cone needs at least one block")
        offsets = np.cumsum([0] + [blk.dim for blk in self.blocks])
        self.slices = tuple(slice(int(a), int(b)) for a, b in zip(offsets[:-1], offsets[1:]))
        self.total_dim = int(offsets[-1])

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[str, int]]) -> "ConeSpec":
        return cls(ConeBlock(kind, int(size)) for kind, size in pairs)

    @classmethod
    def single(cls, kind: str, size: int) -> "ConeSpec":
        return cls([ConeBlock(kind, size)])

    def dual(self) -> "ConeSpec":
        return ConeSpec(blk.dual() for blk in self.blocks)

    @property
    def is_orthant(self) -> bool:
        return all(blk.kind == "nonneg" for blk in self.blocks)

    def __eq__(self, other):
        return isinstance(other, ConeSpec) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        inner = ", ".join(f"{blk.kind}({blk.size})" for blk in self.blocks)
        return f"ConeSpec([{inner}])"

    def check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.shape[0] != self.total_dim:
            # name the first block that cannot be filled
            got = x.shape[0] if x.ndim == 1 else x.shape
            for idx, (blk, sl) in enumerate(zip(self.blocks, self.slices)):
                if x.ndim != 1 or sl.stop > x.shape[0]:
                    raise ConeDimensionError(
                        f"vector of length {got} does not fit block {idx} "
                        f"({blk.kind}, size {blk.size}, coordinates {sl.start}:{sl.stop}); "
                        f"cone expects {self.total_dim} coordinates"
                    )
            raise ConeDimensionError(
                f"vector of length {got} has {x.shape[0] - self.total_dim} coordinates "
                f"beyond the last block; cone expects {self.total_dim}"
            )
        return x


# ---------------------------------------------------------------------------
# symmetric matrix vectorization


def _triu_indices(k: int):
    # upper triangle, column-major: (0,0), (0,1), (1,1), (0,2), ...
    rows, cols = [], []
    for j in range(k):
        for i in range(j + 1):
            rows.append(i)
            cols.append(j)
    return np.array(rows, dtype=int), np.array(cols, dtype=int)


_TRIU_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _triu(k: int):
    hit = _TRIU_CACHE.get(k)
    if hit is None:
        rows, cols = _triu_indices(k)
        scale = np.where(rows == cols, 1.0, _SQRT2)
        hit = (rows, cols, scale)
        _TRIU_CACHE[k] = hit
    return hit


def side_from_dim(d: int) -> int:
    k = int(round((np.sqrt(8 * d + 1) - 1) / 2))
    if k * (k + 1) // 2 != d:
        raise ValueError(f"length {d} is not a triangular number")
    return k


def svec(M: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Scaled vectorization of a symmetric matrix.

    Stacks the upper triangle column by column and multiplies off-diagonal
    entries by ``sqrt(2)`` so that ``svec(A) @ svec(B) == trace(A @ B)``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"svec needs a square matrix, got shape {M.shape}")
    asym = np.max(np.abs(M - M.T)) if M.size else 0.0
    if asym > tol * max(1.0, np.max(np.abs(M))):
        raise ValueError(f"matrix is not symmetric (max |M - M^T| = {asym:.3e})")
    rows, cols, scale = _triu(M.shape[0])
    return M[rows, cols] * scale


def smat(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`svec`."""
    v = np.asarray(v, dtype=float)
    k = side_from_dim(v.shape[0])
    rows, cols, scale = _triu(k)
    M = np.zeros((k, k))
    vals = v / scale
    M[rows, cols] = vals
    M[cols, rows] = vals
    return M


# ---------------------------------------------------------------------------
# per-block projections


def _proj_soc(x: np.ndarray) -> np.ndarray:
    t = x[-1]
    u = x[:-1]
    nu = np.sqrt(u @ u)
    if nu <= t:
        return x.copy()
    if nu <= -t:
        return np.zeros_like(x)
    alpha = 0.5 * (nu + t)
    out = np.empty_like(x)
    out[:-1] = (alpha / nu) * u
    out[-1] = alpha
    return out


def _proj_rsoc(x: np.ndarray) -> np.ndarray:
    # orthogonal change of variables (u, w) -> ((u - w)/sqrt2, (u + w)/sqrt2)
    # maps the rotated cone onto the radius-last second order cone
    u, w = x[-2], x[-1]
    if u >= 0 and w >= 0 and 2.0 * u * w >= x[:-2] @ x[:-2]:
        return x.copy()
    y = x.copy()
    y[-2] = (u - w) / _SQRT2
    y[-1] = (u + w) / _SQRT2
    p = _proj_soc(y)
    a, b = p[-2], p[-1]
    p[-2] = (a + b) / _SQRT2
    p[-1] = (b - a) / _SQRT2
    return p


def _proj_psd(x: np.ndarray, side: int) -> np.ndarray:
    rows, cols, scale = _triu(side)
    vals = x / scale
    M = np.empty((side, side))
    M[rows, cols] = vals
    M[cols, rows] = vals
    lam, Q = np.linalg.eigh(M)
    eps_e = 1e-12 * (1.0 + np.abs(lam).max())
    if lam[0] >= -eps_e:
        # already on the cone up to sign noise; reconstructing would only add rounding
        return x.copy()
    lam = np.maximum(lam, 0.0)
    P = (Q * lam) @ Q.T
    return P[rows, cols] * scale


def _proj_block(blk: ConeBlock, x: np.ndarray) -> np.ndarray:
    kind = blk.kind
    if kind == "nonneg":
        return np.maximum(x, 0.0)
    if kind == "soc":
        return _proj_soc(x)
    if kind == "rsoc":
        return _proj_rsoc(x)
    if kind == "psd":
        return _proj_psd(x, blk.size)
    if kind == "zero":
        return np.zeros_like(x)
    return x.copy()  # free


def project_cone(x: np.ndarray, cone: ConeSpec) -> np.ndarray:
    """Euclidean projection onto ``cone``, block by block."""
    x = cone.check(x)
    if len(cone.blocks) == 1:
        return _proj_block(cone.blocks[0], x)
    out = np.empty_like(x)
    for blk, sl in zip(cone.blocks, cone.slices):
        out[sl] = _proj_block(blk, x[sl])
    return out


def projector(cone: ConeSpec, dual: bool = False):
    """Return an unchecked ``x -> P_K(x)`` closure for hot loops."""
    blocks = [blk.dual() if dual else blk for blk in cone.blocks]
    if len(blocks) == 1:
        blk = blocks[0]
        if blk.kind == "nonneg":
            return lambda x: np.maximum(x, 0.0)
        if blk.kind == "soc":
            return _proj_soc
        if blk.kind == "psd":
            side = blk.size
            return lambda x: _proj_psd(x, side)
        return lambda x: _proj_block(blk, x)
    pairs = list(zip(blocks, cone.slices))

    def proj(x):
        out = np.empty_like(x)
        for blk, sl in pairs:
            out[sl] = _proj_block(blk, x[sl])
        return out

    return proj


def project_dual_cone(x: np.ndarray, cone: ConeSpec) -> np.ndarray:
    """Projection onto the dual cone K*.

    The result ``p`` satisfies ``x = p + q`` with ``q`` the projection of ``x``
    onto the polar cone ``-K`` and ``p @ q = 0``. Self-dual blocks reuse the
    primal projection; zero and free blocks swap roles.
    """
    x = cone.check(x)
    out = np.empty_like(x)
    for blk, sl in zip(cone.blocks, cone.slices):
        out[sl] = _proj_block(blk.dual(), x[sl])
    return out


def project_polar_cone(x: np.ndarray, cone: ConeSpec) -> np.ndarray:
    """Projection onto ``-K*`` (the polar cone), i.e. ``x - P_K(x)``."""
    return x - project_cone(x, cone)


def distance_to_cone(x: np.ndarray, cone: ConeSpec) -> float:
    x = cone.check(x)
    return float(np.linalg.norm(x - project_cone(x, cone)))


def distance_to_dual_cone(x: np.ndarray, cone: ConeSpec) -> float:
    x = cone.check(x)
    return float(np.linalg.norm(x - project_dual_cone(x, cone)))


def _interior_block(blk: ConeBlock, scale: float) -> np.ndarray:
    d = np.zeros(blk.dim)
    if blk.kind == "nonneg":
        d[:] = scale
    elif blk.kind == "soc":
        d[-1] = scale
    elif blk.kind == "rsoc":
        d[-2:] = scale
    elif blk.kind == "psd":
        d[:] = svec(np.eye(blk.size))
        d *= scale
    # zero and free blocks: the origin is in the relative interior
    return d


def interior_point(cone: ConeSpec, scale: float = 1.0) -> np.ndarray:
    """A point in the relative interior of ``cone``, scaled by ``scale``.

    Orthant blocks get the all-ones vector, second order blocks the unit
    radius, rotated blocks ones in both radius coordinates, PSD blocks the
    identity matrix. Zero and free blocks get the origin.
    """
    if not scale > 0:
        raise ValueError(f"interior scale must be positive, got {scale!r}")
    return np.concatenate([_interior_block(blk, scale) for blk in cone.blocks])


def dual_interior_point(cone: ConeSpec, scale: float = 1.0) -> np.ndarray:
    """A point in the relative interior of the dual cone."""
    return interior_point(cone.dual(), scale)
