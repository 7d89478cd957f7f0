"""Weakly infeasible SDP instances and the integer congruence obfuscation."""

from __future__ import annotations

import numpy as np

from .core import SdpInstance

__all__ = ["generate_weakly_infeasible_sdp", "messy_transform", "apply_messy", "sample_invertible"]

MAX_DRAWS = 1000


def _unit_sym(i, j, n):
    M = np.zeros((n, n))
    M[i, j] += 0.5
    M[j, i] += 0.5
    return M


def generate_weakly_infeasible_sdp(n: int, m: int, seed) -> SdpInstance:
    """A clean weakly infeasible SDP of side ``n`` with ``m`` constraints.

    The top-left 2x2 block carries ``X11 = 0, X12 = 1``: no PSD matrix fits,
    yet the distance to the cone vanishes as ``X22`` grows (the negative
    eigenvalue of ``[[0, 1], [1, t]]`` is about ``-1/t``). The other ``m - 2``
    constraints are random and act on the trailing ``(n-2) x (n-2)`` block
    only, with right-hand sides taken from a positive definite point so they
    never interfere with the core.
    """
    if n < 2 or m < 2:
        raise ValueError(f"need n >= 2 and m >= 2, got n={n}, m={m}")
    k = n - 2
    if m - 2 > k * (k + 1) // 2:
        raise ValueError(f"m - 2 = {m - 2} padding constraints do not fit in a {k}x{k} block")
    rng = np.random.default_rng(seed)

    mats = [_unit_sym(0, 0, n), _unit_sym(0, 1, n)]
    b = [0.0, 1.0]
    if m > 2:
        G = rng.standard_normal((k, k))
        X_pad = G @ G.T / k + np.eye(k)
        for _ in range(m - 2):
            B = rng.standard_normal((k, k))
            B = (B + B.T) / 2
            M = np.zeros((n, n))
            M[2:, 2:] = B
            mats.append(M)
            b.append(float(np.sum(B * X_pad)))
    Cg = rng.standard_normal((n, n))
    C = (Cg + Cg.T) / 2
    return SdpInstance(A=tuple(mats), b=np.array(b), C=C, ground_truth="g", name=f"wisdp-n{n}-m{m}-s{seed}")


def _exact_det(M: np.ndarray) -> int:
    from sympy import Matrix

    return int(Matrix(M.astype(int).tolist()).det(method="bareiss"))


def sample_invertible(rng: np.random.Generator, size: int, low: int = -2, high: int = 2) -> np.ndarray:
    """Uniform integer matrix with entries in ``[low, high]`` and nonzero determinant."""
    for _ in range(MAX_DRAWS):
        M = rng.integers(low, high + 1, size=(size, size))
        if _exact_det(M) != 0:
            return M
    raise RuntimeError(f"no invertible {size}x{size} integer matrix in {MAX_DRAWS} draws")


def apply_messy(inst: SdpInstance, T: np.ndarray, U: np.ndarray) -> SdpInstance:
    """``A_i <- U^T (sum_j T_ij A_j) U``, ``b <- T b``, ``C <- U^T C U``."""
    T = np.asarray(T, dtype=float)
    U = np.asarray(U, dtype=float)
    if T.shape != (inst.m, inst.m) or U.shape != (inst.n, inst.n):
        raise ValueError("T must be m x m and U must be n x n")
    stack = np.stack(inst.A)
    mixed = np.einsum("ij,jkl->ikl", T, stack)
    mats = tuple(U.T @ M @ U for M in mixed)
    # exact symmetry; the products above are symmetric only up to rounding
    mats = tuple((M + M.T) / 2 for M in mats)
    C = U.T @ inst.C @ U
    return SdpInstance(
        A=mats,
        b=T @ inst.b,
        C=(C + C.T) / 2,
        ground_truth=inst.ground_truth,
        name=inst.name + "-messy" if inst.name else "messy",
    )


def messy_transform(inst: SdpInstance, seed) -> SdpInstance:
    """Mix the constraints with a random invertible integer ``T`` and apply the
    congruence ``X -> U X U^T`` for a random invertible integer ``U``.

    Both are drawn with entries in ``{-2, ..., 2}``. Feasibility status is
    unchanged, so the ground truth label carries over.
    """
    rng = np.random.default_rng(seed)
    T = sample_invertible(rng, inst.m)
    U = sample_invertible(rng, inst.n)
    return apply_messy(inst, T, U)
