import numpy as np
import pytest

from drscert.affine import build_projector, project_affine


def test_projector_matches_dense_formula(rng):
    for _ in range(20):
        m, n = rng.integers(1, 6), rng.integers(6, 12)
        A = rng.standard_normal((m, n))
        b = rng.standard_normal(m)
        P = build_projector(A, b)
        D = np.eye(n) - A.T @ np.linalg.solve(A @ A.T, A)
        x0 = A.T @ np.linalg.solve(A @ A.T, b)
        np.testing.assert_allclose(P.dense_D(), D, atol=1e-12)
        np.testing.assert_allclose(P.x0, x0, atol=1e-12)
        x = rng.standard_normal(n)
        y = project_affine(P, x)
        np.testing.assert_allclose(A @ y, b, atol=1e-10)
        # the correction is orthogonal to the null space
        np.testing.assert_allclose(D @ (x - y), 0, atol=1e-10)
        np.testing.assert_allclose(P.nullspace(x) + P.rowspace(x), x, atol=1e-12)


def test_basis_is_orthonormal(rng):
    A = rng.standard_normal((4, 9))
    P = build_projector(A, np.zeros(4))
    np.testing.assert_allclose(P.basis.T @ P.basis, np.eye(4), atol=1e-12)


def test_dependent_rows_are_dropped():
    A = np.array([[1.0, 0, 0], [0, 1, 0], [1, 1, 0]])
    b = np.array([1.0, 2, 3])
    P = build_projector(A, b)
    assert P.effective_rank == 2 and P.consistent
    np.testing.assert_allclose(A @ P.x0, b, atol=1e-12)


def test_inconsistent_rows_give_farkas_vector():
    A = np.array([[1.0, 0, 0], [0, 1, 0], [1, 1, 0]])
    b = np.array([1.0, 2, 4])
    P = build_projector(A, b)
    assert not P.consistent
    y = P.inconsistency.y
    np.testing.assert_allclose(A.T @ y, 0, atol=1e-12)
    assert b @ y == pytest.approx(1.0)
    with pytest.raises(ValueError, match="inconsistent"):
        project_affine(P, np.zeros(3))
    # the null space part stays usable
    np.testing.assert_allclose(project_affine(P, np.array([0, 0, 5.0]), to_nullspace=True), [0, 0, 5])


@pytest.mark.parametrize("A,b", [(np.zeros((2, 3)), np.zeros(2)), (np.array([[np.nan, 1.0]]), np.ones(1))])
def test_bad_matrices(A, b):
    with pytest.raises(ValueError):
        build_projector(A, b)


def test_shape_mismatch():
    with pytest.raises(ValueError, match="b has shape"):
        build_projector(np.eye(2), np.ones(3))
    P = build_projector(np.eye(2), np.ones(2))
    with pytest.raises(ValueError, match="point has shape"):
        project_affine(P, np.ones(3))


def test_badly_scaled_rows(rng):
    A = rng.standard_normal((3, 6)) * np.array([[1e-4], [1.0], [1e4]])
    b = rng.standard_normal(3)
    P = build_projector(A, b)
    assert P.effective_rank == 3
    np.testing.assert_allclose(A @ P(rng.standard_normal(6)), b, rtol=1e-8, atol=1e-8)
