import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from drscert import _kernels
from drscert.cones import (
    ConeBlock,
    ConeDimensionError,
    ConeSpec,
    distance_to_cone,
    distance_to_dual_cone,
    dual_interior_point,
    interior_point,
    project_cone,
    project_dual_cone,
    project_polar_cone,
    projector,
    smat,
    svec,
)

SOC3 = ConeSpec.single("soc", 3)
RSOC3 = ConeSpec.single("rsoc", 3)


def rand_sym(rng, k):
    G = rng.standard_normal((k, k))
    return (G + G.T) / 2


# --- svec / smat -------------------------------------------------------------


def test_svec_small_example():
    np.testing.assert_allclose(svec(np.array([[1.0, 2.0], [2.0, 3.0]])), [1.0, 2.0 * np.sqrt(2.0), 3.0])


def test_svec_identity_inner_product():
    v = svec(np.eye(2))
    assert v @ v == pytest.approx(2.0)


def test_svec_rejects_asymmetric():
    with pytest.raises(ValueError, match="not symmetric"):
        svec(np.array([[1.0, 2.0], [2.1, 3.0]]))


def test_smat_rejects_non_triangular_length():
    with pytest.raises(ValueError, match="triangular"):
        smat(np.ones(4))


def test_svec_round_trip_and_inner_product(rng):
    for k in range(1, 8):
        A, B = rand_sym(rng, k), rand_sym(rng, k)
        back = smat(svec(A))
        assert np.max(np.abs(back - A)) <= 1e-14 * max(1.0, np.max(np.abs(A)))
        assert svec(A) @ svec(B) == pytest.approx(np.sum(A * B), rel=1e-13, abs=1e-13)


# --- block sizes and layout --------------------------------------------------


def test_block_dims():
    assert ConeBlock("psd", 4).dim == 10
    assert ConeBlock("soc", 3).dim == 3
    cone = ConeSpec.from_pairs([("nonneg", 2), ("psd", 2), ("soc", 3)])
    assert cone.total_dim == 8
    assert [(s.start, s.stop) for s in cone.slices] == [(0, 2), (2, 5), (5, 8)]


@pytest.mark.parametrize("kind,size", [("cube", 3), ("soc", 1), ("rsoc", 2), ("nonneg", 0), ("psd", 1.5)])
def test_bad_blocks(kind, size):
    with pytest.raises(ValueError):
        ConeBlock(kind, size)


def test_dimension_error_names_block():
    cone = ConeSpec.from_pairs([("nonneg", 2), ("soc", 3)])
    with pytest.raises(ConeDimensionError, match="block 1"):
        project_cone(np.ones(4), cone)
    with pytest.raises(ConeDimensionError, match="beyond the last block"):
        project_cone(np.ones(6), cone)


def test_dual_swaps_zero_and_free():
    cone = ConeSpec.from_pairs([("zero", 2), ("free", 3), ("soc", 3)])
    assert [b.kind for b in cone.dual().blocks] == ["free", "zero", "soc"]
    x = np.arange(8.0) - 3
    np.testing.assert_array_equal(project_dual_cone(x, cone)[:5], [-3, -2, 0, 0, 0])


# --- worked projections ------------------------------------------------------


def test_soc_projection_examples():
    np.testing.assert_allclose(project_cone(np.array([3.0, 4.0, 5.0]), SOC3), [3, 4, 5])
    np.testing.assert_allclose(project_cone(np.array([3.0, 4.0, -5.0]), SOC3), [0, 0, 0])
    # ||u|| = 1, t = 0: alpha = 1/2
    np.testing.assert_allclose(project_cone(np.array([1.0, 0.0, 0.0]), SOC3), [0.5, 0, 0.5])


def test_rsoc_projection_examples():
    # (0, 1, 1) satisfies 2 u w = 2 >= 0
    np.testing.assert_allclose(project_cone(np.array([0.0, 1.0, 1.0]), RSOC3), [0, 1, 1])
    # u, w both negative with no x: projects to the origin
    np.testing.assert_allclose(project_cone(np.array([0.0, -1.0, -2.0]), RSOC3), [0, 0, 0], atol=1e-15)
    p = project_cone(np.array([2.0, 0.5, 0.5]), RSOC3)
    assert 2 * p[1] * p[2] >= p[0] ** 2 - 1e-12


def test_psd_projection_clamps_eigenvalues(rng):
    M = rand_sym(rng, 4)
    lam, Q = np.linalg.eigh(M)
    expect = (Q * np.maximum(lam, 0)) @ Q.T
    got = smat(project_cone(svec(M), ConeSpec.single("psd", 4)))
    np.testing.assert_allclose(got, expect, atol=1e-12)


def test_psd_already_psd_returned_as_is(rng):
    G = rng.standard_normal((3, 3))
    x = svec(G @ G.T)
    np.testing.assert_array_equal(project_cone(x, ConeSpec.single("psd", 3)), x)


# --- interior points ---------------------------------------------------------


def test_interior_points_are_strictly_inside(cone_zoo):
    for cone in cone_zoo:
        d = interior_point(cone, 0.3)
        s = dual_interior_point(cone, 0.3)
        for blk, sl in zip(cone.blocks, cone.slices):
            x = d[sl]
            if blk.kind == "nonneg":
                assert np.all(x > 0)
            elif blk.kind == "soc":
                assert x[-1] > np.linalg.norm(x[:-1])
            elif blk.kind == "rsoc":
                assert x[-1] > 0 and x[-2] > 0 and 2 * x[-1] * x[-2] > x[:-2] @ x[:-2]
            elif blk.kind == "psd":
                assert np.linalg.eigvalsh(smat(x)).min() > 0
            else:
                assert np.all(x == 0)
        assert distance_to_cone(d, cone) == 0
        assert distance_to_dual_cone(s, cone) == 0


def test_interior_scale_must_be_positive():
    with pytest.raises(ValueError):
        interior_point(SOC3, 0.0)


# --- properties over many random trials ------------------------------------


def test_moreau_decomposition(cone_zoo):
    # x = P_K(x) + P_{-K*}(x) with the two parts orthogonal
    g = np.random.default_rng(11)
    worst = 0.0
    for t in range(10_000):
        cone = cone_zoo[t % len(cone_zoo)]
        x = g.standard_normal(cone.total_dim) * g.choice([1e-3, 1.0, 1e3])
        p = project_cone(x, cone)
        q = -project_dual_cone(-x, cone)
        scale = 1.0 + np.linalg.norm(x)
        worst = max(worst, np.linalg.norm(p + q - x) / scale, abs(p @ q) / scale**2)
        np.testing.assert_allclose(project_polar_cone(x, cone), x - p)
    assert worst <= 1e-10


def test_projection_idempotent_and_firmly_nonexpansive(cone_zoo):
    g = np.random.default_rng(12)
    for t in range(10_000):
        cone = cone_zoo[t % len(cone_zoo)]
        x = g.standard_normal(cone.total_dim) * 3
        y = g.standard_normal(cone.total_dim) * 3
        px, py = project_cone(x, cone), project_cone(y, cone)
        assert np.linalg.norm(project_cone(px, cone) - px) <= 1e-10 * (1 + np.linalg.norm(px))
        lhs = np.sum((px - py) ** 2)
        rhs = np.sum((x - y) ** 2) - np.sum(((x - px) - (y - py)) ** 2)
        assert lhs <= rhs + 1e-10 * (1 + np.sum((x - y) ** 2))


def test_projected_points_are_members(cone_zoo):
    g = np.random.default_rng(13)
    for cone in cone_zoo:
        for _ in range(50):
            p = project_cone(g.standard_normal(cone.total_dim), cone)
            for blk, sl in zip(cone.blocks, cone.slices):
                x = p[sl]
                if blk.kind == "nonneg":
                    assert np.all(x >= 0)
                elif blk.kind == "soc":
                    assert x[-1] >= np.linalg.norm(x[:-1]) - 1e-12
                elif blk.kind == "rsoc":
                    assert min(x[-1], x[-2]) >= -1e-12
                    assert 2 * x[-1] * x[-2] >= x[:-2] @ x[:-2] - 1e-10
                elif blk.kind == "psd":
                    assert np.linalg.eigvalsh(smat(x)).min() >= -1e-10
                elif blk.kind == "zero":
                    assert np.all(x == 0)


def test_closure_projector_matches(cone_zoo):
    g = np.random.default_rng(14)
    for cone in cone_zoo:
        x = g.standard_normal(cone.total_dim)
        np.testing.assert_array_equal(projector(cone)(x), project_cone(x, cone))
        np.testing.assert_array_equal(projector(cone, dual=True)(x), project_dual_cone(x, cone))


def test_compiled_projection_matches_numpy(cone_zoo):
    g = np.random.default_rng(15)
    for cone in cone_zoo:
        kinds, sizes, starts = _kernels.encode_cone(cone)
        for _ in range(200):
            x = g.standard_normal(cone.total_dim) * g.choice([1e-2, 1.0, 1e2])
            out = np.empty_like(x)
            _kernels.project_blocks(x, out, kinds, sizes, starts)
            np.testing.assert_allclose(out, project_cone(x, cone), rtol=1e-11, atol=1e-11 * np.linalg.norm(x))


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=8),
    st.floats(0.01, 100.0),
)
def test_soc_positive_homogeneity(vals, lam):
    x = np.array(vals)
    cone = ConeSpec.single("soc", len(vals))
    np.testing.assert_allclose(project_cone(lam * x, cone), lam * project_cone(x, cone), rtol=1e-10, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=3, max_size=8))
def test_rsoc_projection_is_nearest_among_samples(vals):
    x = np.array(vals)
    cone = ConeSpec.single("rsoc", len(vals))
    p = project_cone(x, cone)
    d = np.linalg.norm(x - p)
    # no cone point built from a perturbation of p lies closer
    g = np.random.default_rng(len(vals))
    for _ in range(20):
        q = project_cone(p + 0.1 * g.standard_normal(len(vals)), cone)
        assert np.linalg.norm(x - q) >= d - 1e-9 * (1 + np.linalg.norm(x))
