import json

import numpy as np
import pytest

from drscert.cones import ConeSpec, distance_to_cone, smat, svec
from drscert.problems import (
    GALLERY_IDS,
    ConicProblem,
    ProblemFormatError,
    SdpInstance,
    apply_messy,
    canonical_example,
    gallery,
    generate_weakly_infeasible_sdp,
    messy_transform,
    read_problem,
    sample_invertible,
    write_problem,
)


def test_gallery_a_and_g_data():
    a = canonical_example("a")
    np.testing.assert_array_equal(a.A, [[1, 0, 0]])
    np.testing.assert_array_equal(a.b, [1])
    np.testing.assert_array_equal(a.c, [0, 0, 1])
    assert a.cone == ConeSpec.single("soc", 3) and a.ground_truth == "a"
    g = canonical_example("g")
    np.testing.assert_array_equal(g.A, [[0, 1, 1], [1, 0, 0]])
    np.testing.assert_array_equal(g.b, [0, 1])
    assert g.ground_truth == "g"


def test_gallery_truths_and_unknown_id():
    truths = {gid: p.ground_truth for gid, p in gallery().items()}
    assert truths == {"a": "a", "b": "b", "b_sdp": "b", "b_counter": "b", "c": "c",
                      "d": "d", "e": "e", "f": "f", "g": "g"}
    with pytest.raises(KeyError, match="unknown gallery id"):
        canonical_example("h")


def test_gallery_worked_solutions():
    a = canonical_example("a")
    x = np.array([1.0, 0, 1])
    assert np.allclose(a.A @ x, a.b) and distance_to_cone(x, a.cone) == 0 and a.objective(x) == 1
    b = canonical_example("b")
    assert np.allclose(b.A @ x, b.b) and b.objective(x) == 0
    # case c: feasible points (sqrt2, 1/t, t) have objective t -> 0 without reaching it
    c = canonical_example("c")
    for t in (1.0, 1e-3):
        y = np.array([np.sqrt(2), 1 / t, t])
        assert np.allclose(c.A @ y, c.b) and distance_to_cone(y, c.cone) <= 1e-12
    # case d: u = (-1, 0, 1) is an improving direction
    d = canonical_example("d")
    u = np.array([-1.0, 0, 1])
    assert np.allclose(d.A @ u, 0) and distance_to_cone(u, d.cone) == 0 and d.objective(u) == -1


def test_b_sdp_values():
    p = canonical_example("b_sdp")
    inst = SdpInstance.from_problem(p)
    # primal: X = e3 e3^T is feasible with objective 0
    X = np.zeros((3, 3))
    X[2, 2] = 1.0
    np.testing.assert_allclose([np.sum(M * X) for M in inst.A], inst.b)
    assert np.sum(inst.C * X) == 0
    # dual: y = (0, -2) keeps C - sum y_i A_i psd with value b^T y = -2
    y = np.array([0.0, -2.0])
    S = inst.C - sum(yi * M for yi, M in zip(y, inst.A))
    assert np.linalg.eigvalsh(S).min() >= -1e-12
    assert inst.b @ y == -2


def test_problem_validation():
    cone = ConeSpec.single("soc", 3)
    with pytest.raises(ValueError, match="b has"):
        ConicProblem([[1, 0, 0]], [1, 2], [0, 0, 0], cone)
    with pytest.raises(ValueError, match="c has"):
        ConicProblem([[1, 0, 0]], [1], [0, 0], cone)
    with pytest.raises(ValueError, match="cone has"):
        ConicProblem([[1, 0]], [1], [0, 0], cone)
    p = canonical_example("a")
    with pytest.raises(ValueError):
        p.A[0, 0] = 2.0


# --- generator -------------------------------------------------------------


def test_bare_core():
    inst = generate_weakly_infeasible_sdp(2, 2, seed=0)
    assert inst.n == 2 and inst.m == 2 and inst.ground_truth == "g"
    np.testing.assert_array_equal(inst.b, [0, 1])
    # every feasible candidate [[0, 1], [1, t]] has determinant -1
    for t in (0.0, 1.0, 1e6):
        X = np.array([[0.0, 1.0], [1.0, t]])
        np.testing.assert_allclose([np.sum(M * X) for M in inst.A], inst.b)
        lam = np.linalg.eigvalsh(X)
        assert lam[0] < 0
        # smallest eigenvalue -2 / (t + sqrt(t^2 + 4)) tends to zero
        assert lam[0] == pytest.approx(-2 / (t + np.sqrt(t * t + 4)), rel=1e-6)


def test_generator_structure():
    inst = generate_weakly_infeasible_sdp(10, 10, seed=3)
    assert inst.m == 10 and inst.n == 10
    for M in inst.A[2:]:
        assert np.all(M[:2, :] == 0) and np.all(M[:, :2] == 0)
    # the padding constraints are met by a positive definite trailing block
    p = inst.to_problem()
    assert p.A.shape == (10, 55) and p.cone == ConeSpec.single("psd", 10)


def test_generator_determinism_and_seeds():
    a = generate_weakly_infeasible_sdp(6, 5, seed=11).to_problem()
    b = generate_weakly_infeasible_sdp(6, 5, seed=11).to_problem()
    c = generate_weakly_infeasible_sdp(6, 5, seed=12).to_problem()
    assert write_problem(a) == write_problem(b)
    assert not a.same_data(c) and a.ground_truth == c.ground_truth == "g"


def test_generator_rejects_bad_sizes():
    with pytest.raises(ValueError):
        generate_weakly_infeasible_sdp(1, 2, 0)
    with pytest.raises(ValueError, match="do not fit"):
        generate_weakly_infeasible_sdp(3, 10, 0)


# --- messy transform -------------------------------------------------------


def test_identity_transform():
    inst = generate_weakly_infeasible_sdp(5, 4, seed=1)
    out = apply_messy(inst, np.eye(4), np.eye(5))
    for M, N in zip(inst.A, out.A):
        np.testing.assert_array_equal(M, N)
    np.testing.assert_array_equal(out.b, inst.b)


def test_messy_is_invertible_and_keeps_truth():
    inst = generate_weakly_infeasible_sdp(6, 6, seed=2)
    rng = np.random.default_rng(5)
    T = sample_invertible(rng, 6)
    U = sample_invertible(rng, 6)
    assert set(np.unique(T)) <= {-2, -1, 0, 1, 2}
    messy = apply_messy(inst, T, U)
    assert messy.ground_truth == "g"
    # undo: A_j = U^{-T} (sum_i (T^{-1})_{ji} A'_i) U^{-1}, b = T^{-1} b'
    Ti, Ui = np.linalg.inv(T), np.linalg.inv(U)
    for j in range(6):
        back = Ui.T @ sum(Ti[j, i] * messy.A[i] for i in range(6)) @ Ui
        np.testing.assert_allclose(back, inst.A[j], atol=1e-9)
    np.testing.assert_allclose(Ti @ messy.b, inst.b, atol=1e-9)


def test_messy_zero_rhs_stays_zero():
    inst = generate_weakly_infeasible_sdp(4, 3, seed=0)
    zero = SdpInstance(A=inst.A, b=np.zeros(3), C=inst.C)
    assert np.all(messy_transform(zero, 9).b == 0)


def test_messy_determinism():
    inst = generate_weakly_infeasible_sdp(5, 5, seed=4)
    a, b = messy_transform(inst, 3), messy_transform(inst, 3)
    assert write_problem(a.to_problem()) == write_problem(b.to_problem())


def test_singular_draws_exhaust_budget():
    class Zeros:
        def integers(self, low, high, size):
            return np.zeros(size, dtype=int)

    with pytest.raises(RuntimeError, match="1000 draws"):
        sample_invertible(Zeros(), 3)


def test_sdp_instance_checks_symmetry():
    with pytest.raises(ValueError, match="not symmetric"):
        SdpInstance(A=(np.array([[0.0, 1.0], [0.0, 0.0]]),), b=[1.0], C=np.eye(2))


# --- documents -------------------------------------------------------------


def test_minimal_document():
    doc = '{"A": [[1, 0, 0]], "b": [1], "c": [0, 0, 1], "cones": [{"type": "soc", "dim": 3}]}'
    p = read_problem(doc)
    assert p.same_data(canonical_example("a"))


@pytest.mark.parametrize("gid", GALLERY_IDS)
def test_round_trip(gid):
    p = canonical_example(gid)
    q = read_problem(write_problem(p))
    assert q.same_data(p) and q.name == p.name and q.ground_truth == p.ground_truth


@pytest.mark.parametrize(
    "doc,field",
    [
        ({"A": [[1, 0]], "b": [1], "c": [0, 0], "cones": [{"type": "soc", "dim": 3}]}, "cones"),
        ({"A": [[1, 0, 0]], "b": [1], "cones": [{"type": "soc", "dim": 3}]}, "c"),
        ({"A": [[1, 0, 0], [1, 0]], "b": [1, 1], "c": [0, 0, 0], "cones": [{"type": "soc", "dim": 3}]}, "A[1]"),
        ({"A": [[1, 0, 0]], "b": [1, 2], "c": [0, 0, 0], "cones": [{"type": "soc", "dim": 3}]}, "b"),
        ({"A": [[1, 0, 0]], "b": [1], "c": [0, 0, 0], "cones": [{"type": "cube", "dim": 3}]}, "cones[0].type"),
        ({"A": [[1, 0, 0]], "b": [1], "c": [0, 0, 0], "cones": [{"type": "soc", "dim": 0}]}, "cones[0].dim"),
        ({"A": [[1, "x", 0]], "b": [1], "c": [0, 0, 0], "cones": [{"type": "soc", "dim": 3}]}, "A[0][1]"),
        ({"A": [[1, 0, 0]], "b": [1], "c": [0, 0, 0], "cones": [{"type": "soc", "dim": 3}], "extra": 1}, "extra"),
        ({"A": [[1, 0, 0]], "b": [1], "c": [0, 0, 0], "cones": [{"type": "soc", "dim": 3}],
          "ground_truth": "z"}, "ground_truth"),
    ],
)
def test_schema_errors_name_the_field(doc, field):
    with pytest.raises(ProblemFormatError) as err:
        read_problem(json.dumps(doc))
    assert err.value.field == field
    assert repr(field) in str(err.value)


def test_json_syntax_error_reports_line():
    with pytest.raises(ProblemFormatError) as err:
        read_problem('{\n "A": [[1, 0, 0]],\n "b": [1,,]\n}')
    assert err.value.line == 3


def test_psd_document_dim_is_side():
    p = canonical_example("b_sdp")
    doc = json.loads(write_problem(p))
    assert doc["cones"] == [{"type": "psd", "dim": 3}] and len(doc["c"]) == 6
    np.testing.assert_allclose(smat(p.c), 2 * np.array([[0, 0.5, 0], [0.5, 0, 0], [0, 0, 0]]))
    assert svec(smat(p.c)).tolist() == p.c.tolist()
