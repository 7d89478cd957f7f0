import numpy as np
import pytest

from drscert.cones import ConeBlock, ConeSpec


def random_cone(rng, max_blocks=4):
    """A random product cone mixing every kind."""
    blocks = []
    for _ in range(rng.integers(1, max_blocks + 1)):
        kind = rng.choice(["nonneg", "soc", "rsoc", "psd", "zero", "free"])
        if kind == "psd":
            size = int(rng.integers(1, 5))
        elif kind == "rsoc":
            size = int(rng.integers(3, 7))
        elif kind == "soc":
            size = int(rng.integers(2, 7))
        else:
            size = int(rng.integers(1, 5))
        blocks.append(ConeBlock(str(kind), size))
    return ConeSpec(blocks)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def cone_zoo():
    g = np.random.default_rng(7)
    fixed = [
        ConeSpec.single("nonneg", 4),
        ConeSpec.single("soc", 3),
        ConeSpec.single("rsoc", 3),
        ConeSpec.single("psd", 3),
        ConeSpec.from_pairs([("zero", 2), ("free", 2), ("soc", 4)]),
    ]
    return fixed + [random_cone(g) for _ in range(15)]


def infeasible_lp(rng):
    """A random LP over the orthant whose rows admit ``y`` with ``A^T y >= 0``, ``b^T y = -1``."""
    from drscert.problems import ConicProblem

    n = int(rng.integers(3, 11))
    m = int(rng.integers(1, n))
    A = rng.standard_normal((m, n))
    y = rng.standard_normal(m)
    s = np.abs(rng.standard_normal(n))
    A[-1] = (s - A[:-1].T @ y[:-1]) / y[-1]
    b = rng.standard_normal(m)
    b -= (b @ y + 1.0) * y / (y @ y)
    return ConicProblem(A, b, np.zeros(n), ConeSpec.single("nonneg", n), name="lp", ground_truth="f")
