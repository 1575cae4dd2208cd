import numpy as np
import pytest

from lattice_approx import CriterionContext, GeneratingVector, WeightModel


def random_weights(rng: np.random.Generator, d: int, kind: str | None = None) -> WeightModel:
    """One of the four weight families with random positive parameters."""
    kind = kind or rng.choice(["product", "order", "pod", "general"])
    if kind == "product":
        return WeightModel.product(rng.uniform(0.05, 1.5, d))
    if kind == "order":
        return WeightModel.order_dependent([1.0, *rng.uniform(0.05, 1.5, d)])
    if kind == "pod":
        return WeightModel.pod([1.0, *rng.uniform(0.2, 2.0, d)], rng.uniform(0.05, 1.0, d))
    table = {m: float(rng.uniform(0.0, 1.5)) for m in range(1, 1 << d)}
    # knock out a few subsets so zero weights get exercised
    for m in rng.choice(range(1, 1 << d), size=(1 << d) // 4, replace=False):
        table[int(m)] = 0.0
    return WeightModel.general(table, d)


def random_vector(rng: np.random.Generator, n: int, d: int) -> GeneratingVector:
    return GeneratingVector(n, tuple(int(v) for v in rng.integers(1, n, d)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def ctx_small():
    return CriterionContext.make(2.0, WeightModel.product([1.0, 1.0]), 7)
