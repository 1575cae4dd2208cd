import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lattice_approx.criterion import (
    class_sums,
    e_d,
    e_d_oracle,
    future_weights,
    s_d,
    s_d_from_table,
    s_d_oracle,
    t_ds,
    t_ds_candidates,
    t_ds_naive,
    theta_s,
    theta_s_oracle,
    theta_s_rearranged,
    worst_case_integration_error,
    worst_case_integration_error_oracle,
)
from lattice_approx.errors import BudgetExceededError
from lattice_approx.index_set import enumerate_index_set
from lattice_approx.korobov import CriterionContext, zeta
from lattice_approx.lattice import GeneratingVector
from lattice_approx.weights import WeightModel

from conftest import random_vector, random_weights


def test_zero_weights_give_zero():
    ctx = CriterionContext.make(2.0, WeightModel.general({}, 3), 7)
    assert s_d(ctx, (1, 2, 3)) == 0.0


def test_one_dimensional_s_against_oracle():
    ctx = CriterionContext.make(2.0, WeightModel.product([1.0]), 5)
    fast = s_d(ctx, (1,))
    oracle = s_d_oracle(ctx, (1,), H=2000)
    assert oracle.agrees_with(fast, 1e-8)
    assert oracle.tail_bound < 5e-3


def test_integration_error_closed_form():
    # the dual lattice of z = (1), n = 5 is 5Z, so e^2 = 2 zeta(2) / 25
    ctx = CriterionContext.make(2.0, WeightModel.product([1.0]), 5)
    assert worst_case_integration_error(ctx, (1,)) == pytest.approx(math.pi / (5 * math.sqrt(3)), rel=1e-14)
    oracle = worst_case_integration_error_oracle(ctx, (1,), H=1000)
    assert oracle.agrees_with(worst_case_integration_error(ctx, (1,)) ** 2, 1e-12)


def test_class_sums_total():
    # sum over all classes is sum_h 1/r(h) = sum_u gamma_u (2 zeta(alpha))^|u|
    w = WeightModel.product([0.5, 0.2])
    ctx = CriterionContext.make(2.0, w, 11)
    total = (1 + 0.5 * 2 * zeta(2)) * (1 + 0.2 * 2 * zeta(2))
    assert class_sums(ctx, (1, 4)).sum() == pytest.approx(total, rel=1e-13)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["product", "order", "pod", "general"]))
def test_structured_s_matches_table(seed, kind):
    rng = np.random.default_rng(seed)
    w = random_weights(rng, 3, kind)
    ctx = CriterionContext.make(2.0, w, 11)
    z = random_vector(rng, 11, 3)
    assert s_d(ctx, z) == pytest.approx(s_d_from_table(ctx, z, w.as_array()), rel=1e-12, abs=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([2.0, 4.0, 3.0]))
def test_theta_forms_agree(seed, alpha):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 5))
    w = random_weights(rng, d)
    ctx = CriterionContext.make(alpha, w, 13)
    z = random_vector(rng, 13, d)
    a, b = theta_s(ctx, z), theta_s_rearranged(ctx, z)
    assert a == pytest.approx(b, rel=1e-9, abs=1e-9)
    assert a >= -1e-12


def test_theta_against_oracle():
    w = WeightModel.product([0.8, 0.5])
    ctx = CriterionContext.make(2.0, w, 7)
    z = GeneratingVector(7, (1, 3))
    oracle = theta_s_oracle(ctx, z, H=400)
    assert oracle.agrees_with(theta_s(ctx, z), 1e-8)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["product", "order", "pod", "general"]))
def test_decomposition(seed, kind):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 5))
    w = random_weights(rng, d, kind)
    ctx = CriterionContext.make(2.0, w, 11)
    z = random_vector(rng, 11, d)
    parts = [t_ds(ctx, z.head(s)) for s in range(1, d + 1)]
    assert math.fsum(parts) == pytest.approx(s_d(ctx, z), rel=1e-9, abs=1e-12)
    for s in range(1, d + 1):
        assert parts[s - 1] == pytest.approx(t_ds_naive(ctx, z.head(s)), rel=1e-9, abs=1e-12)


def test_product_fast_path_matches_general():
    gam = [0.9, 0.4, 0.2, 0.1]
    prod = WeightModel.product(gam)
    gen = WeightModel.from_function(lambda u: math.prod(gam[j - 1] for j in u), 4)
    cp = CriterionContext.make(2.0, prod, 13)
    cg = CriterionContext.make(2.0, gen, 13)
    for s in range(1, 5):
        a = t_ds_candidates(cp, GeneratingVector(13, (1, 5, 2)[: s - 1]), s)
        b = t_ds_candidates(cg, GeneratingVector(13, (1, 5, 2)[: s - 1]), s)
        np.testing.assert_allclose(a, b, rtol=1e-12)


def test_candidates_match_single_evaluation():
    rng = np.random.default_rng(7)
    w = random_weights(rng, 3, "general")
    ctx = CriterionContext.make(2.0, w, 11)
    prev = GeneratingVector(11, (1, 4))
    cand = t_ds_candidates(ctx, prev, 3)
    for zs in range(1, 11):
        assert cand[zs - 1] == t_ds(ctx, GeneratingVector(11, (1, 4, zs)))


def test_t_ds_differs_from_weighted_s_by_constant():
    # T_{d,s}(z_s) - sum_w c^|w| S_s(z; gamma_{. + w}) does not depend on z_s,
    # so both criteria share their minimizers
    rng = np.random.default_rng(11)
    w = random_weights(rng, 3, "general")
    ctx = CriterionContext.make(2.0, w, 11)
    table = w.as_array()
    c = 2 * zeta(4.0)
    s = 2
    diffs = []
    for zs in range(1, 11):
        z = GeneratingVector(11, (3, zs))
        weighted = sum(
            c ** bin(i).count("1") * s_d_from_table(ctx, z, future_weights(table, s, i << s))
            for i in range(1 << (3 - s))
        )
        diffs.append(t_ds(ctx, z) - weighted)
    assert np.ptp(diffs) < 1e-10 * max(1.0, abs(diffs[0]))


def test_e_d_against_oracle_and_balance():
    w = WeightModel.product([1.0, 1.0])
    ctx = CriterionContext.make(2.0, w, 7)
    z = GeneratingVector(7, (1, 3))
    M = 5.0
    A = enumerate_index_set(ctx.space, M)
    value = e_d(ctx, z, A)
    assert e_d_oracle(ctx, z, A, H=400).agrees_with(value, 1e-8)
    assert value <= M * s_d(ctx, z)


def test_e_d_warns_when_n_small():
    ctx = CriterionContext.make(2.0, WeightModel.product([1.0]), 3)
    with pytest.warns(RuntimeWarning):
        e_d(ctx, (1,), 10.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        e_d(CriterionContext.make(2.0, WeightModel.product([1.0]), 11), (1,), 10.0)


def test_oracle_budget_and_radius():
    ctx = CriterionContext.make(2.0, WeightModel.product([1.0] * 3), 7, oracle_budget=1000)
    with pytest.raises(BudgetExceededError):
        s_d_oracle(ctx, (1, 2, 3), H=50)
    with pytest.raises(ValueError):
        s_d_oracle(ctx, (1, 2, 3), H=3)
    with pytest.raises(ValueError):
        s_d_oracle(ctx, (1, 2, 3))
