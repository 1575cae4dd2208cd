import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lattice_approx.korobov import (
    CriterionContext,
    FourierPolynomial,
    SpaceParams,
    bernoulli_numbers,
    bernoulli_poly,
    kernel_lattice_values,
    kernel_mode,
    kernel_phi,
    kernel_phi_series,
    norm_squared,
    phi_values,
    phi_weighted_sum,
    r,
    r_values,
    zeta,
)
from lattice_approx.lattice import GeneratingVector, lattice_points
from lattice_approx.weights import WeightModel


def test_zeta_values():
    assert zeta(2.0) == pytest.approx(math.pi**2 / 6, rel=1e-15)
    assert zeta(4.0) == pytest.approx(math.pi**4 / 90, rel=1e-15)
    with pytest.raises(ValueError):
        zeta(1.0)


def test_bernoulli_numbers():
    b = bernoulli_numbers(8)
    assert [str(v) for v in b] == ["1", "-1/2", "1/6", "0", "-1/30", "0", "1/42", "0", "-1/30"]
    assert bernoulli_poly(2, 0.25) == pytest.approx(0.0625 - 0.25 + 1 / 6)


def test_kernel_modes():
    assert kernel_mode(2) == "bernoulli"
    assert kernel_mode(10.0) == "bernoulli"
    assert kernel_mode(3) == "polylog"
    assert kernel_mode(2.5) == "polylog"


def test_kernel_at_zero_is_twice_zeta():
    for alpha in (2.0, 3.0, 4.0, 2.5):
        assert kernel_phi(alpha, 0.0) == pytest.approx(2 * zeta(alpha), rel=1e-13)


def test_kernel_alpha2_closed_form():
    x = np.linspace(0, 1, 11)
    expected = 2 * math.pi**2 * (x**2 - x + 1 / 6)
    np.testing.assert_allclose(kernel_phi(2.0, x), expected, rtol=0, atol=1e-13)


@pytest.mark.parametrize("alpha", [2.0, 3.0, 4.0, 2.5, 6.0])
def test_kernel_against_series(alpha):
    x = np.array([0.1, 0.37, 0.5, 0.9])
    series, tail = kernel_phi_series(alpha, x, 20000)
    np.testing.assert_allclose(kernel_phi(alpha, x), series, rtol=0, atol=tail + 1e-12)


def test_kernel_high_even_order_accuracy():
    # compare against mpmath at 30 digits
    x = 0.49
    ref = float(2 * mpmath.re(mpmath.polylog(10, mpmath.expjpi(2 * mpmath.mpf(x)))))
    assert kernel_phi(10.0, x) == pytest.approx(ref, rel=1e-14, abs=1e-14)


@pytest.mark.parametrize("alpha", [2.0, 3.0, 2.5])
def test_lattice_values_match_kernel(alpha):
    n = 13
    vals = kernel_lattice_values(alpha, n)
    np.testing.assert_allclose(vals, kernel_phi(alpha, np.arange(n) / n), rtol=1e-12, atol=1e-12)
    assert not vals.flags.writeable


def test_r_and_zero_weights():
    params = SpaceParams(2.0, WeightModel.general({(1,): 0.5}, 2))
    assert r(params, (0, 0)) == 1.0
    assert r(params, (2, 0)) == 8.0
    assert math.isinf(r(params, (0, 1)))
    vals = r_values(params, np.array([[0, 0], [2, 0], [0, 1], [1, 1]]))
    assert vals[:2].tolist() == [1.0, 8.0] and np.isinf(vals[2:]).all()
    with pytest.raises(ValueError):
        r(params, (1,))


def test_context_validation():
    with pytest.raises(ValueError):
        CriterionContext.make(2.0, WeightModel.product([1.0]), 9)
    with pytest.raises(ValueError):
        CriterionContext.make(2.0, WeightModel.product([1.0]), 7, oracle_H=5)
    with pytest.raises(ValueError):
        SpaceParams(1.0, WeightModel.product([1.0]))


def test_fourier_polynomial_basics():
    f = FourierPolynomial({(1, 0): 1 + 1j, (-1, 0): 1 - 1j, (0, 0): 2.0}, 2, real=True)
    x = np.array([[0.25, 0.3]])
    expected = 2 + 2 * (math.cos(math.pi / 2) - math.sin(math.pi / 2))
    assert f(x)[0] == pytest.approx(expected)
    assert f.l2_norm_squared() == pytest.approx(8.0)
    params = SpaceParams(2.0, WeightModel.product([0.5, 1.0]))
    assert norm_squared(params, f) == pytest.approx(4 + 2 * 2 * 2)
    with pytest.raises(ValueError):
        FourierPolynomial({(1, 0): 1j}, 2, real=True)
    with pytest.raises(ValueError):
        norm_squared(SpaceParams(2.0, WeightModel.general({}, 2)), f)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([5, 7, 11]), st.integers(1, 12), st.integers(1, 12),
       st.sampled_from([2.0, 4.0]))
def test_phi_values_against_kernel_sum(n, a, b, alpha):
    z = GeneratingVector(n, (a % n or 1, b % n or 1))
    w = WeightModel.product([0.7, 0.3])
    ctx = CriterionContext.make(alpha, w, n)
    pts = lattice_points(z)
    for k in (1, n):
        x = pts[k - 1]
        expected = (1 + 0.7 * kernel_phi(alpha, x[0])) * (1 + 0.3 * kernel_phi(alpha, x[1]))
        assert phi_weighted_sum(ctx, k, z) == pytest.approx(expected, rel=1e-12)
    assert phi_values(ctx, z).shape == (n,)
