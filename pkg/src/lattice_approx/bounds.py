"""
Closed-form error bounds for CBC lattice approximation with general weights.

Every bound is stated for an exponent lambda in (1/alpha, 1]; any
admissible lambda gives a valid bound, so reports typically scan a grid
and keep the smallest value.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .korobov import CriterionContext, SpaceParams, zeta
from .weights import WeightModel, check_decay_condition, popcount

__all__ = [
    "tau",
    "lambda_grid",
    "weight_sum",
    "cbc_bound_final",
    "theta_average_bound",
    "auto_M",
    "approx_error_bound",
    "approx_error_envelope",
    "simplified_bound",
    "initial_errors",
    "cardinality_factor_bound",
    "zeta_power_inequality",
    "integration_cbc_bound",
    "loglog_slope",
    "bound_report",
]


def _check_lambda(alpha: float, lam: float) -> None:
    if not alpha * lam > 1:
        raise ValueError(f"alpha * lambda = {alpha * lam} must exceed 1")
    if lam > 1:
        raise ValueError(f"lambda = {lam} must not exceed 1")


def tau(alpha: float, lam: float) -> float:
    """Averaging constant max(6, 2.5 + 2^(2 alpha lambda + 1))."""
    if not alpha * lam > 1:
        raise ValueError(f"alpha * lambda = {alpha * lam} must exceed 1")
    return max(6.0, 2.5 + 2.0 ** (2.0 * alpha * lam + 1.0))


def lambda_grid(alpha: float, step: float = 0.05) -> list[float]:
    """1, 1 - step, ... down to the last value >= 1/alpha + step."""
    lo = 1.0 / alpha + step - 1e-12
    grid = []
    k = 0
    while True:
        lam = round(1.0 - k * step, 12)
        if lam < lo:
            break
        grid.append(lam)
        k += 1
    return grid


def weight_sum(model: WeightModel, alpha: float, lam: float, cardinality: str = "one") -> float:
    """
    sum_u kappa(u) gamma_u^lambda [2 zeta(alpha lambda)]^|u|.

    ``cardinality`` selects kappa(u): ``"one"``, ``"size"`` (|u|) or
    ``"size_or_one"`` (max(|u|, 1)).
    """
    if not alpha * lam > 1:
        raise ValueError(f"alpha * lambda = {alpha * lam} must exceed 1")
    c = 2.0 * zeta(alpha * lam)
    return float(model.powered(lam).subset_sum([c] * model.d, cardinality))


def cbc_bound_final(
    ctx: CriterionContext,
    lam: float,
    use_decay: bool = False,
    xi: float | None = None,
    d: int | None = None,
) -> float:
    """
    Upper bound on S_d(z) for the CBC vector z.

    Default form:
        [ tau/n (sum_{u != {}} |u| gamma_u^l c^|u|) (sum_u gamma_u^l c^|u|) ]^(1/l)
    with c = 2 zeta(alpha l). With ``use_decay`` the |u| factor becomes 1
    and tau becomes tau * xi; ``xi`` defaults to the smallest admissible
    value for the weights.
    """
    _check_lambda(ctx.alpha, lam)
    d = ctx.d if d is None else d
    weights = ctx.weights if d == ctx.d else ctx.weights.restrict(d)
    full = weight_sum(weights, ctx.alpha, lam, "one")
    t = tau(ctx.alpha, lam)
    if use_decay:
        if xi is None:
            xi = check_decay_condition(weights, ctx.alpha, lam)
        if math.isinf(xi):
            raise ValueError("weights do not satisfy the decay condition for any xi")
        first = full - 1.0
        t *= xi
    else:
        first = weight_sum(weights, ctx.alpha, lam, "size")
    return (t / ctx.n * first * full) ** (1.0 / lam)


def theta_average_bound(alpha: float, n: int, lam: float, beta: np.ndarray) -> float:
    """
    Right-hand side of the averaging bound for theta_s over z_s.

    ``beta`` is a table of 2^s weights indexed by bitmask; the first factor
    sums over subsets containing the last coordinate s.
    """
    _check_lambda(alpha, lam)
    beta = np.asarray(beta, dtype=float)
    s = beta.size.bit_length() - 1
    c = 2.0 * zeta(alpha * lam)
    card = np.array([popcount(m) for m in range(beta.size)])
    terms = beta**lam * c**card
    with_s = math.fsum(terms[1 << (s - 1) :])
    return tau(alpha, lam) / n * with_s * math.fsum(terms)


def auto_M(n: int, lam: float) -> float:
    """Balancing choice M = n^(1/(2 lambda))."""
    return n ** (1.0 / (2.0 * lam))


def approx_error_bound(M: float, s_value: float) -> float:
    """(1/M + M S_d)^(1/2), a bound on the worst-case L2 approximation error."""
    if not M > 0:
        raise ValueError("M must be positive")
    return math.sqrt(1.0 / M + M * max(s_value, 0.0))


def approx_error_envelope(ctx: CriterionContext, lam: float, M: float | None = None) -> float:
    """Two-term bound with S_d replaced by its CBC envelope."""
    M = auto_M(ctx.n, lam) if M is None else M
    return approx_error_bound(M, cbc_bound_final(ctx, lam))


def simplified_bound(ctx: CriterionContext, lam: float, use_decay: bool = False, xi: float | None = None) -> float:
    """
    sqrt(2) tau^(1/(2l)) n^(-1/(4l)) (sum_u max(|u|,1) gamma_u^l c^|u|)^(1/l).

    With ``use_decay`` the cardinality factor is dropped and tau -> tau xi.
    """
    _check_lambda(ctx.alpha, lam)
    t = tau(ctx.alpha, lam)
    if use_decay:
        if xi is None:
            xi = check_decay_condition(ctx.weights, ctx.alpha, lam)
        if math.isinf(xi):
            raise ValueError("weights do not satisfy the decay condition for any xi")
        t *= xi
        total = weight_sum(ctx.weights, ctx.alpha, lam, "one")
    else:
        total = weight_sum(ctx.weights, ctx.alpha, lam, "size_or_one")
    return math.sqrt(2.0) * t ** (1.0 / (2.0 * lam)) * ctx.n ** (-1.0 / (4.0 * lam)) * total ** (1.0 / lam)


def initial_errors(params: SpaceParams) -> tuple[float, float]:
    """(initial integration error, initial approximation error) = (1, max_u gamma_u^(1/2))."""
    return 1.0, math.sqrt(params.weights.max_weight())


def cardinality_factor_bound() -> float:
    """e^(1/e), which dominates max(|u|, 1)^(1/|u|)."""
    return math.exp(1.0 / math.e)


def zeta_power_inequality(alpha: float, lam: float) -> tuple[float, float]:
    """Return ([2 zeta(2 alpha)]^lambda, [2 zeta(alpha lambda)]^2); the first never exceeds the second."""
    _check_lambda(alpha, lam)
    return (2.0 * zeta(2.0 * alpha)) ** lam, (2.0 * zeta(alpha * lam)) ** 2


def integration_cbc_bound(ctx: CriterionContext, lam: float) -> float:
    """Squared integration error bound [(1/(n-1)) sum_u gamma_u^l c^|u|]^(1/l) of integration CBC."""
    _check_lambda(ctx.alpha, lam)
    return (weight_sum(ctx.weights, ctx.alpha, lam, "one") / (ctx.n - 1)) ** (1.0 / lam)


def loglog_slope(ns: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(values) against log(ns)."""
    slope, _ = np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)
    return float(slope)


def bound_report(ctx: CriterionContext, s_value: float, lam: float, M: float | None = None) -> dict:
    """Record {n, d, lambda, M, S_d, bound, simplified} for one lambda."""
    M = auto_M(ctx.n, lam) if M is None else M
    return {
        "n": ctx.n,
        "d": ctx.d,
        "lambda": lam,
        "M": M,
        "S_d": s_value,
        "S_d_bound": cbc_bound_final(ctx, lam),
        "bound": approx_error_bound(M, s_value),
        "simplified": simplified_bound(ctx, lam),
    }
