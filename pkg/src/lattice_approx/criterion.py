"""
Lattice error criteria for a rank-1 lattice with generating vector z.

All "fast" evaluations use the character property to trade sums over
frequencies for sums over the n lattice points. With

    Phi(k) = sum_h exp(2 pi i k h.z / n) / r(h),

the class sums C(rho) = sum_{h.z = rho mod n} 1/r(h) are the discrete
Fourier transform of Phi / n, and

    S_d(z) = (1/n) sum_k Phi(k)^2 - sum_u gamma_u^2 [2 zeta(2 alpha)]^|u|.

The ``*_oracle`` functions evaluate the defining frequency sums directly
over a box |h_j| <= H and report a rigorous bound on the truncation error.
They never touch the kernel.

Weight arguments named ``beta`` accept either a :class:`WeightModel` or an
array of 2^s weights indexed by bitmask, which lets callers pass the
shifted sequences gamma_{u + w} without building new models.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BudgetExceededError
from .index_set import IndexSet, enumerate_index_set
from .korobov import CriterionContext, kernel_columns, phi_values, r_values, zeta
from .lattice import GeneratingVector, as_generating_vector, dot_mod
from .weights import WeightModel, popcount

__all__ = [
    "CriterionContext",
    "OracleResult",
    "s_d",
    "s_d_from_table",
    "s_d_oracle",
    "theta_s",
    "theta_s_rearranged",
    "theta_s_oracle",
    "t_ds",
    "t_ds_naive",
    "t_ds_candidates",
    "e_d",
    "e_d_oracle",
    "class_sums",
    "worst_case_integration_error",
    "worst_case_integration_error_oracle",
    "future_weights",
]


@dataclass(frozen=True)
class OracleResult:
    """Truncated brute-force value and a bound on what the box misses."""

    value: float
    tail_bound: float
    H: int

    def agrees_with(self, other: float, slack: float = 0.0) -> bool:
        return abs(self.value - other) <= self.tail_bound + slack


def _popcounts(size: int) -> np.ndarray:
    card = np.zeros(size, dtype=np.int64)
    j = 1
    while j < size:
        card[j : 2 * j] = card[:j] + 1
        j *= 2
    return card


def _as_table(beta, s: int) -> np.ndarray:
    if isinstance(beta, WeightModel):
        if beta.d != s:
            raise ValueError(f"weights have d={beta.d}, expected {s}")
        return beta.as_array()
    arr = np.asarray(beta, dtype=float)
    if arr.shape != (1 << s,):
        raise ValueError(f"weight table must have {1 << s} entries, got {arr.shape}")
    return arr


def future_weights(table: np.ndarray, s: int, w_mask: int) -> np.ndarray:
    """The sequence beta_u = gamma_{u + w} for u in {1:s}, w above s."""
    if w_mask & ((1 << s) - 1):
        raise ValueError("w must only contain coordinates above s")
    u = np.arange(1 << s, dtype=np.int64)
    return table[u | w_mask]


def _subset_basis(cols: Sequence[np.ndarray], n: int) -> np.ndarray:
    """Row u holds prod_{j in u} cols[j]; shape (2^s, n)."""
    basis = np.ones((1 << len(cols), n))
    for j, col in enumerate(cols):
        lo = 1 << j
        basis[lo : 2 * lo] = basis[:lo] * col
    return basis


def _zeta2(alpha: float) -> float:
    return 2.0 * zeta(2.0 * alpha)


def _self_term(table: np.ndarray, alpha: float) -> float:
    # sum_h beta_supp(h)^2 / r'(h)^2
    return math.fsum(table**2 * _zeta2(alpha) ** _popcounts(table.size))


def s_d_from_table(ctx: CriterionContext, z, beta) -> float:
    """S_s(z_1..z_s; beta) for an arbitrary weight sequence over {1:s}."""
    z = as_generating_vector(z, ctx.n)
    table = _as_table(beta, z.d)
    if z.d == 0:
        return 0.0
    basis = _subset_basis(kernel_columns(ctx.alpha, z), ctx.n)
    phi = table @ basis
    return math.fsum(phi**2) / ctx.n - _self_term(table, ctx.alpha)


def s_d(ctx: CriterionContext, z, weights: WeightModel | None = None) -> float:
    """
    S_d(z) = sum_h 1/r(h) sum_{l != 0, l.z = 0 mod n} 1/r(h + l).

    Uses the structured form of the weights (product, order dependent,
    POD) when available, so the cost is O(n d) or O(n d^2).
    """
    z = as_generating_vector(z, ctx.n)
    weights = ctx.weights if weights is None else weights
    if weights.d != z.d:
        weights = weights.restrict(z.d)
    phi = phi_values(ctx, z, weights)
    c = _zeta2(ctx.alpha)
    self_term = float(weights.powered(2).subset_sum([c] * z.d))
    return math.fsum(phi**2) / ctx.n - self_term


def _theta_from_parts(phi_s: np.ndarray, a: np.ndarray, b: np.ndarray, c: float) -> float:
    # Phi_s = A + phi_s B, so Phi_s^2 - A^2 - c B^2 = 2 phi_s A B + (phi_s^2 - c) B^2
    terms = 2.0 * phi_s * a * b + (phi_s**2 - c) * b**2
    return math.fsum(terms) / phi_s.size


def theta_s(ctx: CriterionContext, z, beta=None) -> float:
    """
    theta_s(z_1..z_s; beta), the part of S_s(beta) carried by l_s != 0.

    Computed as S_s(beta) - S_{s-1}(beta) - 2 zeta(2 alpha) S_{s-1}(beta_{. + s})
    with the three criteria expanded over the lattice, which cancels the
    large constant terms analytically.
    """
    z = as_generating_vector(z, ctx.n)
    s = z.d
    if s < 1:
        raise ValueError("theta_s needs s >= 1")
    table = _as_table(ctx.weights.restrict(s) if beta is None else beta, s)
    cols = kernel_columns(ctx.alpha, z)
    basis = _subset_basis(cols[:-1], ctx.n)
    half = 1 << (s - 1)
    a = table[:half] @ basis
    b = table[half:] @ basis
    return _theta_from_parts(cols[-1], a, b, _zeta2(ctx.alpha))


def theta_s_rearranged(ctx: CriterionContext, z, beta=None) -> float:
    """Literal S_s - S_{s-1} - c S_{s-1} rearrangement (reference form)."""
    z = as_generating_vector(z, ctx.n)
    s = z.d
    table = _as_table(ctx.weights.restrict(s) if beta is None else beta, s)
    half = 1 << (s - 1)
    head = z.head(s - 1)
    total = s_d_from_table(ctx, z, table)
    if s > 1:
        total -= s_d_from_table(ctx, head, table[:half])
        total -= _zeta2(ctx.alpha) * s_d_from_table(ctx, head, table[half:])
    return total


def _step_vectors(ctx: CriterionContext, z_prev: GeneratingVector, s: int, d: int):
    """
    Vectors P, Q with T_{d,s}(z_prev, z_s) = (1/n) sum_k [2 phi P + (phi^2 - c) Q],
    phi = phi_alpha({k z_s / n}).
    """
    weights = ctx.weights
    c = _zeta2(ctx.alpha)
    cols = kernel_columns(ctx.alpha, z_prev) if s > 1 else []
    if weights.kind == "product":
        gam = weights.gammas
        head = np.ones(ctx.n)
        for j, col in enumerate(cols):
            head = head * (1.0 + gam[j] * col)
        future = math.prod(1.0 + c * g * g for g in gam[s:d])
        g_s = gam[s - 1]
        return g_s * head**2 * future, g_s**2 * head**2 * future

    table = weights.as_array() if d == weights.d else weights.restrict(d).as_array()
    basis = _subset_basis(cols, ctx.n)
    u = np.arange(1 << (s - 1), dtype=np.int64)
    w = np.arange(1 << (d - s), dtype=np.int64) << s
    bit = 1 << (s - 1)
    a_all = table[u[None, :] | w[:, None]] @ basis
    b_all = table[u[None, :] | bit | w[:, None]] @ basis
    cw = c ** _popcounts(w.size).astype(float)
    return cw @ (a_all * b_all), cw @ (b_all * b_all)


def t_ds(ctx: CriterionContext, z, d: int | None = None) -> float:
    """
    T_{d,s}(z_1..z_s) = sum_{w in {s+1:d}} [2 zeta(2 alpha)]^|w| theta_s(z; gamma_{. + w}).

    ``s`` is the number of components of ``z``; ``d`` defaults to the
    dimension of the context weights. Product weights use the factorized
    sum over w.
    """
    z = as_generating_vector(z, ctx.n)
    d = ctx.d if d is None else d
    s = z.d
    if not 1 <= s <= d:
        raise ValueError(f"need 1 <= s <= d, got s={s}, d={d}")
    p, q = _step_vectors(ctx, z.head(s - 1), s, d)
    phi = kernel_columns(ctx.alpha, z)[-1]
    return _step_value(phi, p, q, _zeta2(ctx.alpha))


def _step_value(phi: np.ndarray, p: np.ndarray, q: np.ndarray, c: float) -> float:
    # fsum is exactly rounded, so candidates whose terms are permutations of
    # each other (e.g. z_s and n - z_s) compare exactly equal
    return math.fsum(2.0 * phi * p + (phi**2 - c) * q) / phi.size


def t_ds_naive(ctx: CriterionContext, z, d: int | None = None) -> float:
    """T_{d,s} as the explicit sum of 2^(d-s) theta_s evaluations."""
    z = as_generating_vector(z, ctx.n)
    d = ctx.d if d is None else d
    s = z.d
    table = ctx.weights.as_array() if d == ctx.d else ctx.weights.restrict(d).as_array()
    c = _zeta2(ctx.alpha)
    total = []
    for i in range(1 << (d - s)):
        w = i << s
        total.append(c ** popcount(w) * theta_s(ctx, z, future_weights(table, s, w)))
    return math.fsum(total)


def t_ds_candidates(ctx: CriterionContext, z_prev, s: int, d: int | None = None) -> np.ndarray:
    """T_{d,s}(z_prev, z_s) for every z_s = 1..n-1 (entry z_s - 1)."""
    d = ctx.d if d is None else d
    z_prev = as_generating_vector(z_prev, ctx.n)
    if z_prev.d != s - 1:
        raise ValueError(f"expected {s - 1} fixed components, got {z_prev.d}")
    p, q = _step_vectors(ctx, z_prev, s, d)
    n = ctx.n
    kv = ctx.kernel
    cand = np.arange(1, n, dtype=np.int64)
    k = np.arange(n, dtype=np.int64)
    c = _zeta2(ctx.alpha)
    out = np.empty(n - 1)
    for i in range(n - 1):
        out[i] = _step_value(kv[(cand[i] * k) % n], p, q, c)
    return out


def class_sums(ctx: CriterionContext, z, weights: WeightModel | None = None) -> np.ndarray:
    """C(rho) = sum_{h.z = rho mod n} 1/r(h) for rho = 0..n-1."""
    phi = phi_values(ctx, z, weights)
    spectrum = np.fft.fft(phi) / ctx.n
    if np.max(np.abs(spectrum.imag)) > 1e-10 * max(1.0, np.max(np.abs(spectrum.real))):
        raise ArithmeticError("class sums have a non-negligible imaginary part")
    return spectrum.real


def _resolve_index_set(ctx: CriterionContext, M) -> IndexSet:
    if isinstance(M, IndexSet):
        return M
    return enumerate_index_set(ctx.space, float(M))


def e_d(ctx: CriterionContext, z, M) -> float:
    """
    E_d(z) = sum_{h in A_d(M)} sum_{l != 0, l.z = 0 mod n} 1/r(h + l).

    ``M`` is a positive number or a prebuilt :class:`IndexSet`.
    """
    z = as_generating_vector(z, ctx.n)
    index_set = _resolve_index_set(ctx, M)
    g1 = ctx.weights.gamma(1)
    if g1 > 0 and (ctx.n - 1) ** ctx.alpha / g1 <= index_set.M:
        warnings.warn(
            f"n = {ctx.n} is small relative to M = {index_set.M}: (n-1)^alpha/gamma_1 <= M",
            RuntimeWarning,
            stacklevel=2,
        )
    if len(index_set) == 0:
        return 0.0
    cs = class_sums(ctx, z)
    h = index_set.indices
    inv_r = 1.0 / r_values(ctx.space, h)
    return math.fsum(cs[dot_mod(h, z)] - inv_r)


def worst_case_integration_error(ctx: CriterionContext, z) -> float:
    """sqrt(sum_{h != 0, h.z = 0 mod n} 1/r(h))."""
    phi = phi_values(ctx, z)
    sq = math.fsum(phi) / ctx.n - 1.0
    if sq < -1e-12:
        raise ArithmeticError(f"negative squared integration error {sq}")
    return math.sqrt(max(sq, 0.0))


# -- brute-force oracles -----------------------------------------------------


def _box_slabs(d: int, H: int):
    """Yield the box [-H, H]^d in slabs of fixed first coordinate."""
    axis = np.arange(-H, H + 1, dtype=np.int64)
    if d == 1:
        yield axis[:, None]
        return
    rest = np.stack(np.meshgrid(*([axis] * (d - 1)), indexing="ij"), axis=-1).reshape(-1, d - 1)
    for h1 in axis:
        yield np.hstack([np.full((rest.shape[0], 1), h1, dtype=np.int64), rest])


def _box_weights(h: np.ndarray, table: np.ndarray, alpha: float) -> np.ndarray:
    mask = ((h != 0).astype(np.int64) << np.arange(h.shape[1], dtype=np.int64)).sum(axis=1)
    a = np.abs(h).astype(float)
    a[a == 0] = 1.0
    return table[mask] / np.prod(a**alpha, axis=1)


def _check_budget(ctx: CriterionContext, d: int, H: int) -> None:
    if H < ctx.n:
        raise ValueError(f"oracle radius H = {H} must be at least n = {ctx.n}")
    size = (2 * H + 1) ** d
    if size > ctx.oracle_budget:
        raise BudgetExceededError(f"oracle box has {size} points > budget {ctx.oracle_budget}")


def _outside_mass(table: np.ndarray, alpha: float, H: int) -> float:
    # sum of beta_supp(h) / r'(h) over h outside the box
    full = 2.0 * zeta(alpha)
    inside = 2.0 * math.fsum(m ** (-alpha) for m in range(1, H + 1))
    card = _popcounts(table.size)
    return max(math.fsum(table * (full**card - inside**card)), 0.0)


def _resolve_H(ctx: CriterionContext, H: int | None) -> int:
    H = ctx.oracle_H if H is None else H
    if H is None:
        raise ValueError("oracle truncation radius H not given")
    return int(H)


def _class_accumulate(ctx, z: GeneratingVector, table: np.ndarray, H: int, split_last: bool = False):
    n = ctx.n
    zvec = z.as_array()
    cs = np.zeros(n)
    split = np.zeros(n * (2 * H + 1)) if split_last else None
    self_sq = []
    for slab in _box_slabs(z.d, H):
        w = _box_weights(slab, table, ctx.alpha)
        rho = (slab @ zvec) % n
        cs += np.bincount(rho, weights=w, minlength=n)
        self_sq.append(float(np.dot(w, w)))
        if split_last:
            key = rho * (2 * H + 1) + (slab[:, -1] + H)
            split += np.bincount(key, weights=w, minlength=split.size)
    return cs, split, math.fsum(self_sq)


def s_d_oracle(ctx: CriterionContext, z, H: int | None = None, beta=None) -> OracleResult:
    """
    Direct double sum over h, h + l in [-H, H]^d with l != 0, l.z = 0 mod n.

    Pairs are grouped by the residue h.z mod n, so the work is O((2H+1)^d).
    The tail bound is 2 T (C_max + T) where T is the weight mass outside
    the box and C_max the largest in-box residue class sum.
    """
    z = as_generating_vector(z, ctx.n)
    H = _resolve_H(ctx, H)
    _check_budget(ctx, z.d, H)
    table = _as_table(ctx.weights.restrict(z.d) if beta is None else beta, z.d)
    cs, _, self_sq = _class_accumulate(ctx, z, table, H)
    value = math.fsum(cs**2) - self_sq
    tail = _outside_mass(table, ctx.alpha, H)
    return OracleResult(value, 2.0 * tail * (float(cs.max()) + tail), H)


def theta_s_oracle(ctx: CriterionContext, z, H: int | None = None, beta=None) -> OracleResult:
    """Direct sum for theta_s: pairs (h, h + l) in the box with l_s != 0."""
    z = as_generating_vector(z, ctx.n)
    H = _resolve_H(ctx, H)
    _check_budget(ctx, z.d, H)
    table = _as_table(ctx.weights.restrict(z.d) if beta is None else beta, z.d)
    cs, split, _ = _class_accumulate(ctx, z, table, H, split_last=True)
    # all same-class pairs minus those agreeing in coordinate s
    value = math.fsum(cs**2) - math.fsum(split**2)
    tail = _outside_mass(table, ctx.alpha, H)
    return OracleResult(value, 2.0 * tail * (float(cs.max()) + tail), H)


def e_d_oracle(ctx: CriterionContext, z, M, H: int | None = None) -> OracleResult:
    """Direct sum of E_d over h in A_d(M) and aliases h + l in the box."""
    z = as_generating_vector(z, ctx.n)
    H = _resolve_H(ctx, H)
    _check_budget(ctx, z.d, H)
    index_set = _resolve_index_set(ctx, M)
    table = ctx.weights.as_array()
    cs, _, _ = _class_accumulate(ctx, z, table, H)
    h = index_set.indices
    if np.any(np.abs(h) > H):
        raise ValueError("index set reaches outside the oracle box")
    value = math.fsum(cs[dot_mod(h, z)] - _box_weights(h, table, ctx.alpha)) if len(h) else 0.0
    tail = _outside_mass(table, ctx.alpha, H)
    return OracleResult(value, len(h) * tail, H)


def worst_case_integration_error_oracle(ctx: CriterionContext, z, H: int | None = None) -> OracleResult:
    """Squared worst-case integration error summed over the dual lattice in the box."""
    z = as_generating_vector(z, ctx.n)
    H = _resolve_H(ctx, H)
    _check_budget(ctx, z.d, H)
    table = ctx.weights.as_array()
    cs, _, _ = _class_accumulate(ctx, z, table, H)
    return OracleResult(float(cs[0] - 1.0), _outside_mass(table, ctx.alpha, H), H)
