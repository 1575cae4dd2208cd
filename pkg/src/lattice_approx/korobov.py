"""
Weighted Korobov space primitives.

The space of one-periodic functions on [0,1]^d whose Fourier coefficients
satisfy sum_h |f_h|^2 r(h) < inf, where

    r(h) = prod_{j in supp(h)} |h_j|^alpha / gamma_{supp(h)}.

Frequencies with gamma_{supp(h)} = 0 are excluded from the space; for those
``r`` returns ``inf``.

Also provides the rank-1 kernel

    phi_alpha(x) = sum_{m != 0} exp(2 pi i m x) / |m|^alpha

and the weighted kernel sums used to evaluate lattice error criteria.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import TYPE_CHECKING, Mapping

import mpmath
import numpy as np
from scipy.special import zeta as _hurwitz_zeta

from .lattice import GeneratingVector, as_generating_vector, is_prime, residues

if TYPE_CHECKING:
    from .weights import WeightModel

__all__ = [
    "zeta",
    "bernoulli_numbers",
    "bernoulli_poly",
    "kernel_phi",
    "kernel_phi_series",
    "kernel_lattice_values",
    "kernel_mode",
    "SpaceParams",
    "CriterionContext",
    "r",
    "r_prime",
    "r_values",
    "r_prime_values",
    "FourierPolynomial",
    "phi_values",
    "phi_weighted_sum",
    "norm_squared",
    "l2_norm_squared",
]


def zeta(x: float) -> float:
    """Riemann zeta function for real x > 1."""
    if not x > 1:
        raise ValueError(f"zeta({x}) diverges: argument must exceed 1")
    return float(_hurwitz_zeta(x, 1.0))


# Bernoulli polynomials as coefficient lists, lowest degree first.
_BERNOULLI = {
    2: (1 / 6, -1.0, 1.0),
    4: (-1 / 30, 0.0, 1.0, -2.0, 1.0),
    6: (1 / 42, 0.0, -1 / 2, 0.0, 5 / 2, -3.0, 1.0),
    8: (-1 / 30, 0.0, 2 / 3, 0.0, -7 / 3, 0.0, 14 / 3, -4.0, 1.0),
}


@lru_cache(maxsize=None)
def bernoulli_numbers(order: int) -> tuple[Fraction, ...]:
    """Exact B_0..B_order (convention B_1 = -1/2)."""
    b = [Fraction(1)]
    for m in range(1, order + 1):
        b.append(-sum(math.comb(m + 1, k) * b[k] for k in range(m)) / (m + 1))
    return tuple(b)


@lru_cache(maxsize=None)
def _bernoulli_coeffs(order: int) -> tuple[float, ...]:
    if order in _BERNOULLI:
        return _BERNOULLI[order]
    b = bernoulli_numbers(order)
    # B_n(x) = sum_k C(n, k) B_k x^(n-k)
    return tuple(float(math.comb(order, order - i) * b[order - i]) for i in range(order + 1))


@lru_cache(maxsize=None)
def _centered_coeffs(order: int) -> tuple[float, ...]:
    # B_n(1/2 + t) = sum_k C(n, k) B_k(1/2) t^(n-k), B_k(1/2) = (2^(1-k) - 1) B_k.
    # Expanding about 1/2 avoids the cancellation of the monomial form at high order.
    b = bernoulli_numbers(order)
    half = [(Fraction(2) ** (1 - k) - 1) * b[k] for k in range(order + 1)]
    return tuple(float(math.comb(order, order - i) * half[order - i]) for i in range(order + 1))


def bernoulli_poly(order: int, x):
    """Bernoulli polynomial B_order(x)."""
    coeffs = _bernoulli_coeffs(order)
    return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coeffs)


def _even_order(alpha: float) -> int | None:
    if float(alpha).is_integer() and int(alpha) % 2 == 0 and alpha >= 2:
        return int(alpha)
    return None


def kernel_mode(alpha: float) -> str:
    """``"bernoulli"`` for even integer alpha (exact), else ``"polylog"``."""
    return "bernoulli" if _even_order(alpha) else "polylog"


def kernel_phi(alpha: float, x):
    """
    Kernel phi_alpha(x) = 2 sum_{m >= 1} cos(2 pi m x) / m^alpha.

    Even integer alpha uses the Bernoulli polynomial closed form

        phi_alpha(x) = (-1)^(alpha/2 + 1) (2 pi)^alpha B_alpha({x}) / alpha!

    Other alpha go through the polylogarithm, 2 Re Li_alpha(exp(2 pi i x)),
    evaluated once per distinct x.
    """
    if not alpha > 1:
        raise ValueError("kernel needs alpha > 1")
    x = np.asarray(x, dtype=float)
    frac = x - np.floor(x)
    order = _even_order(alpha)
    if order is not None:
        sign = (-1) ** (order // 2 + 1)
        scale = sign * (2 * math.pi) ** order / math.factorial(order)
        out = scale * np.polynomial.polynomial.polyval(frac - 0.5, _centered_coeffs(order))
        return float(out) if out.ndim == 0 else out
    uniq, inverse = np.unique(frac.ravel(), return_inverse=True)
    vals = np.array([_polylog_kernel(alpha, float(v)) for v in uniq])
    out = vals[inverse].reshape(frac.shape)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=4096)
def _polylog_kernel(alpha: float, x: float) -> float:
    with mpmath.workdps(30):
        if x == 0.0:
            return float(2 * mpmath.zeta(alpha))
        return float(2 * mpmath.re(mpmath.polylog(alpha, mpmath.expjpi(2 * x))))


def kernel_phi_series(alpha: float, x, terms: int):
    """
    Truncated cosine series for phi_alpha with its tail bound.

    Returns ``(value, tail)`` where ``|phi_alpha(x) - value| <= tail`` and
    ``tail = 2 / ((alpha - 1) terms^(alpha - 1))``.
    """
    if not alpha > 1:
        raise ValueError("kernel needs alpha > 1")
    x = np.asarray(x, dtype=float)
    m = np.arange(1, terms + 1, dtype=float)
    total = np.zeros(x.shape)
    # chunk over m to bound memory
    for start in range(0, terms, 200_000):
        mm = m[start : start + 200_000]
        total = total + np.cos(2 * np.pi * np.multiply.outer(x, mm)) @ mm ** (-alpha)
    tail = 2.0 / ((alpha - 1) * terms ** (alpha - 1))
    return 2.0 * total, tail


@lru_cache(maxsize=64)
def _lattice_values_cached(alpha: float, n: int) -> np.ndarray:
    j = np.arange(n)
    order = _even_order(alpha)
    if order is not None:
        vals = kernel_phi(alpha, j / n)
    else:
        # m = q n + r: sum_{m >= 1} m^-a cos(2 pi m j / n) = n^-a sum_r cos(2 pi r j / n) zeta(a, r/n)
        shifts = np.where(j == 0, 1.0, j / n)
        hz = _hurwitz_zeta(alpha, shifts)
        vals = 2.0 * n ** (-alpha) * np.fft.fft(hz).real
    vals = np.asarray(vals, dtype=float)
    vals.setflags(write=False)
    return vals


def kernel_lattice_values(alpha: float, n: int) -> np.ndarray:
    """Read-only array of phi_alpha(j / n) for j = 0..n-1."""
    if not alpha > 1:
        raise ValueError("kernel needs alpha > 1")
    return _lattice_values_cached(float(alpha), int(n))


@dataclass(frozen=True)
class SpaceParams:
    """Smoothness ``alpha`` and weights of a weighted Korobov space."""

    alpha: float
    weights: "WeightModel"

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError(f"alpha must exceed 1, got {self.alpha}")

    @property
    def d(self) -> int:
        return self.weights.d


@dataclass(frozen=True)
class CriterionContext:
    """
    Settings shared by all criterion evaluations.

    Parameters
    ----------
    space : SpaceParams
    n : int
        Prime number of lattice points.
    oracle_H : int, optional
        Truncation radius for brute-force oracles; must be >= n.
    oracle_budget : int
        Maximum number of box points an oracle may visit.
    """

    space: SpaceParams
    n: int
    oracle_H: int | None = None
    oracle_budget: int = 50_000_000

    def __post_init__(self):
        if not is_prime(self.n):
            raise ValueError(f"n = {self.n} is not prime")
        if self.oracle_H is not None and self.oracle_H < self.n:
            raise ValueError("oracle truncation radius must be at least n")

    @classmethod
    def make(cls, alpha: float, weights: "WeightModel", n: int, **kwargs) -> "CriterionContext":
        return cls(SpaceParams(alpha, weights), n, **kwargs)

    @property
    def alpha(self) -> float:
        return self.space.alpha

    @property
    def weights(self) -> "WeightModel":
        return self.space.weights

    @property
    def d(self) -> int:
        return self.space.d

    @property
    def kernel_mode(self) -> str:
        return kernel_mode(self.alpha)

    @property
    def kernel(self) -> np.ndarray:
        return kernel_lattice_values(self.alpha, self.n)


def _support_mask(h: np.ndarray) -> np.ndarray:
    h = np.atleast_2d(h)
    bits = (h != 0).astype(np.int64) << np.arange(h.shape[1], dtype=np.int64)
    return bits.sum(axis=1)


def r_prime(alpha: float, h) -> float:
    """prod_{j in supp(h)} |h_j|^alpha (weight free)."""
    value = 1.0
    for hj in h:
        if hj != 0:
            value *= abs(int(hj)) ** alpha
    return value


def r(params: SpaceParams, h) -> float:
    """r(h) = r'(h) / gamma_supp(h), ``inf`` when that weight is zero."""
    h = tuple(int(v) for v in h)
    if len(h) != params.d:
        raise ValueError(f"frequency has {len(h)} components, space has d={params.d}")
    mask = sum(1 << j for j, v in enumerate(h) if v != 0)
    g = params.weights.gamma(mask)
    if g == 0.0:
        return math.inf
    return r_prime(params.alpha, h) / g


def r_prime_values(alpha: float, h: np.ndarray) -> np.ndarray:
    h = np.atleast_2d(np.asarray(h))
    a = np.abs(h).astype(float)
    a[a == 0] = 1.0
    return np.prod(a**alpha, axis=1)


def r_values(params: SpaceParams, h: np.ndarray, table: np.ndarray | None = None) -> np.ndarray:
    """Vectorized :func:`r` over the rows of ``h``."""
    h = np.atleast_2d(np.asarray(h))
    if table is None:
        table = params.weights.as_array()
    g = table[_support_mask(h)]
    rp = r_prime_values(params.alpha, h)
    with np.errstate(divide="ignore"):
        return np.where(g > 0, rp / np.where(g > 0, g, 1.0), np.inf)


class FourierPolynomial:
    """
    Finite Fourier series f(x) = sum_h c_h exp(2 pi i h.x).

    Parameters
    ----------
    terms : mapping
        Frequency tuple -> complex coefficient. Zero coefficients are dropped.
    d : int
    real : bool
        If set, require c_{-h} = conj(c_h) so that f is real valued.
    """

    def __init__(self, terms: Mapping, d: int, real: bool = False, tol: float = 1e-14):
        self.d = d
        self.terms: dict[tuple[int, ...], complex] = {}
        for h, c in terms.items():
            h = tuple(int(v) for v in h)
            if len(h) != d:
                raise ValueError(f"frequency {h} does not have {d} components")
            if c != 0:
                self.terms[h] = self.terms.get(h, 0) + complex(c)
        self.real = real
        if real:
            for h, c in self.terms.items():
                mirror = self.terms.get(tuple(-v for v in h), 0)
                if abs(mirror - c.conjugate()) > tol * max(1.0, abs(c)):
                    raise ValueError(f"coefficients at {h} and its negative are not conjugate")

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return f"FourierPolynomial(d={self.d}, terms={len(self.terms)})"

    def coefficient(self, h) -> complex:
        return self.terms.get(tuple(int(v) for v in h), 0j)

    def indices(self) -> np.ndarray:
        if not self.terms:
            return np.zeros((0, self.d), dtype=np.int64)
        return np.array(list(self.terms.keys()), dtype=np.int64)

    def coefficients(self) -> np.ndarray:
        return np.array(list(self.terms.values()), dtype=complex)

    def __call__(self, x):
        """Evaluate at points ``x`` of shape (N, d); real part only if ``real``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if not self.terms:
            return np.zeros(x.shape[0])
        phase = np.exp(2j * np.pi * (x @ self.indices().T))
        vals = phase @ self.coefficients()
        return vals.real if self.real else vals

    def scaled(self, factor: complex) -> "FourierPolynomial":
        real = self.real and np.isreal(factor)
        return FourierPolynomial({h: c * factor for h, c in self.terms.items()}, self.d, real=real)

    def l2_norm_squared(self) -> float:
        return float(math.fsum(abs(c) ** 2 for c in self.terms.values()))

    def norm_squared(self, params: SpaceParams) -> float:
        return norm_squared(params, self)


def norm_squared(params: SpaceParams, f: FourierPolynomial) -> float:
    """Korobov norm sum |c_h|^2 r(h); raises if f has mass where r = inf."""
    total = []
    for h, c in f.terms.items():
        rh = r(params, h)
        if math.isinf(rh):
            raise ValueError(f"frequency {h} has zero weight: function is not in the space")
        total.append(abs(c) ** 2 * rh)
    return float(math.fsum(total))


def l2_norm_squared(f: FourierPolynomial) -> float:
    return f.l2_norm_squared()


def kernel_columns(alpha: float, z: GeneratingVector) -> list[np.ndarray]:
    """phi_alpha({k z_j / n}) for k = 0..n-1, one array per coordinate."""
    kv = kernel_lattice_values(alpha, z.n)
    res = residues(z)
    return [kv[res[:, j]] for j in range(z.d)]


def phi_values(ctx: CriterionContext, z, weights: "WeightModel | None" = None) -> np.ndarray:
    """
    Weighted kernel sums Phi(k) for k = 0..n-1 (k = 0 stands for k = n).

    Phi(k) = sum_h exp(2 pi i k h.z / n) / r(h)
           = sum_u gamma_u prod_{j in u} phi_alpha({k z_j / n}).
    """
    z = as_generating_vector(z, ctx.n)
    weights = ctx.weights if weights is None else weights
    if weights.d != z.d:
        raise ValueError(f"weights have d={weights.d} but z has {z.d} components")
    return np.asarray(weights.subset_sum(kernel_columns(ctx.alpha, z)), dtype=float)


def phi_weighted_sum(ctx: CriterionContext, k: int, z) -> float:
    """Phi(k) for a single 1 <= k <= n."""
    if not 1 <= k <= ctx.n:
        raise ValueError(f"k must lie in 1..{ctx.n}")
    return float(phi_values(ctx, z)[k % ctx.n])
