"""
The lattice algorithm for L2 approximation and exact error evaluation.

Given samples f({k z / n}), k = 1..n, the algorithm keeps the Fourier
coefficients on an index set A and estimates each by the lattice rule

    fa_h = (1/n) sum_k f({k z / n}) exp(-2 pi i k h.z / n).

fa_h only depends on h.z mod n, so one length-n DFT serves all of A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .index_set import IndexSet
from .korobov import FourierPolynomial, SpaceParams, kernel_lattice_values, kernel_phi, r_values, zeta
from .lattice import GeneratingVector, dot_mod, lattice_points, residues

__all__ = [
    "sample_lattice",
    "lattice_dft",
    "apply_lattice_algorithm",
    "aliased_coefficients",
    "exact_l2_error",
    "grid_l2_error",
    "KernelProductFunction",
    "kernel_product_l2_error",
    "random_polynomial",
    "make_test_function",
]


def sample_lattice(f: Callable, z: GeneratingVector) -> np.ndarray:
    """Values f({k z / n}) for k = 1..n; ``f`` maps an (N, d) array to N values."""
    if isinstance(f, KernelProductFunction):
        return f.lattice_samples(z)
    return np.asarray(f(lattice_points(z)))


def lattice_dft(samples: np.ndarray) -> np.ndarray:
    """F[rho] = (1/n) sum_{k=1}^n samples[k-1] exp(-2 pi i k rho / n)."""
    samples = np.asarray(samples)
    n = samples.shape[0]
    # position k mod n holds the sample at k, so the sample for k = n goes first
    return np.fft.fft(np.roll(samples, 1)) / n


def apply_lattice_algorithm(samples: np.ndarray, z: GeneratingVector, index_set: IndexSet) -> FourierPolynomial:
    """Approximation A(f) as a Fourier polynomial supported on the index set."""
    samples = np.asarray(samples)
    if samples.shape[0] != z.n:
        raise ValueError(f"expected {z.n} samples, got {samples.shape[0]}")
    spectrum = lattice_dft(samples)
    h = index_set.indices
    coeffs = spectrum[dot_mod(h, z)] if len(h) else np.zeros(0, complex)
    real = bool(np.isrealobj(samples) or np.allclose(np.imag(samples), 0.0))
    terms = {tuple(row): c for row, c in zip(h.tolist(), coeffs)}
    return FourierPolynomial(terms, z.d, real=real, tol=1e-10)


def aliased_coefficients(f: FourierPolynomial, z: GeneratingVector, index_set: IndexSet) -> np.ndarray:
    """
    fa_h = sum_{l.z = 0 mod n} f_{h + l} for each h in the index set.

    Computed from the coefficient table alone, with no sampling.
    """
    support = f.indices()
    classes = np.zeros(z.n, dtype=complex)
    if len(support):
        np.add.at(classes, dot_mod(support, z), f.coefficients())
    h = index_set.indices
    return classes[dot_mod(h, z)] if len(h) else np.zeros(0, complex)


def exact_l2_error(f: FourierPolynomial, z: GeneratingVector, index_set: IndexSet) -> float:
    """||f - A(f)||_{L2} for a finite Fourier polynomial, exactly."""
    fa = aliased_coefficients(f, z, index_set)
    outside = [abs(c) ** 2 for h, c in f.terms.items() if h not in index_set]
    inside = [abs(f.coefficient(h) - a) ** 2 for h, a in zip(index_set, fa)]
    return math.sqrt(math.fsum(outside) + math.fsum(inside))


def grid_l2_error(f: Callable, g: Callable, d: int, points: int = 64) -> float:
    """
    ||f - g||_{L2} by the tensor-product rectangle rule on ``points``^d nodes.

    Exact for trigonometric polynomials with all frequencies |h_j| < points/2.
    """
    axis = np.arange(points) / points
    grid = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    diff = np.asarray(f(grid)) - np.asarray(g(grid))
    return math.sqrt(float(np.mean(np.abs(diff) ** 2)))


@dataclass(frozen=True)
class KernelProductFunction:
    """
    f(x) = prod_j (1 + c_j phi_alpha(x_j)), with Fourier coefficients
    f_h = prod_{j in supp(h)} c_j / |h_j|^alpha.
    """

    alpha: float
    c: tuple[float, ...]

    @property
    def d(self) -> int:
        return len(self.c)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.ones(x.shape[0])
        for j, cj in enumerate(self.c):
            if cj != 0:
                out = out * (1.0 + cj * kernel_phi(self.alpha, x[:, j]))
        return out

    def lattice_samples(self, z: GeneratingVector) -> np.ndarray:
        """Exact samples at k = 1..n using the cached kernel values at j/n."""
        kv = kernel_lattice_values(self.alpha, z.n)
        res = np.roll(residues(z), -1, axis=0)  # rows k = 1..n
        out = np.ones(z.n)
        for j, cj in enumerate(self.c):
            out = out * (1.0 + cj * kv[res[:, j]])
        return out

    def coefficients_at(self, h: np.ndarray) -> np.ndarray:
        h = np.atleast_2d(np.asarray(h))
        out = np.ones(h.shape[0])
        for j, cj in enumerate(self.c):
            nz = h[:, j] != 0
            out[nz] *= cj / np.abs(h[nz, j]).astype(float) ** self.alpha
        return out

    def l2_norm_squared(self) -> float:
        c2 = 2.0 * zeta(2.0 * self.alpha)
        return math.prod(1.0 + cj * cj * c2 for cj in self.c)

    def norm_squared(self, params: SpaceParams) -> float:
        """Korobov norm: sum_u gamma_u^-1 prod_{j in u} c_j^2 2 zeta(alpha)."""
        table = params.weights.as_array()
        c1 = 2.0 * zeta(self.alpha)
        total = []
        for mask, g in enumerate(table):
            term = 1.0
            for j in range(self.d):
                if mask >> j & 1:
                    term *= self.c[j] ** 2 * c1
            if term == 0:
                continue
            if g == 0:
                return math.inf
            total.append(term / g)
        return math.fsum(total)

    def truncate(self, radius: int) -> FourierPolynomial:
        axis = np.arange(-radius, radius + 1)
        grid = np.stack(np.meshgrid(*([axis] * self.d), indexing="ij"), axis=-1).reshape(-1, self.d)
        coeffs = self.coefficients_at(grid)
        return FourierPolynomial({tuple(h): c for h, c in zip(grid.tolist(), coeffs)}, self.d, real=True)


def kernel_product_l2_error(f: KernelProductFunction, z: GeneratingVector, index_set: IndexSet) -> float:
    """
    ||f - A(f)||_{L2} for a kernel product function.

    Uses the closed-form L2 norm for the part of f outside the index set and
    exact lattice samples for the estimated coefficients.
    """
    spectrum = lattice_dft(f.lattice_samples(z))
    h = index_set.indices
    exact = f.coefficients_at(h)
    approx = spectrum[dot_mod(h, z)]
    outside = f.l2_norm_squared() - math.fsum(exact**2)
    inside = math.fsum(np.abs(exact - approx) ** 2)
    return math.sqrt(max(outside, 0.0) + inside)


def random_polynomial(
    params: SpaceParams,
    rng: np.random.Generator,
    terms: int = 10,
    radius: int = 3,
    unit_norm: bool = False,
) -> FourierPolynomial:
    """
    Real random trigonometric polynomial with |f_h| proportional to 1/r(h).

    Frequencies are drawn from the box |h_j| <= radius among those with
    positive weight; each is paired with -h so the function is real.
    """
    d = params.d
    axis = np.arange(-radius, radius + 1)
    box = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    rr = r_values(params, box)
    box, rr = box[np.isfinite(rr)], rr[np.isfinite(rr)]
    # one representative per {h, -h} pair
    half = [i for i, h in enumerate(box.tolist()) if tuple(h) >= tuple(-v for v in h)]
    picks = rng.choice(half, size=min(terms, len(half)), replace=False)
    coeffs: dict = {}
    for i in picks:
        h = tuple(int(v) for v in box[i])
        c = (rng.normal() + 1j * rng.normal()) / rr[i]
        if h == tuple(-v for v in h):
            c = complex(c.real)
        coeffs[h] = c
        coeffs[tuple(-v for v in h)] = np.conj(c)
    f = FourierPolynomial(coeffs, d, real=True)
    if unit_norm:
        f = f.scaled(1.0 / math.sqrt(f.norm_squared(params)))
    return f


def make_test_function(kind: str, params: SpaceParams | None = None, **options):
    """
    Build a test function.

    ``kind="random"``: :func:`random_polynomial` with options ``seed``,
    ``terms``, ``radius``, ``unit_norm``.
    ``kind="kernel_product"``: :class:`KernelProductFunction` with option
    ``c`` (one coefficient per coordinate) and optional ``alpha``.
    """
    if kind == "random":
        if params is None:
            raise ValueError("random test functions need space parameters")
        rng = np.random.default_rng(options.get("seed", 0))
        return random_polynomial(
            params,
            rng,
            terms=options.get("terms", 10),
            radius=options.get("radius", 3),
            unit_norm=options.get("unit_norm", False),
        )
    if kind == "kernel_product":
        alpha = options.get("alpha", params.alpha if params is not None else None)
        if alpha is None:
            raise ValueError("kernel product functions need alpha")
        c = tuple(float(v) for v in options["c"])
        return KernelProductFunction(float(alpha), c)
    raise ValueError(f"unknown test function kind {kind!r}")
