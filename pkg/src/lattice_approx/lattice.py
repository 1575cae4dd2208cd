"""Rank-1 lattice point sets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "is_prime",
    "primes_between",
    "GeneratingVector",
    "as_generating_vector",
    "lattice_points",
    "residues",
    "dot_mod",
    "is_dual",
]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def primes_between(lo: int, hi: int) -> list[int]:
    return [p for p in range(max(lo, 2), hi + 1) if is_prime(p)]


@dataclass(frozen=True)
class GeneratingVector:
    """
    Generating vector z in {1, ..., n-1}^d of an n-point rank-1 lattice, n prime.

    The vector may be partial (fewer components than the target dimension)
    while a CBC construction is in progress.
    """

    n: int
    z: tuple[int, ...]

    def __post_init__(self):
        if not is_prime(self.n):
            raise ValueError(f"n = {self.n} is not prime")
        object.__setattr__(self, "z", tuple(int(v) for v in self.z))
        for v in self.z:
            if not 1 <= v <= self.n - 1:
                raise ValueError(f"component {v} outside 1..{self.n - 1}")

    @property
    def d(self) -> int:
        return len(self.z)

    def __len__(self) -> int:
        return len(self.z)

    def __getitem__(self, item):
        return self.z[item]

    def head(self, s: int) -> "GeneratingVector":
        return GeneratingVector(self.n, self.z[:s])

    def as_array(self) -> np.ndarray:
        return np.asarray(self.z, dtype=np.int64)


def as_generating_vector(z, n: int | None = None) -> GeneratingVector:
    if isinstance(z, GeneratingVector):
        if n is not None and z.n != n:
            raise ValueError(f"generating vector has n={z.n}, expected {n}")
        return z
    if n is None:
        raise ValueError("n is required when z is a plain sequence")
    return GeneratingVector(n, tuple(z))


def residues(z: GeneratingVector) -> np.ndarray:
    """Integer array ``(k * z_j) mod n`` of shape (n, d), row k = 0..n-1.

    Row 0 stands for k = n; sums over a full period are unaffected.
    """
    k = np.arange(z.n, dtype=np.int64)[:, None]
    return (k * z.as_array()[None, :]) % z.n


def lattice_points(z: GeneratingVector) -> np.ndarray:
    """Points {k z / n} for k = 1..n, shape (n, d), in that order."""
    k = np.arange(1, z.n + 1, dtype=np.int64)[:, None]
    return ((k * z.as_array()[None, :]) % z.n) / z.n


def dot_mod(h: np.ndarray, z: GeneratingVector) -> np.ndarray:
    """(h . z) mod n for each row of ``h`` (exact integer arithmetic)."""
    h = np.atleast_2d(np.asarray(h, dtype=np.int64))
    return (h @ z.as_array()) % z.n


def is_dual(ell: Sequence[int], z: GeneratingVector) -> bool:
    return int(np.dot(np.asarray(ell, dtype=np.int64), z.as_array())) % z.n == 0
