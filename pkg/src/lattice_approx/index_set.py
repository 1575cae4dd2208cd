"""
Truncation index sets A_d(M) = {h in Z^d : r(h) <= M}.

Enumeration runs support by support: for each u with gamma_u > 0 the
nonzero parts h_u satisfy prod_{j in u} |h_j|^alpha <= gamma_u M, which
is a hyperbolic-cross type region explored by recursive descent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from .errors import BudgetExceededError
from .korobov import SpaceParams, r_values, zeta
from .weights import mask_to_subset

__all__ = [
    "IndexSet",
    "enumerate_index_set",
    "box_scan_index_set",
    "cardinality_bound",
    "hyperbolic_count_1d",
    "read_index_dump",
]

DEFAULT_BUDGET = 5_000_000


@dataclass(frozen=True)
class IndexSet:
    """Frequencies h with r(h) <= M, rows of ``indices`` in lexicographic order."""

    M: float
    params: SpaceParams
    indices: np.ndarray
    _members: frozenset = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.indices.setflags(write=False)
        object.__setattr__(self, "_members", frozenset(map(tuple, self.indices.tolist())))

    def __len__(self) -> int:
        return self.indices.shape[0]

    def __iter__(self):
        return iter(map(tuple, self.indices.tolist()))

    def __contains__(self, h) -> bool:
        return tuple(int(v) for v in h) in self._members

    @property
    def d(self) -> int:
        return self.params.d

    def as_set(self) -> frozenset:
        return self._members

    def dumps(self) -> str:
        """Header line plus one tab-separated frequency per line."""
        lines = [
            f"# d={self.d} M={self.M:.17g} alpha={self.params.alpha:.17g} "
            f"weights={self.params.weights.digest()} size={len(self)}"
        ]
        lines.extend("\t".join(str(v) for v in row) for row in self.indices.tolist())
        return "\n".join(lines) + "\n"

    def dump(self, path) -> None:
        Path(path).write_text(self.dumps())


def read_index_dump(path) -> tuple[dict, np.ndarray]:
    """Parse a dump written by :meth:`IndexSet.dump` into (header, indices)."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing header line")
    header = dict(tok.split("=", 1) for tok in lines[0][1:].split())
    rows = [[int(v) for v in ln.split("\t")] for ln in lines[1:] if ln.strip()]
    d = int(header["d"])
    return header, np.array(rows, dtype=np.int64).reshape(-1, d)


def _canonical(rows) -> np.ndarray:
    rows = sorted(rows)
    if not rows:
        return np.zeros((0, 0), dtype=np.int64)
    return np.array(rows, dtype=np.int64)


def hyperbolic_count_1d(m: float, alpha: float) -> int:
    """|{h != 0 : |h|^alpha <= m}| = 2 floor(m^(1/alpha))."""
    if m <= 0:
        return 0
    k = int(math.floor(m ** (1.0 / alpha)))
    while (k + 1) ** alpha <= m:
        k += 1
    while k > 0 and k**alpha > m:
        k -= 1
    return 2 * k


def cardinality_bound(params: SpaceParams, M: float, q: float) -> float:
    """Upper bound M^q sum_u [2 zeta(alpha q)]^|u| gamma_u^q on |A_d(M)|."""
    if not params.alpha * q > 1:
        raise ValueError(f"q = {q} must exceed 1/alpha = {1 / params.alpha}")
    c = 2.0 * zeta(params.alpha * q)
    return float(M**q * params.weights.powered(q).subset_sum([c] * params.d))


def _magnitudes(k: int, m: float, alpha: float):
    """All (a_1..a_k), a_i >= 1, with prod a_i^alpha <= m (slightly relaxed)."""
    slack = 1.0 + 1e-12
    out = []

    def descend(prefix, budget):
        if len(prefix) == k:
            out.append(tuple(prefix))
            return
        cap = int(math.floor((budget * slack) ** (1.0 / alpha)))
        for a in range(1, cap + 1):
            prefix.append(a)
            descend(prefix, budget / a**alpha)
            prefix.pop()

    descend([], m)
    return out


def enumerate_index_set(params: SpaceParams, M: float, budget: int = DEFAULT_BUDGET) -> IndexSet:
    """
    Enumerate A_d(M) exactly (boundary r(h) = M included).

    Raises ``BudgetExceededError`` when the cardinality bound at q = 1
    exceeds ``budget``.
    """
    if not M > 0:
        raise ValueError("M must be positive")
    d = params.d
    bound = min(cardinality_bound(params, M, q) for q in (1.0, 1.5, 2.0) if params.alpha * q > 1)
    if bound > budget:
        raise BudgetExceededError(f"|A_d(M)| may reach {bound:.3g} > budget {budget}")
    table = params.weights.as_array()
    rows = []
    for mask in range(1 << d):
        g = table[mask]
        if g <= 0:
            continue
        if mask == 0:
            if M >= 1:
                rows.append((0,) * d)
            continue
        coords = [j - 1 for j in mask_to_subset(mask)]
        mags = _magnitudes(len(coords), g * M, params.alpha)
        if not mags:
            continue
        candidates = []
        for mag in mags:
            for signs in product((1, -1), repeat=len(coords)):
                h = [0] * d
                for c, a, sgn in zip(coords, mag, signs):
                    h[c] = sgn * a
                candidates.append(h)
        arr = np.array(candidates, dtype=np.int64)
        keep = r_values(params, arr, table) <= M
        rows.extend(map(tuple, arr[keep].tolist()))
    indices = _canonical(rows)
    if indices.size == 0:
        indices = np.zeros((0, d), dtype=np.int64)
    return IndexSet(M, params, indices)


def box_scan_index_set(params: SpaceParams, M: float, radius: int | None = None) -> np.ndarray:
    """Reference enumeration: test every h in a box that contains A_d(M)."""
    d = params.d
    table = params.weights.as_array()
    if radius is None:
        radius = int(math.floor((table.max() * M) ** (1.0 / params.alpha))) + 1
    axis = np.arange(-radius, radius + 1, dtype=np.int64)
    grid = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    keep = r_values(params, grid, table) <= M
    indices = _canonical(map(tuple, grid[keep].tolist()))
    if indices.size == 0:
        return np.zeros((0, d), dtype=np.int64)
    return indices
