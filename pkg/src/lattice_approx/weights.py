"""
Weight sequences {gamma_u} indexed by subsets u of {1, ..., d}.

Subsets are handled internally as bitmasks: coordinate j (1-based) is bit
``j - 1``. Every public function also accepts an iterable of 1-based
coordinate indices.

Four families are supported:

* ``general``  explicit table, missing subsets have weight 0
* ``product``  gamma_u = prod_{j in u} gamma_j
* ``order``    gamma_u = Gamma_{|u|}  (order dependent)
* ``pod``      gamma_u = Gamma_{|u|} * prod_{j in u} gamma_j

The empty set always carries weight 1.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .korobov import zeta

__all__ = [
    "WeightModel",
    "to_mask",
    "mask_to_subset",
    "popcount",
    "check_decay_condition",
    "check_decay_condition_bruteforce",
]

KINDS = ("general", "product", "order", "pod")
MAX_GENERAL_DIM = 63
MAX_TABLE_DIM = 22


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def to_mask(u) -> int:
    """Convert a subset (bitmask or iterable of 1-based indices) to a bitmask."""
    if isinstance(u, (int, np.integer)):
        if u < 0:
            raise ValueError(f"negative subset mask {u}")
        return int(u)
    mask = 0
    for j in u:
        j = int(j)
        if j < 1:
            raise ValueError(f"coordinate indices are 1-based, got {j}")
        mask |= 1 << (j - 1)
    return mask


def mask_to_subset(mask: int) -> tuple[int, ...]:
    out = []
    j = 1
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return tuple(out)


def _parse_subset_key(key: str) -> int:
    key = key.strip()
    if key in ("", "{}", "()"):
        return 0
    return to_mask(int(tok) for tok in key.strip("{}()[]").split(","))


@dataclass(frozen=True)
class WeightModel:
    """
    Immutable evaluator for subset weights gamma_u, u a subset of {1:d}.

    Use the classmethod constructors rather than the raw initializer.

    Parameters
    ----------
    kind : str
        One of ``"general"``, ``"product"``, ``"order"``, ``"pod"``.
    d : int
        Dimension.
    gammas : tuple of float
        Coordinate weights gamma_1..gamma_d (product and POD).
    order_factors : tuple of float
        Gamma_0..Gamma_d with Gamma_0 = 1 (order dependent and POD).
    table : tuple of (mask, weight) pairs
        Explicit weights for the general kind; absent subsets weigh 0.
    """

    kind: str
    d: int
    gammas: tuple[float, ...] = ()
    order_factors: tuple[float, ...] = ()
    table: tuple[tuple[int, float], ...] = ()
    _lookup: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.d < 1:
            raise ValueError("dimension d must be >= 1")
        if self.kind in ("product", "pod"):
            if len(self.gammas) != self.d:
                raise ValueError(f"need {self.d} coordinate weights, got {len(self.gammas)}")
            if any(not (g >= 0) for g in self.gammas):
                raise ValueError("coordinate weights must be nonnegative")
        if self.kind in ("order", "pod"):
            if len(self.order_factors) != self.d + 1:
                raise ValueError(f"need {self.d + 1} order factors, got {len(self.order_factors)}")
            if self.order_factors[0] != 1:
                raise ValueError("order factor Gamma_0 must equal 1")
            if any(not (g >= 0) for g in self.order_factors):
                raise ValueError("order factors must be nonnegative")
        if self.kind == "general":
            if self.d > MAX_GENERAL_DIM:
                raise ValueError(f"general weights support d <= {MAX_GENERAL_DIM}")
            lookup = {}
            for mask, value in self.table:
                if mask >> self.d:
                    raise ValueError(f"subset {mask_to_subset(mask)} not inside {{1:{self.d}}}")
                if not (value >= 0):
                    raise ValueError("weights must be nonnegative")
                lookup[mask] = float(value)
            if lookup.get(0, 1.0) != 1.0:
                raise ValueError("the empty set must carry weight 1")
            lookup[0] = 1.0
            object.__setattr__(self, "_lookup", lookup)

    # -- constructors -----------------------------------------------------

    @classmethod
    def product(cls, gammas: Sequence[float]) -> "WeightModel":
        g = tuple(float(x) for x in gammas)
        return cls("product", len(g), gammas=g)

    @classmethod
    def order_dependent(cls, order_factors: Sequence[float]) -> "WeightModel":
        f = tuple(float(x) for x in order_factors)
        return cls("order", len(f) - 1, order_factors=f)

    @classmethod
    def pod(cls, order_factors: Sequence[float], gammas: Sequence[float]) -> "WeightModel":
        f = tuple(float(x) for x in order_factors)
        g = tuple(float(x) for x in gammas)
        return cls("pod", len(g), gammas=g, order_factors=f)

    @classmethod
    def general(cls, table: Mapping, d: int) -> "WeightModel":
        """Explicit weights; keys are bitmasks or iterables of 1-based indices."""
        items = {}
        for key, value in table.items():
            items[to_mask(key)] = float(value)
        items.setdefault(0, 1.0)
        return cls("general", d, table=tuple(sorted(items.items())))

    @classmethod
    def from_function(cls, func, d: int) -> "WeightModel":
        """Materialize ``func(subset_tuple)`` over all subsets into a general model."""
        table = {mask: func(mask_to_subset(mask)) for mask in range(1, 1 << d)}
        return cls.general(table, d)

    # -- evaluation -------------------------------------------------------

    def gamma(self, u) -> float:
        """Weight of subset ``u``; raises ``ValueError`` if ``u`` leaves {1:d}."""
        mask = to_mask(u)
        if mask >> self.d:
            raise ValueError(f"subset {mask_to_subset(mask)} not inside {{1:{self.d}}}")
        if mask == 0:
            return 1.0
        if self.kind == "general":
            return self._lookup.get(mask, 0.0)
        if self.kind == "order":
            return self.order_factors[popcount(mask)]
        value = 1.0
        for j in mask_to_subset(mask):
            value *= self.gammas[j - 1]
        if self.kind == "pod":
            value *= self.order_factors[popcount(mask)]
        return value

    def __call__(self, u) -> float:
        return self.gamma(u)

    def as_array(self) -> np.ndarray:
        """All 2^d weights indexed by bitmask."""
        if self.d > MAX_TABLE_DIM:
            raise ValueError(f"weight table for d={self.d} is too large")
        size = 1 << self.d
        if self.kind == "general":
            arr = np.zeros(size)
            for mask, value in self._lookup.items():
                arr[mask] = value
            return arr
        card = np.zeros(size, dtype=np.int64)
        prod = np.ones(size)
        for j in range(self.d):
            lo, hi = 1 << j, 1 << (j + 1)
            card[lo:hi] = card[:lo] + 1
            g = self.gammas[j] if self.kind in ("product", "pod") else 1.0
            prod[lo:hi] = prod[:lo] * g
        if self.kind in ("order", "pod"):
            prod = prod * np.asarray(self.order_factors)[card]
        return prod

    def powered(self, p: float) -> "WeightModel":
        """Model with weights gamma_u ** p, same family."""
        if self.kind == "general":
            return WeightModel.general({m: v ** p for m, v in self._lookup.items()}, self.d)
        gam = tuple(g ** p for g in self.gammas)
        fac = tuple(f ** p for f in self.order_factors)
        return WeightModel(self.kind, self.d, gammas=gam, order_factors=fac)

    def restrict(self, s: int) -> "WeightModel":
        """Weights for subsets of {1:s} only."""
        if not 1 <= s <= self.d:
            raise ValueError(f"cannot restrict d={self.d} model to s={s}")
        if self.kind == "general":
            keep = {m: v for m, v in self._lookup.items() if not m >> s}
            return WeightModel.general(keep, s)
        return WeightModel(
            self.kind,
            s,
            gammas=self.gammas[:s],
            order_factors=self.order_factors[: s + 1],
        )

    def subset_sum(self, factors, cardinality: str = "one"):
        """
        Evaluate sum_u kappa(u) gamma_u prod_{j in u} a_j.

        ``factors`` holds d entries a_j, each a scalar or an array (all arrays
        broadcast together). ``cardinality`` picks kappa: ``"one"``,
        ``"size"`` (|u|) or ``"size_or_one"`` (max(|u|, 1)).

        Product weights use the factorized forms, order dependent and POD
        weights an elementary-symmetric recursion, general weights a sweep
        over the stored table.
        """
        if len(factors) != self.d:
            raise ValueError(f"need {self.d} factors, got {len(factors)}")
        if cardinality not in ("one", "size", "size_or_one"):
            raise ValueError(f"unknown cardinality factor {cardinality!r}")
        a = [np.asarray(f, dtype=float) for f in factors]

        if self.kind == "product":
            terms = [g * aj for g, aj in zip(self.gammas, a)]
            full = np.ones(np.broadcast_shapes(*(t.shape for t in terms)))
            for t in terms:
                full = full * (1.0 + t)
            if cardinality == "one":
                return full
            # sum_u |u| prod t_j = sum_j t_j prod_{i != j} (1 + t_i)
            sized = np.zeros_like(full)
            for j in range(self.d):
                rest = np.ones_like(full)
                for i, t in enumerate(terms):
                    if i != j:
                        rest = rest * (1.0 + t)
                sized = sized + terms[j] * rest
            return sized if cardinality == "size" else sized + 1.0

        if self.kind in ("order", "pod"):
            shape = np.broadcast_shapes(*(x.shape for x in a))
            elem = [np.ones(shape)] + [np.zeros(shape) for _ in range(self.d)]
            for j in range(self.d):
                t = a[j] * (self.gammas[j] if self.kind == "pod" else 1.0)
                for k in range(j + 1, 0, -1):
                    elem[k] = elem[k] + t * elem[k - 1]
            kappa = _kappa_by_order(self.d, cardinality)
            return sum(kappa[k] * self.order_factors[k] * elem[k] for k in range(self.d + 1))

        shape = np.broadcast_shapes(*(x.shape for x in a))
        total = np.zeros(shape)
        for mask, value in self._lookup.items():
            if value == 0.0:
                continue
            k = popcount(mask)
            kap = _kappa_by_order(self.d, cardinality)[k]
            term = np.full(shape, value * kap)
            for j in mask_to_subset(mask):
                term = term * a[j - 1]
            total = total + term
        return total

    def max_weight(self) -> float:
        if self.kind == "general":
            return max(self._lookup.values())
        if self.kind == "product":
            return math.prod(max(g, 1.0) for g in self.gammas)
        return float(self.as_array().max())

    # -- serialization ----------------------------------------------------

    def to_config(self) -> dict:
        cfg: dict = {"kind": self.kind, "d": self.d}
        if self.kind in ("product", "pod"):
            cfg["gammas"] = [repr(g) for g in self.gammas]
        if self.kind in ("order", "pod"):
            cfg["order_factors"] = [repr(g) for g in self.order_factors]
        if self.kind == "general":
            cfg["table"] = {
                ",".join(str(j) for j in mask_to_subset(m)): repr(v)
                for m, v in sorted(self._lookup.items())
                if m != 0
            }
        return cfg

    @classmethod
    def from_config(cls, cfg: Mapping) -> "WeightModel":
        """Inverse of :meth:`to_config`; weights may be numbers or decimal strings."""
        try:
            kind = cfg["kind"]
            d = int(cfg["d"])
        except KeyError as exc:
            raise ValueError(f"weight config missing key {exc}") from None
        if kind == "product":
            model = cls.product([float(x) for x in cfg["gammas"]])
        elif kind == "order":
            model = cls.order_dependent([float(x) for x in cfg["order_factors"]])
        elif kind == "pod":
            model = cls.pod([float(x) for x in cfg["order_factors"]], [float(x) for x in cfg["gammas"]])
        elif kind == "general":
            table = {_parse_subset_key(k): float(v) for k, v in cfg.get("table", {}).items()}
            model = cls.general(table, d)
        else:
            raise ValueError(f"unknown weight kind {kind!r}")
        if model.d != d:
            raise ValueError(f"config says d={d} but weights define d={model.d}")
        return model

    def to_json(self) -> str:
        return json.dumps(self.to_config(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "WeightModel":
        return cls.from_config(json.loads(text))

    def digest(self) -> str:
        """Short stable hash of the canonical config."""
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def _kappa_by_order(d: int, cardinality: str) -> list[float]:
    if cardinality == "one":
        return [1.0] * (d + 1)
    if cardinality == "size":
        return [float(k) for k in range(d + 1)]
    return [float(max(k, 1)) for k in range(d + 1)]


def _zeta_factor(alpha: float, lam: float) -> float:
    if alpha * lam <= 1:
        raise ValueError(f"alpha*lambda = {alpha * lam} <= 1: zeta series diverges")
    return 2.0 * zeta(alpha * lam)


def check_decay_condition(model: WeightModel, alpha: float, lam: float, d: int | None = None) -> float:
    """
    Smallest xi >= 1 with gamma_{u+w}^lam * [2 zeta(alpha lam)]^|w| <= xi gamma_u^lam.

    The pairs (u, w) range over u in {1:s}, w in {s+1:d}, s >= 1. Returns
    ``math.inf`` when some gamma_u = 0 has a positive superset gamma_{u+w},
    i.e. no finite xi exists. Cost is O(3^d).
    """
    d = model.d if d is None else d
    if d > model.d:
        raise ValueError(f"model has dimension {model.d} < {d}")
    c = _zeta_factor(alpha, lam)
    table = model.as_array() if d == model.d else model.restrict(d).as_array()
    powered = table ** lam
    xi = 1.0
    full = (1 << d) - 1
    for u in range(1 << d):
        top = u.bit_length()
        # w may use coordinates above max(max(u), 1)
        lo = max(top, 1)
        free = full & ~((1 << lo) - 1)
        w = free
        while w:
            num = powered[u | w] * c ** popcount(w)
            if powered[u] > 0:
                xi = max(xi, num / powered[u])
            elif num > 0:
                return math.inf
            w = (w - 1) & free
    return xi


def check_decay_condition_bruteforce(model: WeightModel, alpha: float, lam: float) -> float:
    """Literal scan over (s, u, w); reference for :func:`check_decay_condition`."""
    d = model.d
    c = _zeta_factor(alpha, lam)
    xi = 1.0
    for s in range(1, d + 1):
        head = range(1, s + 1)
        tail = range(s + 1, d + 1)
        for ku in range(s + 1):
            for u in combinations(head, ku):
                gu = model.gamma(u) ** lam
                for kw in range(1, d - s + 1):
                    for w in combinations(tail, kw):
                        guw = model.gamma(u + w) ** lam
                        if gu == 0:
                            if guw > 0:
                                return math.inf
                            continue
                        xi = max(xi, guw * c**kw / gu)
    return xi
