"""
Periodic grids and extended-real grid functions.

A GridFn stores its samples in a float array where ``numpy.inf`` is the
+infinity tag: ordering, ``min`` and ``+`` with finite numbers are exact in
IEEE arithmetic, so no sentinel value is ever compared by magnitude.
NaN and -inf are rejected at construction.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import ParameterError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Torus:
    """Uniform grid on R / period Z with nodes x_i = i * dx."""

    period: float = TWO_PI
    n: int = 256

    def __post_init__(self):
        if not self.period > 0:
            raise ParameterError(f"period must be positive, got {self.period}")
        if int(self.n) != self.n or self.n < 3:
            raise ParameterError(f"node count must be an integer >= 3, got {self.n}")

    @property
    def dx(self) -> float:
        return self.period / self.n

    def nodes(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    def distance(self, x, y):
        """Circle distance, vectorized; always in [0, period/2]."""
        d = np.mod(np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)), self.period)
        return np.minimum(d, self.period - d)

    def displacement(self, i, j):
        """Signed shortest index offset from node j to node i."""
        half = self.n // 2
        return np.mod(np.asarray(i) - np.asarray(j) + half, self.n) - half

    def index_of(self, x: float) -> int:
        return int(round(float(x) / self.dx)) % self.n


@functools.total_ordering
@dataclass(frozen=True)
class ExtReal:
    """A value of R ∪ {+inf}; ``value`` is ignored when ``infinite`` is set."""

    value: float = 0.0
    infinite: bool = False

    @classmethod
    def finite(cls, value: float) -> "ExtReal":
        return cls.from_float(value)

    @classmethod
    def plus_infinity(cls) -> "ExtReal":
        return cls(0.0, True)

    @classmethod
    def from_float(cls, value: float) -> "ExtReal":
        value = float(value)
        if math.isnan(value) or value == -math.inf:
            raise ParameterError(f"{value} is not an extended real")
        if value == math.inf:
            return cls(0.0, True)
        return cls(value, False)

    def to_float(self) -> float:
        return math.inf if self.infinite else self.value

    def __eq__(self, other):
        if not isinstance(other, ExtReal):
            return NotImplemented
        if self.infinite or other.infinite:
            return self.infinite and other.infinite
        return self.value == other.value

    def __hash__(self):
        return hash(("inf",)) if self.infinite else hash(self.value)

    def __lt__(self, other):
        if not isinstance(other, ExtReal):
            return NotImplemented
        if self.infinite:
            return False
        return other.infinite or self.value < other.value

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = ExtReal.from_float(other)
        if self.infinite or other.infinite:
            return ExtReal.plus_infinity()
        return ExtReal(self.value + other.value)

    __radd__ = __add__

    def __repr__(self):
        return "ExtReal(+inf)" if self.infinite else f"ExtReal({self.value!r})"


PLUS_INF = ExtReal.plus_infinity()

Scalar = Union[float, int, ExtReal]


def _as_float(c: Scalar) -> float:
    if isinstance(c, ExtReal):
        return c.to_float()
    return ExtReal.from_float(c).to_float()


@dataclass(frozen=True, eq=False)
class GridFn:
    """Samples of an extended-real function on a Torus."""

    torus: Torus
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.torus.n,):
            raise ParameterError(f"expected {self.torus.n} values, got shape {values.shape}")
        if np.isnan(values).any():
            raise ParameterError("grid function contains NaN")
        if np.isneginf(values).any():
            raise ParameterError("grid function contains -inf")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def infinite_mask(self) -> np.ndarray:
        return np.isinf(self.values)

    @property
    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)

    @property
    def all_finite(self) -> bool:
        return bool(self.finite_mask.all())

    @property
    def all_infinite(self) -> bool:
        return bool(self.infinite_mask.all())

    def at(self, i: int) -> ExtReal:
        return ExtReal.from_float(self.values[i])

    def with_values(self, values) -> "GridFn":
        return GridFn(self.torus, values)

    def minimum(self, other: "GridFn") -> "GridFn":
        _check_common(self, other)
        return GridFn(self.torus, np.minimum(self.values, other.values))

    def maximum(self, other: "GridFn") -> "GridFn":
        _check_common(self, other)
        return GridFn(self.torus, np.maximum(self.values, other.values))

    def shifted(self, c: float) -> "GridFn":
        return GridFn(self.torus, self.values + c)

    def scaled(self, a: float) -> "GridFn":
        if a < 0:
            raise ParameterError("negative scaling would flip +inf")
        return GridFn(self.torus, self.values * a)

    def negated(self) -> "GridFn":
        if not self.all_finite:
            raise ParameterError("cannot negate a grid function with +inf entries")
        return GridFn(self.torus, -self.values)

    def clamped(self, ceiling: float) -> np.ndarray:
        """Float array with +inf replaced by ``ceiling``."""
        return np.where(self.infinite_mask, ceiling, self.values)

    @classmethod
    def from_clamped(cls, torus: Torus, values: np.ndarray, ceiling: float) -> "GridFn":
        """Re-tag values at or above ceiling/2 as +inf."""
        values = np.where(values >= 0.5 * ceiling, np.inf, values)
        return cls(torus, values)

    def lipschitz_estimate(self) -> float:
        """Largest neighbor difference quotient over pairs of finite nodes."""
        v = self.values
        nxt = np.roll(v, -1)
        both = np.isfinite(v) & np.isfinite(nxt)
        if not both.any():
            return 0.0
        return float(np.max(np.abs(nxt[both] - v[both])) / self.torus.dx)

    def sup_abs(self) -> float:
        fin = self.values[self.finite_mask]
        return float(np.max(np.abs(fin))) if fin.size else 0.0

    def __repr__(self):
        n_inf = int(self.infinite_mask.sum())
        return f"GridFn(n={self.torus.n}, period={self.torus.period:g}, infinite={n_inf})"


def _check_common(f: GridFn, g: GridFn):
    if f.torus != g.torus:
        raise ParameterError(f"grid functions live on different tori: {f.torus} vs {g.torus}")


def constant(torus: Torus, c: Scalar) -> GridFn:
    return GridFn(torus, np.full(torus.n, _as_float(c)))


def from_function(torus: Torus, f: Callable[[np.ndarray], np.ndarray]) -> GridFn:
    return GridFn(torus, np.broadcast_to(np.asarray(f(torus.nodes()), dtype=float), (torus.n,)))


def point_data(torus: Torus, y: int, c: Scalar) -> GridFn:
    """c at node y and +inf elsewhere; c = +inf gives the identically +inf function."""
    if not 0 <= int(y) < torus.n:
        raise ParameterError(f"node index {y} outside [0, {torus.n})")
    values = np.full(torus.n, np.inf)
    values[int(y)] = _as_float(c)
    return GridFn(torus, values)


def squared_distance(torus: Torus, centers: Sequence[float], weight: float = 0.5) -> GridFn:
    """weight * min over centers of d(x, y)^2."""
    if len(centers) == 0:
        raise ParameterError("need at least one center")
    x = torus.nodes()
    d = np.min(torus.distance(x[:, None], np.asarray(centers, dtype=float)[None, :]), axis=1)
    return GridFn(torus, weight * d**2)


def lipschitz_ladder(phi: GridFn, k: float) -> GridFn:
    """Inf-convolution phi_k(x) = min_y phi(y) + k d(x, y).

    phi_k is k-Lipschitz, lies below phi and is nondecreasing in k.
    """
    if k < 0:
        raise ParameterError(f"ladder level must be nonnegative, got {k}")
    torus = phi.torus
    idx = np.flatnonzero(phi.finite_mask)
    out = np.full(torus.n, np.inf)
    if idx.size == 0:
        return GridFn(torus, out)
    x = torus.nodes()
    for start in range(0, idx.size, 256):
        ys = idx[start:start + 256]
        dist = torus.distance(x[:, None], x[ys][None, :])
        out = np.minimum(out, np.min(phi.values[ys][None, :] + k * dist, axis=1))
    return GridFn(torus, out)


def relaxed_lower_limit(slices: Sequence[GridFn], stencil_radius: int = 1) -> GridFn:
    """Min over the tail slices and over nodes within ``stencil_radius`` cells."""
    if len(slices) == 0:
        raise ParameterError("relaxed lower limit needs at least one slice")
    torus = slices[0].torus
    for s in slices[1:]:
        _check_common(slices[0], s)
    low = np.min(np.vstack([s.values for s in slices]), axis=0)
    out = low.copy()
    for r in range(1, int(stencil_radius) + 1):
        out = np.minimum(out, np.minimum(np.roll(low, r), np.roll(low, -r)))
    return GridFn(torus, out)


def sup_metric(f: GridFn, g: GridFn, ceiling: float = 1e6) -> float:
    """Sup distance; a node where exactly one side is +inf counts as ``ceiling``."""
    _check_common(f, g)
    fi, gi = f.infinite_mask, g.infinite_mask
    both = ~fi & ~gi
    gap = float(np.max(np.abs(f.values[both] - g.values[both]))) if both.any() else 0.0
    if (fi ^ gi).any():
        gap = max(gap, float(ceiling))
    return gap
