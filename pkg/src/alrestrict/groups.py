"""Compact group backends: SU(2), U(1) and finite groups given by a Cayley table.

Elements are stored as plain numpy arrays so that everything vectorises over a
leading batch shape:

* ``SU2``: unit quaternions ``(w, x, y, z)``, trailing axis of length 4.
  The matrix trace is ``2 w``.
* ``U1``: angles in ``[0, 2*pi)``, no trailing axis.
* ``FiniteGroup``: integer element indices into the Cayley table.

A *tuple* of ``k`` elements (a point of ``G^k``) adds one more axis in front
of the element axes, so an ``SU2`` batch of 3-tuples has shape ``(batch, 3, 4)``.

Metric conventions (the Haar measure does not fix them): SU(2) uses the
geodesic angle on the unit 3-sphere, U(1) the arc length on the unit circle,
finite groups the discrete metric. All three are bi-invariant and range over
``[0, pi]`` (``{0, 1}`` for finite groups). Products of groups use the
Euclidean combination of component distances.

The small ``GroupElement``/``GroupTuple`` wrappers at the bottom carry their
group along and reject mixed backends; the batched methods on the group
objects do not check.
"""

from __future__ import annotations

import itertools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import gamma

from .montecarlo import Estimate, mc_mean

TWO_PI = 2.0 * np.pi

# Rejection sampling gives up below this acceptance rate.
MIN_ACCEPTANCE = 1e-6


class GroupMismatchError(ValueError):
    """Two operands live in different groups."""


class BallSamplingError(RuntimeError):
    """A metric ball is too small a fraction of the group to sample by rejection."""


class CompactGroup(ABC):
    """Batched group operations. Subclasses fix the element representation."""

    name: str = "G"
    elem_shape: tuple[int, ...] = ()
    metric_scale: float = 1.0

    # -- algebra -------------------------------------------------------
    @abstractmethod
    def identity(self, shape: tuple[int, ...] = ()) -> np.ndarray: ...

    @abstractmethod
    def multiply(self, g: np.ndarray, h: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def inverse(self, g: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def haar(self, rng: np.random.Generator, shape: tuple[int, ...] = ()) -> np.ndarray:
        """Normalized Haar samples with batch shape ``shape``."""

    # -- metric --------------------------------------------------------
    @abstractmethod
    def distance(self, g: np.ndarray, h: np.ndarray) -> np.ndarray: ...

    def product_distance(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Distance on ``G^k``; the tuple axis sits just before the element axes."""
        d = self.distance(x, y)
        return np.sqrt(np.sum(d * d, axis=-1))

    def norm(self, g: np.ndarray) -> np.ndarray:
        """Distance to the identity."""
        return self.distance(g, self.identity(np.shape(g)[: np.ndim(g) - len(self.elem_shape)]))

    @abstractmethod
    def radial_ball_sample(
        self, rng: np.random.Generator, r: float, shape: tuple[int, ...]
    ) -> np.ndarray:
        """Haar samples restricted to the single-factor ball ``B(e, r)``."""

    @abstractmethod
    def ball_volume_fraction(self, k: int, r: float) -> Estimate:
        """Haar mass of a radius-``r`` product-metric ball in ``G^k``."""

    # -- characters ----------------------------------------------------
    def re_trace(self, g: np.ndarray) -> np.ndarray:
        raise ValueError(f"{self.name} has no built-in trace")

    def abs_trace_sq(self, g: np.ndarray) -> np.ndarray:
        raise ValueError(f"{self.name} has no built-in trace")

    # -- helpers -------------------------------------------------------
    def tuple_axis(self, ndim: int) -> int:
        return ndim - len(self.elem_shape) - 1

    def batch_shape(self, x: np.ndarray) -> tuple[int, ...]:
        return np.shape(x)[: np.ndim(x) - len(self.elem_shape)]

    def take(self, x: np.ndarray, index: int) -> np.ndarray:
        """Component ``index`` of a batch of tuples."""
        return np.take(x, index, axis=self.tuple_axis(np.ndim(x)))

    def stack(self, parts: Sequence[np.ndarray]) -> np.ndarray:
        """Assemble tuple components into a batch of tuples."""
        parts = [np.asarray(p) for p in parts]
        return np.stack(parts, axis=parts[0].ndim - len(self.elem_shape))

    def __repr__(self) -> str:
        return self.name


def _mc_product_ball_fraction(
    group: CompactGroup, k: int, r: float, n_samples: int = 400_000, seed: int = 20240101
) -> Estimate:
    def hits(rng: np.random.Generator, size: int) -> np.ndarray:
        x = group.haar(rng, (size, k))
        return (group.product_distance(x, group.identity((size, k))) < r).astype(float)

    return mc_mean(hits, n_samples, seed)


class SU2(CompactGroup):
    """SU(2) as unit quaternions."""

    name = "SU2"
    elem_shape = (4,)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SU2)

    def __hash__(self) -> int:
        return hash("SU2")

    def identity(self, shape: tuple[int, ...] = ()) -> np.ndarray:
        q = np.zeros(tuple(shape) + (4,))
        q[..., 0] = 1.0
        return q

    def multiply(self, g: np.ndarray, h: np.ndarray) -> np.ndarray:
        g = np.asarray(g, dtype=float)
        h = np.asarray(h, dtype=float)
        w1, x1, y1, z1 = np.moveaxis(g, -1, 0)
        w2, x2, y2, z2 = np.moveaxis(h, -1, 0)
        q = np.stack(
            [
                w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
                w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
                w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
                w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
            ],
            axis=-1,
        )
        # renormalise: keeps long word products on the sphere
        return q / np.linalg.norm(q, axis=-1, keepdims=True)

    def inverse(self, g: np.ndarray) -> np.ndarray:
        return np.asarray(g, dtype=float) * np.array([1.0, -1.0, -1.0, -1.0])

    def haar(self, rng: np.random.Generator, shape: tuple[int, ...] = ()) -> np.ndarray:
        q = rng.standard_normal(tuple(shape) + (4,))
        return q / np.linalg.norm(q, axis=-1, keepdims=True)

    def distance(self, g: np.ndarray, h: np.ndarray) -> np.ndarray:
        g = np.asarray(g, dtype=float)
        h = np.asarray(h, dtype=float)
        # angle between unit vectors, accurate at both ends of [0, pi]
        return 2.0 * np.arctan2(np.linalg.norm(g - h, axis=-1), np.linalg.norm(g + h, axis=-1))

    def radial_ball_sample(
        self, rng: np.random.Generator, r: float, shape: tuple[int, ...]
    ) -> np.ndarray:
        # geodesic polar coordinates: radius density ~ sin^2 t, uniform direction on S^2
        r = min(r, np.pi)
        peak = 1.0 if r >= np.pi / 2 else np.sin(r) ** 2
        n = int(np.prod(shape, dtype=int))
        t = np.empty(0)
        while t.size < n:
            need = n - t.size
            cand = r * rng.random(2 * need + 16)
            keep = rng.random(cand.size) * peak < np.sin(cand) ** 2
            t = np.concatenate([t, cand[keep]])
        t = t[:n]
        u = rng.standard_normal((n, 3))
        u /= np.linalg.norm(u, axis=-1, keepdims=True)
        q = np.concatenate([np.cos(t)[:, None], np.sin(t)[:, None] * u], axis=-1)
        return q.reshape(tuple(shape) + (4,))

    @staticmethod
    def cap_fraction(r: float) -> float:
        r = min(max(r, 0.0), np.pi)
        return (r - np.sin(r) * np.cos(r)) / np.pi

    def ball_volume_fraction(self, k: int, r: float) -> Estimate:
        if k < 1 or r <= 0:
            raise ValueError("need k >= 1 and r > 0")
        if k == 1:
            return Estimate.exact(self.cap_fraction(r))
        if r >= np.pi * math.sqrt(k):
            return Estimate.exact(1.0)
        if k == 2:
            # P(t1^2 + t2^2 < r^2) with t_i ~ (2/pi) sin^2 t on [0, pi]
            def integrand(t: float) -> float:
                return (2.0 / np.pi) * np.sin(t) ** 2 * self.cap_fraction(math.sqrt(r * r - t * t))

            val, _ = integrate.quad(integrand, 0.0, min(r, np.pi), epsabs=1e-13, epsrel=1e-12, limit=200)
            return Estimate.exact(val)
        return _mc_product_ball_fraction(self, k, r)

    def re_trace(self, g: np.ndarray) -> np.ndarray:
        return 2.0 * np.asarray(g)[..., 0]

    def abs_trace_sq(self, g: np.ndarray) -> np.ndarray:
        return 4.0 * np.asarray(g)[..., 0] ** 2


def _wrap_angle(x: np.ndarray) -> np.ndarray:
    # np.mod(-tiny, 2 pi) rounds up to 2 pi itself
    a = np.mod(x, TWO_PI)
    return np.where(a >= TWO_PI, 0.0, a)


class U1(CompactGroup):
    """U(1) as angles in [0, 2*pi)."""

    name = "U1"
    elem_shape = ()

    def __eq__(self, other: object) -> bool:
        return isinstance(other, U1)

    def __hash__(self) -> int:
        return hash("U1")

    def identity(self, shape: tuple[int, ...] = ()) -> np.ndarray:
        return np.zeros(tuple(shape))

    def multiply(self, g: np.ndarray, h: np.ndarray) -> np.ndarray:
        return _wrap_angle(np.asarray(g, dtype=float) + np.asarray(h, dtype=float))

    def inverse(self, g: np.ndarray) -> np.ndarray:
        return _wrap_angle(-np.asarray(g, dtype=float))

    def haar(self, rng: np.random.Generator, shape: tuple[int, ...] = ()) -> np.ndarray:
        return rng.uniform(0.0, TWO_PI, tuple(shape))

    def distance(self, g: np.ndarray, h: np.ndarray) -> np.ndarray:
        d = np.mod(np.asarray(g, dtype=float) - np.asarray(h, dtype=float), TWO_PI)
        return np.minimum(d, TWO_PI - d)

    def radial_ball_sample(
        self, rng: np.random.Generator, r: float, shape: tuple[int, ...]
    ) -> np.ndarray:
        r = min(r, np.pi)
        return _wrap_angle(rng.uniform(-r, r, tuple(shape)))

    def ball_volume_fraction(self, k: int, r: float) -> Estimate:
        if k < 1 or r <= 0:
            raise ValueError("need k >= 1 and r > 0")
        if k == 1:
            return Estimate.exact(min(r, np.pi) / np.pi)
        if r <= np.pi:
            # a Euclidean k-ball that still fits inside the fundamental cube
            unit_ball = np.pi ** (k / 2) / gamma(k / 2 + 1)
            return Estimate.exact(unit_ball * r**k / TWO_PI**k)
        if r >= np.pi * math.sqrt(k):
            return Estimate.exact(1.0)
        return _mc_product_ball_fraction(self, k, r)

    def re_trace(self, g: np.ndarray) -> np.ndarray:
        return np.cos(g)

    def abs_trace_sq(self, g: np.ndarray) -> np.ndarray:
        return np.ones(np.shape(g))


class FiniteGroup(CompactGroup):
    """A finite group given by its Cayley table ``table[i, j] = i * j``.

    The table is validated on construction (closure, identity, inverses,
    associativity), so every later operation is exact.
    """

    elem_shape = ()

    def __init__(self, table: Sequence[Sequence[int]], name: str = "Finite",
                 labels: Optional[Sequence[str]] = None):
        tab = np.asarray(table, dtype=np.int64)
        if tab.ndim != 2 or tab.shape[0] != tab.shape[1] or tab.shape[0] == 0:
            raise ValueError("Cayley table must be a non-empty square matrix")
        order = tab.shape[0]
        if tab.min() < 0 or tab.max() >= order:
            raise ValueError("Cayley table entries out of range")
        ids = [e for e in range(order)
               if np.array_equal(tab[e], np.arange(order)) and np.array_equal(tab[:, e], np.arange(order))]
        if len(ids) != 1:
            raise ValueError("Cayley table has no two-sided identity")
        self.e = ids[0]
        inv = np.full(order, -1, dtype=np.int64)
        for i in range(order):
            hits = np.flatnonzero(tab[i] == self.e)
            if hits.size != 1 or tab[hits[0], i] != self.e:
                raise ValueError(f"element {i} has no two-sided inverse")
            inv[i] = hits[0]
        # (a b) c == a (b c) over all triples
        left = tab[tab[:, :, None], np.arange(order)[None, None, :]]
        right = tab[np.arange(order)[:, None, None], tab[None, :, :]]
        if not np.array_equal(left, right):
            raise ValueError("Cayley table is not associative")
        self.table = tab
        self.inv = inv
        self.order = order
        self.name = name
        self.labels = list(labels) if labels is not None else [str(i) for i in range(order)]
        if len(self.labels) != order:
            raise ValueError("labels must match the group order")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FiniteGroup) and np.array_equal(self.table, other.table)

    def __hash__(self) -> int:
        return hash(self.table.tobytes())

    def identity(self, shape: tuple[int, ...] = ()) -> np.ndarray:
        return np.full(tuple(shape), self.e, dtype=np.int64)

    def multiply(self, g: np.ndarray, h: np.ndarray) -> np.ndarray:
        return self.table[np.asarray(g, dtype=np.int64), np.asarray(h, dtype=np.int64)]

    def inverse(self, g: np.ndarray) -> np.ndarray:
        return self.inv[np.asarray(g, dtype=np.int64)]

    def haar(self, rng: np.random.Generator, shape: tuple[int, ...] = ()) -> np.ndarray:
        return rng.integers(0, self.order, tuple(shape), dtype=np.int64)

    def distance(self, g: np.ndarray, h: np.ndarray) -> np.ndarray:
        return (np.asarray(g) != np.asarray(h)).astype(float)

    def radial_ball_sample(
        self, rng: np.random.Generator, r: float, shape: tuple[int, ...]
    ) -> np.ndarray:
        if r <= 1.0:
            return self.identity(shape)
        return self.haar(rng, shape)

    def ball_volume_fraction(self, k: int, r: float) -> Estimate:
        if k < 1 or r <= 0:
            raise ValueError("need k >= 1 and r > 0")
        # product distance is sqrt(number of differing components)
        n = self.order
        total = sum(math.comb(k, j) * (n - 1) ** j for j in range(k + 1) if math.sqrt(j) < r)
        return Estimate.exact(total / n**k)

    def elements(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64)

    def tuples(self, k: int, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
        """Rows ``start:stop`` of the lexicographic enumeration of ``G^k``."""
        stop = self.order**k if stop is None else stop
        flat = np.arange(start, stop, dtype=np.int64)
        return np.stack(np.unravel_index(flat, (self.order,) * k), axis=-1).astype(np.int64)


def symmetric_group(n: int) -> FiniteGroup:
    """S_n with ``table[i, j]`` the composition ``p_i o p_j`` (apply ``p_j`` first)."""
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(p[q[x]] for x in range(n))] for q in perms] for p in perms]
    labels = ["(" + " ".join(map(str, p)) + ")" for p in perms]
    return FiniteGroup(table, name=f"S{n}", labels=labels)


def cyclic_group(n: int) -> FiniteGroup:
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    return FiniteGroup(table, name=f"Z{n}")


def make_group(spec: str) -> CompactGroup:
    """Group from a short name: ``SU2``, ``U1``, ``S<n>`` or ``Z<n>``."""
    key = spec.strip()
    upper = key.upper()
    if upper == "SU2":
        return SU2()
    if upper == "U1":
        return U1()
    if upper[:1] in ("S", "Z") and upper[1:].isdigit():
        n = int(upper[1:])
        if n < 1 or (upper[0] == "S" and n > 6):
            raise ValueError(f"unsupported finite group {spec!r}")
        return symmetric_group(n) if upper[0] == "S" else cyclic_group(n)
    raise ValueError(f"unknown group {spec!r}; expected SU2, U1, S<n> or Z<n>")


# ----------------------------------------------------------------------
# product balls


def ball_sample(
    group: CompactGroup,
    center: np.ndarray,
    r: float,
    rng: np.random.Generator,
    method: str = "polar",
) -> np.ndarray:
    """Haar-distributed samples from the product ball ``B(center, r)`` in ``G^k``.

    ``center`` is a batch of k-tuples; one sample is drawn per tuple. Both
    methods produce the normalized Haar measure restricted to the ball:

    * ``"haar"`` proposes from Haar on ``G^k`` and rejects outside the ball.
    * ``"polar"`` proposes each component from its single-factor ball (exact
      polar sampling), rejects outside the product ball, then translates by the
      centre. Same law, far higher acceptance for small ``r``.

    Every returned point satisfies ``product_distance(sample, center) < r``.
    """
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    if method not in ("polar", "haar"):
        raise ValueError(f"unknown ball sampling method {method!r}")
    center = np.asarray(center)
    batch = group.batch_shape(center)  # (..., k)
    out = np.array(center, copy=True)
    flat_center = center.reshape((-1,) + batch[-1:] + group.elem_shape)
    flat_out = out.reshape(flat_center.shape)
    k = batch[-1]
    todo = np.arange(flat_center.shape[0])
    proposed = 0
    accepted = 0
    while todo.size:
        c = flat_center[todo]
        m = todo.size
        if method == "haar":
            cand = group.haar(rng, (m, k))
        else:
            cand = group.multiply(c, group.radial_ball_sample(rng, r, (m, k)))
        ok = group.product_distance(cand, c) < r
        proposed += m
        accepted += int(ok.sum())
        flat_out[todo[ok]] = cand[ok]
        todo = todo[~ok]
        if todo.size and proposed >= 1_000_000 and accepted / proposed < MIN_ACCEPTANCE:
            raise BallSamplingError(
                f"acceptance {accepted}/{proposed} below {MIN_ACCEPTANCE:g} for r={r} in {group}^{k}"
            )
    return flat_out.reshape(out.shape)


# ----------------------------------------------------------------------
# value wrappers with backend checks


@dataclass(frozen=True, eq=False)
class GroupElement:
    group: CompactGroup
    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data)
        if data.shape != self.group.elem_shape:
            raise ValueError(f"{self.group} element must have shape {self.group.elem_shape}")
        object.__setattr__(self, "data", data)


@dataclass(frozen=True, eq=False)
class GroupTuple:
    group: CompactGroup
    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.asarray(self.data)
        if data.ndim != 1 + len(self.group.elem_shape) or data.shape[1:] != self.group.elem_shape:
            raise ValueError(f"{self.group} tuple must have shape (k,) + {self.group.elem_shape}")
        object.__setattr__(self, "data", data)

    @property
    def arity(self) -> int:
        return int(self.data.shape[0])

    @classmethod
    def of(cls, elements: Sequence[GroupElement]) -> "GroupTuple":
        if not elements:
            raise ValueError("empty tuple")
        group = elements[0].group
        for el in elements[1:]:
            _check_same(group, el.group)
        return cls(group, np.stack([el.data for el in elements]))

    def __getitem__(self, i: int) -> GroupElement:
        return GroupElement(self.group, self.data[i])


def _check_same(a: CompactGroup, b: CompactGroup) -> None:
    if a != b:
        raise GroupMismatchError(f"group mismatch: {a} vs {b}")


def element(group: CompactGroup, data) -> GroupElement:
    return GroupElement(group, np.asarray(data, dtype=np.int64 if isinstance(group, FiniteGroup) else float))


def identity(group: CompactGroup) -> GroupElement:
    return GroupElement(group, group.identity())


def multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    _check_same(g.group, h.group)
    return GroupElement(g.group, g.group.multiply(g.data, h.data))


def inverse(g: GroupElement) -> GroupElement:
    return GroupElement(g.group, g.group.inverse(g.data))


def distance(g: GroupElement, h: GroupElement) -> float:
    _check_same(g.group, h.group)
    return float(g.group.distance(g.data, h.data))


def product_distance(x: GroupTuple, y: GroupTuple) -> float:
    _check_same(x.group, y.group)
    if x.arity != y.arity:
        raise ValueError(f"tuple length mismatch: {x.arity} vs {y.arity}")
    return float(x.group.product_distance(x.data, y.data))


def haar_sample(group: CompactGroup, rng: np.random.Generator) -> GroupElement:
    return GroupElement(group, group.haar(rng))


def ball_sample_tuple(center: GroupTuple, r: float, rng: np.random.Generator,
                      method: str = "polar") -> GroupTuple:
    return GroupTuple(center.group, ball_sample(center.group, center.data, r, rng, method))


def ball_volume_fraction(group: CompactGroup, k: int, r: float) -> Estimate:
    return group.ball_volume_fraction(k, r)
