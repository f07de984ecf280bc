"""Thickenings of the homomorphism set and the restricted integral over them.

For loops ``xi`` written as words ``w`` over an independent family ``eta``,
the thickening of radius ``r`` is the cylinder set

    { alpha : alpha(xi) lies in B(w(alpha(eta)), r) },

i.e. over each point ``g`` of ``G^m`` (the eta components) the xi components
fill a product-metric ball around ``w(g)``, and every other loop is
unconstrained. All slices over ``g`` have the same Haar mass, so by Fubini
the normalized integral of an extension ``F`` over the set is

    E_{g ~ Haar(G^m)} E_{h ~ Haar restricted to B(w(g), r)} F(g, h).

That double average is what gets computed; the infinite product space is
never built. Two extensions are provided:

* ``PULLBACK``: ``F(g, h) = f(w(g))``, constant on every slice.
* ``NAIVE``:    ``F(g, h) = f(h)``, reads the xi components directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Sequence

import numpy as np

from .functions import CylFunction
from .groups import CompactGroup, FiniteGroup, ball_sample
from .limits import ExtrapolationError, LimitReport, limit_estimate
from .montecarlo import DEFAULT_CHUNK, Estimate, derive_seed, mc_mean
from .words import WordMap

DEFAULT_RADII = (0.8, 0.4, 0.2, 0.1)
EXACT_BUDGET = 10**7


class Extension(str, Enum):
    PULLBACK = "pullback"
    NAIVE = "naive"


@dataclass(frozen=True)
class ThickeningSpec:
    word_map: WordMap
    radius: float
    extension: Extension = Extension.PULLBACK

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.word_map.n == 0:
            raise ValueError("word map has no words")
        object.__setattr__(self, "extension", Extension(self.extension))

    def at(self, radius: float) -> "ThickeningSpec":
        return ThickeningSpec(self.word_map, radius, self.extension)


def _check_arity(spec: ThickeningSpec, f: CylFunction) -> None:
    if f.arity > spec.word_map.n:
        raise ValueError(f"function uses h{f.arity} but the thickening has {spec.word_map.n} loops")


def _finite_exact(spec: ThickeningSpec, f: CylFunction, group: FiniteGroup) -> float:
    m, n, r = spec.word_map.m, spec.word_map.n, spec.radius
    g = group.tuples(m)
    centers = spec.word_map.evaluate(group, g)  # (|G|^m, n)
    if spec.extension is Extension.PULLBACK:
        return math.fsum(f.evaluate(group, centers)) / len(g)
    hs = group.tuples(n)
    fh = f.evaluate(group, hs)
    total = 0.0
    for c in centers:
        inside = group.product_distance(hs, c[None, :]) < r
        total += math.fsum(fh[inside]) / int(inside.sum())
    return total / len(g)


def restricted_integral(
    spec: ThickeningSpec,
    f: CylFunction,
    group: CompactGroup,
    n_samples: int = 200_000,
    seed: int = 0,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
    method: str = "polar",
) -> Estimate:
    """Normalized integral of the chosen extension of ``f`` over the thickening.

    Finite groups small enough to enumerate are summed exactly.
    """
    _check_arity(spec, f)
    wm = spec.word_map
    if isinstance(group, FiniteGroup) and group.order ** (wm.m + wm.n) <= EXACT_BUDGET:
        return Estimate.exact(_finite_exact(spec, f, group))

    pullback = spec.extension is Extension.PULLBACK

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        g = group.haar(rng, (size, wm.m))
        centers = wm.evaluate(group, g)
        h = ball_sample(group, centers, spec.radius, rng, method)
        return f.evaluate(group, centers if pullback else h)

    return mc_mean(draw, n_samples, seed, chunk_size, workers)


def slice_measure(spec: ThickeningSpec, group: CompactGroup) -> Estimate:
    """Haar mass of one slice, which by equisliceability is the mass of the whole thickening."""
    return group.ball_volume_fraction(spec.word_map.n, spec.radius)


@dataclass(frozen=True)
class EquisliceReport:
    expected: Estimate
    slices: tuple[Estimate, ...]
    max_deviation: float
    pooled_stderr: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "expected": self.expected.as_dict(),
            "slices": [s.as_dict() for s in self.slices],
            "max_deviation": self.max_deviation,
            "pooled_stderr": self.pooled_stderr,
            "passed": self.passed,
        }


def equisliceability_probe(
    spec: ThickeningSpec,
    group: CompactGroup,
    n_centers: int = 5,
    n_samples: int = 200_000,
    seed: int = 0,
) -> EquisliceReport:
    """Estimate slice masses at Haar-random eta values and compare them.

    Passes when the largest pairwise difference is within three standard
    errors of a difference. Finite groups are enumerated, so they must agree
    exactly.
    """
    if n_centers < 3:
        raise ValueError("need at least three centres")
    wm, r = spec.word_map, spec.radius
    rng = np.random.default_rng(derive_seed(seed, 0))
    centers = wm.evaluate(group, group.haar(rng, (n_centers, wm.m)))

    slices = []
    for i in range(n_centers):
        c = centers[i]
        if isinstance(group, FiniteGroup) and group.order**wm.n <= EXACT_BUDGET:
            hs = group.tuples(wm.n)
            slices.append(Estimate.exact(float(np.mean(group.product_distance(hs, c[None]) < r))))
            continue

        def hits(rng: np.random.Generator, size: int, c=c) -> np.ndarray:
            h = group.haar(rng, (size, wm.n))
            return (group.product_distance(h, c[None]) < r).astype(float)

        slices.append(mc_mean(hits, n_samples, derive_seed(seed, 1 + i)))

    max_dev = max(abs(a.value - b.value) for a, b in combinations(slices, 2))
    pooled = math.sqrt(2.0 * float(np.mean([s.stderr**2 for s in slices])))
    return EquisliceReport(slice_measure(spec, group), tuple(slices), max_dev, pooled,
                           max_dev <= 3.0 * pooled)


def restricted_schedule(
    word_map: WordMap,
    f: CylFunction,
    group: CompactGroup,
    radii: Sequence[float] = DEFAULT_RADII,
    extension: Extension = Extension.NAIVE,
    n_samples: int = 200_000,
    seed: int = 0,
    **kwargs,
) -> list[Estimate]:
    """Restricted integrals along a decreasing radius schedule.

    Radius ``i`` uses the stream ``derive_seed(seed, i)`` whatever the
    extension, so the two extensions share their eta samples.
    """
    return [
        restricted_integral(ThickeningSpec(word_map, r, extension), f, group, n_samples,
                            derive_seed(seed, i), **kwargs)
        for i, r in enumerate(radii)
    ]


def restricted_limit(
    word_map: WordMap,
    f: CylFunction,
    group: CompactGroup,
    radii: Sequence[float] = DEFAULT_RADII,
    extension: Extension = Extension.NAIVE,
    n_samples: int = 200_000,
    seed: int = 0,
    tolerance: float = 0.01,
    **kwargs,
) -> LimitReport:
    ests = restricted_schedule(word_map, f, group, radii, extension, n_samples, seed, **kwargs)
    return limit_estimate(radii, ests, tolerance)


@dataclass(frozen=True)
class IndependenceReport:
    pullback: LimitReport
    naive: LimitReport
    delta: float
    combined_stderr: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "pullback": self.pullback.as_dict(),
            "naive": self.naive.as_dict(),
            "delta": self.delta,
            "combined_stderr": self.combined_stderr,
            "passed": self.passed,
        }


def extension_independence(
    word_map: WordMap,
    f: CylFunction,
    group: CompactGroup,
    radii: Sequence[float] = DEFAULT_RADII,
    n_samples: int = 200_000,
    seed: int = 0,
    tolerance: float = 0.01,
) -> IndependenceReport:
    """Extrapolate both extensions and check they reach the same limit.

    Raises :class:`ExtrapolationError` if either fit fails to converge.
    """
    reports = {}
    for ext in (Extension.PULLBACK, Extension.NAIVE):
        rep = restricted_limit(word_map, f, group, radii, ext, n_samples, seed, tolerance)
        if not rep.converged:
            raise ExtrapolationError(f"{ext.value} extension did not converge (residual {rep.residual:.3g})")
        reports[ext] = rep
    p, n = reports[Extension.PULLBACK], reports[Extension.NAIVE]
    delta = abs(p.extrapolated_value - n.extrapolated_value)
    combined = math.hypot(p.extrapolated_stderr, n.extrapolated_stderr)
    return IndependenceReport(p, n, delta, combined, delta <= 3.0 * combined)
