"""Haar integrals of cylindrical functions through word maps.

A cylindrical function depends on the holonomies of finitely many loops
``xi``. Writing those loops as words in an independent family ``eta`` of
``m`` generators, its integral is the Haar average over ``G^m`` of
``f(w_1(g), ..., w_n(g))``. Finite groups are summed exactly, Lie groups are
sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .functions import CylFunction
from .groups import CompactGroup, FiniteGroup
from .montecarlo import DEFAULT_CHUNK, Estimate, derive_seed, mc_mean
from .words import WordMap

ENUMERATION_BUDGET = 10**8
MIN_MC_SAMPLES = 1000


class EnumerationBudgetError(ValueError):
    pass


@dataclass(frozen=True)
class CylindricalFunction:
    """``f`` applied to the loops ``xi``, each written as a word over ``eta``."""

    word_map: WordMap
    f: CylFunction
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.f.arity > self.word_map.n:
            raise ValueError(
                f"function uses h{self.f.arity} but only {self.word_map.n} loops are given"
            )
        labels = tuple(self.labels) or tuple(str(w) for w in self.word_map.words)
        if len(labels) != self.word_map.n:
            raise ValueError("need one label per loop")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def parse(cls, alphabet, words, f: CylFunction) -> "CylindricalFunction":
        return cls(WordMap.parse(alphabet, words), f)

    def sup_bound(self, group: CompactGroup) -> float:
        return self.f.bound(group)

    def evaluate(self, group: CompactGroup, g: np.ndarray) -> np.ndarray:
        """``f(w(g))`` for a batch of m-tuples."""
        return self.f.evaluate(group, self.word_map.evaluate(group, g))


def integrate_exact(cf: CylindricalFunction, group: FiniteGroup, chunk: int = 1 << 18) -> float:
    """Average of ``f(w(g))`` over all of ``G^m``."""
    if not isinstance(group, FiniteGroup):
        raise TypeError("exact integration needs a finite group")
    m = cf.word_map.m
    total_points = group.order**m
    if total_points > ENUMERATION_BUDGET:
        raise EnumerationBudgetError(f"|G|^m = {total_points} exceeds {ENUMERATION_BUDGET}")
    acc = math.fsum(
        math.fsum(cf.evaluate(group, group.tuples(m, start, min(start + chunk, total_points))))
        for start in range(0, total_points, chunk)
    )
    return acc / total_points


def integrate_mc(
    cf: CylindricalFunction,
    group: CompactGroup,
    n_samples: int,
    seed: int,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> Estimate:
    if n_samples < MIN_MC_SAMPLES:
        raise ValueError(f"need at least {MIN_MC_SAMPLES} samples, got {n_samples}")
    m = cf.word_map.m

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        return cf.evaluate(group, group.haar(rng, (size, m)))

    return mc_mean(draw, n_samples, seed, chunk_size, workers)


def integrate(cf: CylindricalFunction, group: CompactGroup, n_samples: int = 10**6,
              seed: int = 0) -> Estimate:
    """Exact for enumerable finite groups, Monte Carlo otherwise."""
    if isinstance(group, FiniteGroup) and group.order ** cf.word_map.m <= ENUMERATION_BUDGET:
        return Estimate.exact(integrate_exact(cf, group))
    return integrate_mc(cf, group, n_samples, seed)


@dataclass(frozen=True)
class ConsistencyReport:
    first: Estimate
    second: Estimate
    delta: float
    pooled_stderr: float
    consistent: bool

    def as_dict(self) -> dict:
        return {
            "first": self.first.as_dict(),
            "second": self.second.as_dict(),
            "delta": self.delta,
            "pooled_stderr": self.pooled_stderr,
            "consistent": self.consistent,
        }


def consistency_check(
    cf: CylindricalFunction,
    alternative: CylindricalFunction,
    group: CompactGroup,
    n_samples: int = 10**6,
    seed: int = 0,
    nsigma: float = 3.0,
) -> ConsistencyReport:
    """Compare two word-map presentations of the same cylindrical function.

    The two integrals use independent streams. ``consistent`` is false when
    they differ by more than ``nsigma`` pooled standard errors.
    """
    if cf.word_map.n != alternative.word_map.n:
        raise ValueError("both presentations must describe the same number of loops")
    a = integrate(cf, group, n_samples, derive_seed(seed, 0))
    b = integrate(alternative, group, n_samples, derive_seed(seed, 1))
    delta = abs(a.value - b.value)
    pooled = math.hypot(a.stderr, b.stderr)
    return ConsistencyReport(a, b, delta, pooled, delta <= nsigma * pooled)
