"""Seeded, chunked Monte Carlo reduction.

Every estimator in the package draws its samples through :func:`chunk_streams`,
so a result depends only on ``(seed, n_samples, chunk_size)``. Chunk ``i`` gets
its own generator seeded from ``SeedSequence(seed, spawn_key=(i,))`` and the
partial results are combined in chunk order, which keeps the output
bit-identical whether chunks run serially or on a thread pool.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence, TypeVar

import numpy as np

DEFAULT_CHUNK = 1 << 16

T = TypeVar("T")


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo (or exact) value with its standard error.

    Exact results carry ``stderr == 0`` and ``n_samples == 0``.
    """

    value: float
    stderr: float
    n_samples: int
    seed: Optional[int] = None

    @classmethod
    def exact(cls, value: float) -> "Estimate":
        return cls(float(value), 0.0, 0, None)

    def within(self, target: float, nsigma: float = 3.0, atol: float = 0.0) -> bool:
        return abs(self.value - target) <= nsigma * self.stderr + atol

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "stderr": self.stderr,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic child seed, used to give each sub-experiment its own stream."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(keys))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def chunk_sizes(n_samples: int, chunk_size: int = DEFAULT_CHUNK) -> list[int]:
    if n_samples <= 0:
        raise ValueError(f"n_samples must be positive, got {n_samples}")
    if chunk_size <= 0:
        raise ValueError(f"chunk_size must be positive, got {chunk_size}")
    full, rest = divmod(n_samples, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def chunk_streams(
    seed: int, n_samples: int, chunk_size: int = DEFAULT_CHUNK
) -> Iterator[tuple[np.random.Generator, int]]:
    for i, size in enumerate(chunk_sizes(n_samples, chunk_size)):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        yield rng, size


def map_chunks(
    fn: Callable[[np.random.Generator, int], T],
    seed: int,
    n_samples: int,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> list[T]:
    """Apply ``fn(rng, size)`` to every chunk; results come back in chunk order."""
    streams = list(chunk_streams(seed, n_samples, chunk_size))
    if workers <= 1 or len(streams) == 1:
        return [fn(rng, size) for rng, size in streams]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: fn(*s), streams))


@dataclass(frozen=True)
class Moments:
    """Count, mean and centred second moment of a chunk (Chan et al. merge)."""

    n: int
    mean: float
    m2: float

    @classmethod
    def of(cls, values: np.ndarray) -> "Moments":
        values = np.asarray(values, dtype=float)
        n = values.size
        if n == 0:
            return cls(0, 0.0, 0.0)
        mean = float(values.mean())
        return cls(n, mean, float(np.sum((values - mean) ** 2)))

    def merge(self, other: "Moments") -> "Moments":
        if other.n == 0:
            return self
        if self.n == 0:
            return other
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        return Moments(n, mean, m2)

    @classmethod
    def combine(cls, parts: Sequence["Moments"]) -> "Moments":
        total = cls(0, 0.0, 0.0)
        for part in parts:
            total = total.merge(part)
        return total

    def estimate(self, seed: Optional[int] = None) -> Estimate:
        if self.n == 0:
            raise ValueError("no samples to estimate from")
        var = self.m2 / (self.n - 1) if self.n > 1 else 0.0
        return Estimate(self.mean, float(np.sqrt(var / self.n)), self.n, seed)


def mc_mean(
    sample_fn: Callable[[np.random.Generator, int], np.ndarray],
    n_samples: int,
    seed: int,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> Estimate:
    """Mean of ``sample_fn(rng, size)`` over ``n_samples`` draws.

    ``sample_fn`` must return one real value per draw.
    """

    def run(rng: np.random.Generator, size: int) -> Moments:
        values = np.asarray(sample_fn(rng, size), dtype=float)
        if values.shape != (size,):
            raise ValueError(f"sample_fn returned shape {values.shape}, expected ({size},)")
        return Moments.of(values)

    parts = map_chunks(run, seed, n_samples, chunk_size, workers)
    return Moments.combine(parts).estimate(seed)
