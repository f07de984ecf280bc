"""Numerical checks of the support statements.

For a chain of independent loops the holonomies are i.i.d. Haar, so the
integral of ``f(g_0) f(g_1) ... f(g_m)``, with ``f`` a ramp that vanishes
outside a ball ``V`` about the identity, is at most ``|V|^m`` and decays
geometrically in ``m``. Likewise, the cylinder of configurations taking values
in a ball ``U`` on ``n`` independent loops has Haar mass ``|U|^n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .functions import CylFunction, Ramp
from .groups import CompactGroup
from .montecarlo import DEFAULT_CHUNK, Estimate, derive_seed, mc_mean


@dataclass(frozen=True)
class TailExperiment:
    group: CompactGroup
    r_in: float
    r_out: float
    m: int
    n_samples: int = 1_000_000
    seed: int = 0
    f: Optional[CylFunction] = field(default=None)

    def __post_init__(self) -> None:
        if not 0 < self.r_in < self.r_out:
            raise ValueError(f"need 0 < r_in < r_out, got {self.r_in}, {self.r_out}")
        if self.m < 0:
            raise ValueError("chain length must be non-negative")
        if self.v_mass >= 1.0:
            raise ValueError(f"the outer ball must have Haar mass below 1 (got {self.v_mass})")
        if self.f is not None and self.f.arity > 1:
            raise ValueError("the chain factor must be a function of one component (h1)")

    @property
    def v_mass(self) -> float:
        return self.group.ball_volume_fraction(1, self.r_out).value

    @property
    def factor(self) -> CylFunction:
        return self.f if self.f is not None else Ramp(0, self.r_in, self.r_out)


@dataclass(frozen=True)
class TailReport:
    empirical: Estimate
    single_factor: Estimate
    bound: float
    q: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "empirical": self.empirical.as_dict(),
            "single_factor": self.single_factor.as_dict(),
            "bound": self.bound,
            "q": self.q,
            "passed": self.passed,
        }


def tail_bound_experiment(te: TailExperiment, chunk_size: int = DEFAULT_CHUNK) -> TailReport:
    """Integral of the ``m + 1``-fold product against the bound ``|V|^m``.

    ``passed`` means ``empirical <= bound * (1 + 3 * relative stderr)``. The single-factor
    integral is estimated on an independent stream so the product can be
    checked against its ``m + 1``-th power.
    """
    group, f, k = te.group, te.factor, te.m + 1

    def chain(rng: np.random.Generator, size: int) -> np.ndarray:
        g = group.haar(rng, (size, k))
        vals = np.ones(size)
        for i in range(k):
            vals = vals * f.evaluate(group, group.take(g, i)[:, None])
        return vals

    def single(rng: np.random.Generator, size: int) -> np.ndarray:
        return f.evaluate(group, group.haar(rng, (size, 1)))

    empirical = mc_mean(chain, te.n_samples, derive_seed(te.seed, 0), chunk_size)
    one = mc_mean(single, te.n_samples, derive_seed(te.seed, 1), chunk_size)
    q = te.v_mass
    bound = q**te.m
    rel = empirical.stderr / empirical.value if empirical.value > 0 else 0.0
    return TailReport(empirical, one, bound, q, empirical.value <= bound * (1.0 + 3.0 * rel))


def continuity_cylinder_measure(group: CompactGroup, u_radius: float, n_tail: int) -> float:
    """Mass ``|U|^n`` of the cylinder pinning ``n`` independent loops inside ``B(e, u_radius)``."""
    if n_tail < 1:
        raise ValueError("n_tail must be at least 1")
    p = group.ball_volume_fraction(1, u_radius).value
    if p >= 1.0:
        raise ValueError("U must have Haar mass below 1")
    return p**n_tail


def decay_table(group: CompactGroup, u_radius: float, n_tails: Sequence[int]) -> list[tuple[int, float]]:
    return [(n, continuity_cylinder_measure(group, u_radius, n)) for n in n_tails]


def power_of(e: Estimate, k: int) -> tuple[float, float]:
    """``e.value**k`` with its delta-method standard error."""
    return e.value**k, abs(k * e.value ** (k - 1)) * e.stderr if k else 0.0


def factorization_gap(report: TailReport, m: int) -> tuple[float, float]:
    """Difference between the chain integral and the single-factor integral to the ``m + 1``,
    together with the combined standard error of that difference."""
    pred, pred_err = power_of(report.single_factor, m + 1)
    return report.empirical.value - pred, math.hypot(report.empirical.stderr, pred_err)
