"""Run one configured experiment and collect its report rows and checks."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, TypeVar

from .config import KIND_SECTIONS, ConfigError, ExperimentConfig
from .euclid import (Circle, PointSet, Polyline, Shape, hausdorff_ratio, parse_field,
                     restricted_integral_rn, shape_dependence_demo, tube_volume)
from .functions import FunctionSyntaxError, parse_function
from .groups import make_group
from .integral import CylindricalFunction, consistency_check, integrate
from .limits import LimitReport, limit_estimate
from .montecarlo import Estimate, derive_seed
from .report import ReportRow
from .support import (TailExperiment, continuity_cylinder_measure, factorization_gap,
                      tail_bound_experiment)
from .thickening import Extension, ThickeningSpec, extension_independence, restricted_integral
from .words import WordMap, WordParseError

T = TypeVar("T")


@dataclass
class Outcome:
    rows: list[ReportRow] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    headline: Optional[Estimate] = None


class _Clock:
    def __init__(self, enabled: bool):
        self.enabled = enabled

    def run(self, fn: Callable[[], T]) -> tuple[T, Optional[float]]:
        t0 = time.perf_counter()
        out = fn()
        return out, (time.perf_counter() - t0) * 1e3 if self.enabled else None


def _group(cfg: ExperimentConfig):
    try:
        return make_group(cfg.group)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _cylindrical(cfg: ExperimentConfig, alphabet: str, xi: str) -> CylindricalFunction:
    try:
        return CylindricalFunction(WordMap.parse(alphabet, xi), parse_function(cfg.f))
    except (WordParseError, FunctionSyntaxError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _euclidean_set(cfg: ExperimentConfig):
    s = cfg.set
    try:
        if s.kind == "circle":
            return Circle(s.center, s.radius)
        if s.kind == "point":
            return PointSet(s.points)
        if s.kind == "segment" and len(s.points) != 2:
            raise ValueError("a segment needs exactly two points")
        return Polyline(s.points)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _space(C) -> str:
    return f"R{C.dim}"


def _row(cfg: ExperimentConfig, exp_id: str, group: str, param, est: Estimate, wall) -> ReportRow:
    return ReportRow(exp_id, group, param, est.value, est.stderr, est.n_samples, cfg.seed, wall)


def _headline(rep: LimitReport) -> Estimate:
    return Estimate(rep.extrapolated_value, rep.extrapolated_stderr, 0)


def run_al_integrate(cfg: ExperimentConfig, clock: _Clock) -> Outcome:
    G = _group(cfg)
    cf = _cylindrical(cfg, cfg.alphabet, cfg.xi)
    est, wall = clock.run(lambda: integrate(cf, G, cfg.samples, cfg.seed))
    return Outcome([_row(cfg, cfg.id, cfg.group, None, est, wall)],
                   {"words": str(cf.word_map), "f": cfg.f, "estimate": est.as_dict()}, {}, est)


def run_consistency(cfg: ExperimentConfig, clock: _Clock) -> Outcome:
    G = _group(cfg)
    first = _cylindrical(cfg, cfg.alphabet, cfg.xi)
    second = _cylindrical(cfg, cfg.alt_alphabet, cfg.alt_xi)
    try:
        rep, wall = clock.run(lambda: consistency_check(first, second, G, cfg.samples, cfg.seed))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = [_row(cfg, f"{cfg.id}/eta", cfg.group, None, rep.first, wall),
            _row(cfg, f"{cfg.id}/alt", cfg.group, None, rep.second, wall)]
    summary = {"eta": str(first.word_map), "alt": str(second.word_map), "f": cfg.f, **rep.as_dict()}
    return Outcome(rows, summary, {"consistent": rep.consistent}, rep.first)


def run_restrict(cfg: ExperimentConfig, clock: _Clock) -> Outcome:
    if cfg.set is not None:
        return _run_restrict_rn(cfg, clock)
    G = _group(cfg)
    cf = _cylindrical(cfg, cfg.alphabet, cfg.xi)
    wm, f = cf.word_map, cf.f

    if cfg.extension == "both":
        rep, wall = clock.run(lambda: extension_independence(
            wm, f, G, cfg.schedule, cfg.samples, cfg.seed, cfg.tolerance))
        rows = []
        for ext, lim in (("pullback", rep.pullback), ("naive", rep.naive)):
            rows += [_row(cfg, f"{cfg.id}/{ext}", cfg.group, r, e, wall)
                     for r, e in zip(lim.radii, lim.estimates)]
        return Outcome(rows, {"words": str(wm), "f": cfg.f, **rep.as_dict()},
                       {"independent": rep.passed}, _headline(rep.naive))

    ext = Extension(cfg.extension)
    rows, ests = [], []
    for i, r in enumerate(cfg.schedule):
        spec = ThickeningSpec(wm, r, ext)
        est, wall = clock.run(lambda: restricted_integral(
            spec, f, G, cfg.samples, derive_seed(cfg.seed, i), workers=cfg.workers))
        ests.append(est)
        rows.append(_row(cfg, cfg.id, cfg.group, r, est, wall))
    lim = limit_estimate(cfg.schedule, ests, cfg.tolerance)
    summary = {"words": str(wm), "f": cfg.f, "extension": ext.value, "limit": lim.as_dict()}
    return Outcome(rows, summary, {"converged": lim.converged}, _headline(lim))


def _run_restrict_rn(cfg: ExperimentConfig, clock: _Clock) -> Outcome:
    C = _euclidean_set(cfg)
    try:
        f = parse_field(cfg.f)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    lim, wall = clock.run(lambda: restricted_integral_rn(
        C, f, cfg.schedule, Shape(cfg.set.shape), cfg.samples, cfg.seed, cfg.tolerance))
    rows = [_row(cfg, cfg.id, _space(C), d, e, wall) for d, e in zip(lim.radii, lim.estimates)]
    summary = {"set": repr(C), "f": cfg.f, "shape": cfg.set.shape, "limit": lim.as_dict()}
    return Outcome(rows, summary, {"converged": lim.converged}, _headline(lim))


def run_hausdorff(cfg: ExperimentConfig, clock: _Clock) -> Outcome:
    C = _euclidean_set(cfg)
    alpha = cfg.set.alpha
    if alpha is None:
        alpha = 0.0 if cfg.set.kind == "point" else 1.0
    try:
        rep, wall = clock.run(lambda: hausdorff_ratio(
            C, alpha, cfg.schedule, Shape(cfg.set.shape), cfg.samples, cfg.seed, cfg.tolerance))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    space = _space(C)
    rows = [_row(cfg, f"{cfg.id}/raw", space, r.delta, r.raw, wall) for r in rep.rows]
    rows += [_row(cfg, f"{cfg.id}/normalized", space, r.delta, r.normalized, wall) for r in rep.rows]
    summary = {"set": repr(C), **rep.as_dict()}
    return Outcome(rows, summary, {"converged": rep.normalized_limit.converged},
                   _headline(rep.normalized_limit))


def run_tube(cfg: ExperimentConfig, clock: _Clock) -> Outcome:
    C = _euclidean_set(cfg)
    shape = Shape(cfg.set.shape)
    rows, ests = [], []
    for i, d in enumerate(cfg.schedule):
        est, wall = clock.run(lambda: tube_volume(C, d, shape, cfg.samples, derive_seed(cfg.seed, i)))
        ests.append(est)
        rows.append(_row(cfg, cfg.id, _space(C), d, est, wall))
    # the schedule decreases, so volumes must not grow beyond noise
    monotone = all(b.value <= a.value + 3.0 * math.hypot(a.stderr, b.stderr)
                   for a, b in zip(ests, ests[1:]))
    summary = {"set": repr(C), "shape": shape.value, "volumes": [e.as_dict() for e in ests]}
    return Outcome(rows, summary, {"monotone": monotone}, ests[-1])


def run_shape_demo(cfg: ExperimentConfig, clock: _Clock) -> Outcome:
    rep, wall = clock.run(lambda: shape_dependence_demo(cfg.samples, cfg.seed, cfg.schedule))
    rows = []
    for name, lim in (("ball", rep.ball), ("cube", rep.cube)):
        rows += [_row(cfg, f"{cfg.id}/{name}", "R2", d, e, wall) for d, e in zip(lim.radii, lim.estimates)]
    checks = {
        "ball_converged": rep.ball.converged,
        "cube_converged": rep.cube.converged,
        "separated": rep.difference > 5.0 * rep.combined_stderr,
    }
    return Outcome(rows, rep.as_dict(), checks, None)


def run_support_tail(cfg: ExperimentConfig, clock: _Clock) -> Outcome:
    G = _group(cfg)
    rows, tails, checks = [], [], {}
    for i, m in enumerate(cfg.m):
        try:
            te = TailExperiment(G, cfg.r_in, cfg.r_out, m, cfg.samples, derive_seed(cfg.seed, i))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        rep, wall = clock.run(lambda: tail_bound_experiment(te))
        gap, gap_err = factorization_gap(rep, m)
        rows.append(_row(cfg, f"{cfg.id}/chain", cfg.group, m, rep.empirical, wall))
        tails.append({"m": m, **rep.as_dict(), "factorization_gap": gap, "factorization_stderr": gap_err})
        checks[f"bound_m{m}"] = rep.passed
        checks[f"factorizes_m{m}"] = abs(gap) <= 3.0 * gap_err
    try:
        cyl = [(n, continuity_cylinder_measure(G, cfg.u_radius, n)) for n in cfg.n_tail if n >= 1]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows += [ReportRow(f"{cfg.id}/cylinder", cfg.group, n, p, 0.0, 0, cfg.seed) for n, p in cyl]
    summary = {"r_in": cfg.r_in, "r_out": cfg.r_out, "u_radius": cfg.u_radius, "chains": tails,
               "cylinder": [{"n_tail": n, "measure": p} for n, p in cyl]}
    return Outcome(rows, summary, checks, None)


RUNNERS: dict[str, Callable[[ExperimentConfig, _Clock], Outcome]] = {
    "al-integrate": run_al_integrate,
    "restrict": run_restrict,
    "hausdorff": run_hausdorff,
    "tube": run_tube,
    "shape-demo": run_shape_demo,
    "support-tail": run_support_tail,
    "consistency": run_consistency,
}


def run_experiment(cfg: ExperimentConfig, timing: bool = False) -> Outcome:
    """Execute ``cfg``; adds a ``gate`` check when an expected value is configured."""
    out = RUNNERS[cfg.kind](cfg, _Clock(timing))
    if cfg.gate_expect is not None:
        if out.headline is None:
            raise ConfigError(f"{cfg.kind!r} experiments have no single value to gate on")
        out.checks["gate"] = out.headline.within(cfg.gate_expect, cfg.gate_nsigma, cfg.gate_atol)
    uses_group = "group" in KIND_SECTIONS[cfg.kind] and cfg.set is None
    out.summary = {"experiment": cfg.id, "kind": cfg.kind, "group": cfg.group if uses_group else None,
                   "seed": cfg.seed, "samples": cfg.samples, **out.summary}
    return out
