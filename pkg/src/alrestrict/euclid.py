"""Tube volumes and normalized thickening integrals for simple sets in R^2 / R^3.

A set ``C`` is thickened either by Euclidean balls (``Shape.BALL``) or by
axis-aligned cubes, i.e. sup-metric balls (``Shape.CUBE``). Volumes are
estimated by hit counting over the bounding box of the thickened set.

``hausdorff_ratio`` reports ``|C_delta| / delta^(n - alpha)`` both raw and
divided by the volume of the unit ``(n - alpha)``-ball, since the two common
normalizations of Hausdorff measure differ by exactly that constant.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence, Union

import numpy as np
from scipy.special import gamma

from .limits import LimitReport, limit_estimate
from .montecarlo import DEFAULT_CHUNK, Estimate, Moments, derive_seed, map_chunks, mc_mean

DEFAULT_DELTAS = (0.2, 0.1, 0.05, 0.025)


class Shape(str, Enum):
    BALL = "ball"
    CUBE = "cube"


def unit_ball_volume(s: float) -> float:
    """Volume of the unit ball in R^s (s may be 0)."""
    return math.pi ** (s / 2) / gamma(s / 2 + 1)


# ----------------------------------------------------------------------
# primitives


def _segment_distance(x: np.ndarray, a: np.ndarray, b: np.ndarray, shape: Shape) -> np.ndarray:
    d = b - a
    u = x - a
    if shape is Shape.BALL:
        t = np.clip(u @ d / (d @ d), 0.0, 1.0)
        return np.linalg.norm(u - t[:, None] * d, axis=-1)
    # sup metric: t -> max_i |u_i - t d_i| is convex piecewise linear, so its
    # minimum over [0, 1] sits at an endpoint or a breakpoint
    cands = [np.zeros(len(x)), np.ones(len(x))]
    n = len(d)
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(n):
            if d[i] != 0:
                cands.append(u[:, i] / d[i])
            for j in range(i + 1, n):
                for sgn in (1.0, -1.0):
                    den = d[i] - sgn * d[j]
                    if den != 0:
                        cands.append((u[:, i] - sgn * u[:, j]) / den)
    best = np.full(len(x), np.inf)
    for t in cands:
        t = np.clip(np.nan_to_num(t, nan=0.0), 0.0, 1.0)
        best = np.minimum(best, np.max(np.abs(u - t[:, None] * d), axis=-1))
    return best


@dataclass(frozen=True)
class Polyline:
    vertices: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] not in (2, 3):
            raise ValueError("polyline needs at least two vertices in R^2 or R^3")
        if np.any(np.linalg.norm(np.diff(v, axis=0), axis=-1) == 0):
            raise ValueError("polyline has a zero-length segment")
        object.__setattr__(self, "vertices", tuple(map(tuple, v.tolist())))

    @property
    def dim(self) -> int:
        return len(self.vertices[0])

    def distance(self, x: np.ndarray, shape: Shape) -> np.ndarray:
        v = np.asarray(self.vertices)
        return np.min([_segment_distance(x, v[i], v[i + 1], shape) for i in range(len(v) - 1)], axis=0)

    def within(self, x: np.ndarray, delta: float, shape: Shape) -> np.ndarray:
        return self.distance(x, shape) < delta

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        v = np.asarray(self.vertices)
        return v.min(axis=0), v.max(axis=0)

    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(np.asarray(self.vertices), axis=0), axis=-1)))


@dataclass(frozen=True)
class PointSet:
    points: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] not in (2, 3):
            raise ValueError("point set needs at least one point in R^2 or R^3")
        object.__setattr__(self, "points", tuple(map(tuple, p.tolist())))

    @property
    def dim(self) -> int:
        return len(self.points[0])

    def distance(self, x: np.ndarray, shape: Shape) -> np.ndarray:
        diff = x[:, None, :] - np.asarray(self.points)[None, :, :]
        ord_ = 2 if shape is Shape.BALL else np.inf
        return np.min(np.linalg.norm(diff, ord=ord_, axis=-1), axis=1)

    def within(self, x: np.ndarray, delta: float, shape: Shape) -> np.ndarray:
        return self.distance(x, shape) < delta

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        p = np.asarray(self.points)
        return p.min(axis=0), p.max(axis=0)


@dataclass(frozen=True)
class Circle:
    """A circle; in R^3 ``axes`` gives two orthonormal vectors spanning its plane."""

    center: tuple[float, ...]
    radius: float
    axes: tuple[tuple[float, ...], tuple[float, ...]] | None = None

    def __post_init__(self) -> None:
        c = tuple(float(v) for v in self.center)
        if len(c) not in (2, 3):
            raise ValueError("circle centre must be in R^2 or R^3")
        if not self.radius > 0:
            raise ValueError("circle radius must be positive")
        object.__setattr__(self, "center", c)
        if len(c) == 3:
            axes = self.axes if self.axes is not None else ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
            u, v = (np.asarray(a, dtype=float) for a in axes)
            u = u / np.linalg.norm(u)
            v = v - (v @ u) * u
            if np.linalg.norm(v) < 1e-12:
                raise ValueError("circle axes are parallel")
            v = v / np.linalg.norm(v)
            object.__setattr__(self, "axes", (tuple(u), tuple(v)))

    @property
    def dim(self) -> int:
        return len(self.center)

    def distance(self, x: np.ndarray, shape: Shape) -> np.ndarray:
        if shape is not Shape.BALL:
            raise ValueError("sup-metric distance to a circle is not available; use within()")
        y = x - np.asarray(self.center)
        if self.dim == 2:
            return np.abs(np.linalg.norm(y, axis=-1) - self.radius)
        u, v = (np.asarray(a) for a in self.axes)
        normal = np.cross(u, v)
        z = y @ normal
        rho = np.linalg.norm(y - z[:, None] * normal, axis=-1)
        return np.hypot(rho - self.radius, z)

    def within(self, x: np.ndarray, delta: float, shape: Shape) -> np.ndarray:
        if shape is Shape.BALL:
            return self.distance(x, shape) < delta
        if self.dim != 2:
            raise ValueError("cube thickenings of circles are supported in the plane only")
        # the open square of half-width delta about x meets the circle iff the
        # radius lies strictly between the nearest and farthest square distances
        y = np.abs(x - np.asarray(self.center))
        near = np.linalg.norm(np.maximum(y - delta, 0.0), axis=-1)
        far = np.linalg.norm(y + delta, axis=-1)
        return (near < self.radius) & (self.radius < far)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.center)
        if self.dim == 2:
            ext = np.full(2, self.radius)
        else:
            u, v = (np.asarray(a) for a in self.axes)
            ext = self.radius * np.hypot(u, v)
        return c - ext, c + ext


EuclideanSet = Union[Polyline, PointSet, Circle]


def _box(C: EuclideanSet, delta: float) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = C.bounds()
    lo, hi = lo - delta, hi + delta
    if np.any(hi - lo <= 0) or not np.all(np.isfinite(hi - lo)):
        raise ValueError("degenerate bounding box")
    return lo, hi


# ----------------------------------------------------------------------
# scalar fields on R^n


class ScalarField:
    """A named vectorised function ``points (N, n) -> values (N,)``."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], text: str, bound: float = math.inf):
        self.fn = fn
        self.text = text
        self.bound = bound

    def __call__(self, x: np.ndarray) -> np.ndarray:
        out = np.asarray(self.fn(x), dtype=float)
        return np.broadcast_to(out, (len(x),)).copy() if out.ndim == 0 else out

    def __str__(self) -> str:
        return self.text

    def __repr__(self) -> str:
        return f"ScalarField({self.text!r})"


def _wrap(a: np.ndarray) -> np.ndarray:
    return np.mod(a + np.pi, 2 * np.pi) - np.pi


def sector_indicator(theta0: float, theta1: float, width: float) -> Callable[[np.ndarray], np.ndarray]:
    """Smoothed indicator of the angular sector ``[theta0, theta1]`` (angle in the x-y plane).

    The ramp is centred on each edge, so integrating over a rotationally
    symmetric set gives exactly the sector's angular fraction.
    """
    if width <= 0:
        raise ValueError("width must be positive")

    def fn(x: np.ndarray) -> np.ndarray:
        phi = np.arctan2(x[:, 1], x[:, 0])
        depth = np.minimum(_wrap(phi - theta0), _wrap(theta1 - phi))
        return np.clip(0.5 + depth / width, 0.0, 1.0)

    return fn


def halfspace_indicator(normal: Sequence[float], offset: float, width: float) -> Callable[[np.ndarray], np.ndarray]:
    """Smoothed indicator of ``{normal . x > offset}``, ramp centred on the plane."""
    nrm = np.asarray(normal, dtype=float)
    nrm = nrm / np.linalg.norm(nrm)
    if width <= 0:
        raise ValueError("width must be positive")

    def fn(x: np.ndarray) -> np.ndarray:
        return np.clip(0.5 + (x[:, : len(nrm)] @ nrm - offset) / width, 0.0, 1.0)

    return fn


_COORDS = {"x": 0, "y": 1, "z": 2}


def parse_field(text: str) -> ScalarField:
    """Parse ``x**2``, ``1``, ``x*y + 0.5``, ``sector(0, pi/2, 0.05)``, ``halfspace(1, 0, 0.2, 0.05)``."""

    def num(node: ast.AST) -> float:
        fn = build(node)
        probe = fn(np.zeros((1, 3)))
        if getattr(fn, "_const", False):
            return float(np.asarray(probe).ravel()[0])
        raise ValueError(f"expected a constant in {text!r}")

    def const(c: float):
        def fn(x):
            return np.float64(c)
        fn._const = True
        return fn

    def build(node: ast.AST):
        if isinstance(node, ast.Expression):
            return build(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return const(float(node.value))
        if isinstance(node, ast.Name):
            if node.id == "pi":
                return const(math.pi)
            if node.id in _COORDS:
                i = _COORDS[node.id]
                return lambda x: x[:, i]
            raise ValueError(f"unknown name {node.id!r} in {text!r}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = build(node.operand)
            if getattr(inner, "_const", False):
                v = float(inner(None))
                return const(-v if isinstance(node.op, ast.USub) else v)
            return (lambda x: -inner(x)) if isinstance(node.op, ast.USub) else inner
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                k = num(node.right)
                if k != int(k) or k < 0:
                    raise ValueError(f"only non-negative integer powers allowed in {text!r}")
                base = build(node.left)
                return lambda x: base(x) ** int(k)
            ops = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply, ast.Div: np.divide}
            if type(node.op) in ops:
                op = ops[type(node.op)]
                a, b = build(node.left), build(node.right)
                if getattr(a, "_const", False) and getattr(b, "_const", False):
                    return const(float(op(a(None), b(None))))
                return lambda x: op(a(x), b(x))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
            args = [num(a) for a in node.args]
            if node.func.id == "sector" and len(args) == 3:
                return sector_indicator(*args)
            if node.func.id == "halfspace" and len(args) in (3, 4):
                return halfspace_indicator(args[:-2], args[-2], args[-1])
        raise ValueError(f"unsupported field expression {text!r}")

    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse field {text!r}: {exc.msg}") from None
    return ScalarField(build(tree), text.strip())


# ----------------------------------------------------------------------
# estimators


def tube_volume(
    C: EuclideanSet,
    delta: float,
    shape: Shape = Shape.BALL,
    n_samples: int = 1_000_000,
    seed: int = 0,
    chunk_size: int = DEFAULT_CHUNK,
) -> Estimate:
    """Lebesgue volume of ``{x : dist(x, C) < delta}`` by hit counting."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    shape = Shape(shape)
    lo, hi = _box(C, delta)
    box_volume = float(np.prod(hi - lo))

    def hits(rng: np.random.Generator, size: int) -> np.ndarray:
        x = rng.uniform(lo, hi, (size, len(lo)))
        return box_volume * C.within(x, delta, shape)

    return mc_mean(hits, n_samples, seed, chunk_size)


@dataclass(frozen=True)
class HausdorffRow:
    delta: float
    tube: Estimate
    raw: Estimate
    normalized: Estimate

    def as_dict(self) -> dict:
        return {"delta": self.delta, "tube": self.tube.as_dict(), "raw": self.raw.as_dict(),
                "normalized": self.normalized.as_dict()}


@dataclass(frozen=True)
class HausdorffReport:
    alpha: float
    omega: float
    rows: tuple[HausdorffRow, ...]
    raw_limit: LimitReport
    normalized_limit: LimitReport

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "omega": self.omega,
            "rows": [r.as_dict() for r in self.rows],
            "raw_limit": self.raw_limit.as_dict(),
            "normalized_limit": self.normalized_limit.as_dict(),
        }


def _scaled(e: Estimate, factor: float) -> Estimate:
    return Estimate(e.value * factor, e.stderr * abs(factor), e.n_samples, e.seed)


def hausdorff_ratio(
    C: EuclideanSet,
    alpha: float,
    deltas: Sequence[float] = DEFAULT_DELTAS,
    shape: Shape = Shape.BALL,
    n_samples: int = 1_000_000,
    seed: int = 0,
    rel_tolerance: float = 0.02,
) -> HausdorffReport:
    """``|C_delta| / delta^(n - alpha)`` along ``deltas`` and its extrapolated limit.

    The normalized column divides by the unit-ball volume in dimension
    ``n - alpha`` (1, 2, pi, 4 pi / 3 for 0..3). Limit fits use an absolute
    tolerance of ``rel_tolerance`` times the mean ratio.
    """
    n = C.dim
    if not 0 <= alpha <= n:
        raise ValueError(f"alpha must lie in [0, {n}]")
    codim = n - alpha
    omega = unit_ball_volume(codim)
    rows = []
    for i, delta in enumerate(deltas):
        tube = tube_volume(C, delta, shape, n_samples, derive_seed(seed, i))
        raw = _scaled(tube, delta ** (-codim))
        rows.append(HausdorffRow(float(delta), tube, raw, _scaled(raw, 1.0 / omega)))
    scale = abs(np.mean([r.raw.value for r in rows]))
    raw_limit = limit_estimate(deltas, [r.raw for r in rows], rel_tolerance * scale)
    norm_limit = limit_estimate(deltas, [r.normalized for r in rows], rel_tolerance * scale / omega)
    return HausdorffReport(float(alpha), omega, tuple(rows), raw_limit, norm_limit)


def thickened_average(
    C: EuclideanSet,
    f: Callable[[np.ndarray], np.ndarray],
    delta: float,
    shape: Shape = Shape.BALL,
    n_samples: int = 1_000_000,
    seed: int = 0,
    chunk_size: int = DEFAULT_CHUNK,
) -> Estimate:
    """Average of ``f`` over ``C_delta``: uniform box points, kept when inside the tube.

    ``n_samples`` counts box proposals; the returned ``n_samples`` is the
    number that landed in the tube.
    """
    shape = Shape(shape)
    lo, hi = _box(C, delta)

    def run(rng: np.random.Generator, size: int) -> Moments:
        x = rng.uniform(lo, hi, (size, len(lo)))
        inside = C.within(x, delta, shape)
        return Moments.of(f(x[inside]) if inside.any() else np.empty(0))

    total = Moments.combine(map_chunks(run, seed, n_samples, chunk_size))
    return total.estimate(seed)


def restricted_integral_rn(
    C: EuclideanSet,
    f: Callable[[np.ndarray], np.ndarray],
    deltas: Sequence[float] = DEFAULT_DELTAS,
    shape: Shape = Shape.BALL,
    n_samples: int = 1_000_000,
    seed: int = 0,
    tolerance: float = 0.01,
) -> LimitReport:
    """Normalized integrals of ``f`` over shrinking thickenings, extrapolated to ``delta -> 0``."""
    ests = [thickened_average(C, f, d, shape, n_samples, derive_seed(seed, i)) for i, d in enumerate(deltas)]
    return limit_estimate(deltas, ests, tolerance)


# ----------------------------------------------------------------------
# ball versus cube


SHAPE_DEMO_DELTAS = (0.04, 0.02, 0.01, 0.005)
SHAPE_DEMO_RAMP = 0.02


def shape_demo_set() -> Polyline:
    """Unit horizontal segment and unit 45-degree segment joined at the origin."""
    s = 1.0 / math.sqrt(2.0)
    return Polyline(((1.0, 0.0), (0.0, 0.0), (s, s)))


def diagonal_marker(width: float = SHAPE_DEMO_RAMP) -> ScalarField:
    """1 near the diagonal segment, 0 near the horizontal one, 1/2 at the shared vertex."""
    s = 1.0 / math.sqrt(2.0)
    horizontal = Polyline(((0.0, 0.0), (1.0, 0.0)))
    diagonal = Polyline(((0.0, 0.0), (s, s)))

    def fn(x: np.ndarray) -> np.ndarray:
        gap = horizontal.distance(x, Shape.BALL) - diagonal.distance(x, Shape.BALL)
        return np.clip(0.5 + gap / width, 0.0, 1.0)

    return ScalarField(fn, f"diagonal_marker({width})", 1.0)


@dataclass(frozen=True)
class ShapeDemoReport:
    ball: LimitReport
    cube: LimitReport
    difference: float
    combined_stderr: float

    @property
    def ball_value(self) -> float:
        return self.ball.extrapolated_value

    @property
    def cube_value(self) -> float:
        return self.cube.extrapolated_value

    def as_dict(self) -> dict:
        return {
            "ball_value": self.ball_value,
            "cube_value": self.cube_value,
            "difference": self.difference,
            "combined_stderr": self.combined_stderr,
            "ball": self.ball.as_dict(),
            "cube": self.cube.as_dict(),
        }


def shape_dependence_demo(
    n_samples: int = 2_000_000,
    seed: int = 0,
    deltas: Sequence[float] = SHAPE_DEMO_DELTAS,
) -> ShapeDemoReport:
    """Restricted mass of the diagonal segment under ball versus cube thickenings."""
    C = shape_demo_set()
    f = diagonal_marker()
    ball = restricted_integral_rn(C, f, deltas, Shape.BALL, n_samples, derive_seed(seed, 0))
    cube = restricted_integral_rn(C, f, deltas, Shape.CUBE, n_samples, derive_seed(seed, 1))
    diff = abs(ball.extrapolated_value - cube.extrapolated_value)
    return ShapeDemoReport(ball, cube, diff, math.hypot(ball.extrapolated_stderr, cube.extrapolated_stderr))
