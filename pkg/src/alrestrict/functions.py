"""Catalog of bounded continuous functions on ``G^n``.

Functions act on batches of n-tuples (shape ``batch + (n,) + elem``) and
return one real per tuple. They compose with ``+``, ``-``, ``*`` and scalar
multiplication, and know a sup-norm bound.

Text form (components are ``h1 .. hn``)::

    1.5                       constant
    retr(h1)                  Re tr
    abstr2(h2)                |tr|^2
    cos(2*h1 - h2)            cos of an integer combination of angles (U1)
    ramp(h1, 0.5, 1.0)        1 inside distance 0.5 of e, 0 beyond 1.0, linear between
    ind(h1)                   indicator of the identity
    eq(h1, 3)                 indicator of element index 3 (finite groups)

combined with ``+ - *`` and parentheses, e.g. ``0.5*retr(h1)*retr(h2) + 1``.
"""

from __future__ import annotations

import ast
import math
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Union

import numpy as np

from .groups import CompactGroup, FiniteGroup, U1

Number = Union[int, float]


class FunctionSyntaxError(ValueError):
    pass


class CylFunction(ABC):
    """A function of the n components ``h1..hn`` of a tuple."""

    @abstractmethod
    def evaluate(self, group: CompactGroup, h: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def bound(self, group: CompactGroup) -> float:
        """An upper bound on ``sup |f|``."""

    @abstractmethod
    def components(self) -> set[int]: ...

    @abstractmethod
    def __str__(self) -> str: ...

    def __call__(self, group: CompactGroup, h: np.ndarray) -> np.ndarray:
        return self.evaluate(group, h)

    @property
    def arity(self) -> int:
        """Smallest n the function can be evaluated on."""
        comps = self.components()
        return max(comps) + 1 if comps else 0

    def __add__(self, other: "CylFunction | Number") -> "CylFunction":
        return Sum((self, _lift(other)))

    def __radd__(self, other: Number) -> "CylFunction":
        return Sum((_lift(other), self))

    def __sub__(self, other: "CylFunction | Number") -> "CylFunction":
        return Sum((self, Scaled(-1.0, _lift(other))))

    def __rsub__(self, other: Number) -> "CylFunction":
        return Sum((_lift(other), Scaled(-1.0, self)))

    def __neg__(self) -> "CylFunction":
        return Scaled(-1.0, self)

    def __mul__(self, other: "CylFunction | Number") -> "CylFunction":
        if isinstance(other, (int, float)):
            return Scaled(float(other), self)
        return Product((self, other))

    def __rmul__(self, other: Number) -> "CylFunction":
        return Scaled(float(other), self)


def _lift(x: "CylFunction | Number") -> CylFunction:
    return x if isinstance(x, CylFunction) else Const(float(x))


def _component(group: CompactGroup, h: np.ndarray, i: int) -> np.ndarray:
    axis = group.tuple_axis(np.ndim(h))
    if i >= np.shape(h)[axis]:
        raise ValueError(f"function uses h{i + 1} but the tuple has {np.shape(h)[axis]} components")
    return group.take(h, i)


@dataclass(frozen=True)
class Const(CylFunction):
    c: float

    def evaluate(self, group, h):
        return np.full(group.batch_shape(h)[:-1], self.c, dtype=float)

    def bound(self, group):
        return abs(self.c)

    def components(self):
        return set()

    def __str__(self):
        return repr(self.c)


@dataclass(frozen=True)
class ReTr(CylFunction):
    index: int

    def evaluate(self, group, h):
        return group.re_trace(_component(group, h, self.index))

    def bound(self, group):
        return 1.0 if isinstance(group, U1) else 2.0

    def components(self):
        return {self.index}

    def __str__(self):
        return f"retr(h{self.index + 1})"


@dataclass(frozen=True)
class AbsTr2(CylFunction):
    index: int

    def evaluate(self, group, h):
        return group.abs_trace_sq(_component(group, h, self.index))

    def bound(self, group):
        return 1.0 if isinstance(group, U1) else 4.0

    def components(self):
        return {self.index}

    def __str__(self):
        return f"abstr2(h{self.index + 1})"


@dataclass(frozen=True)
class CosChar(CylFunction):
    """``cos(sum_j k_j * theta_j)`` on U(1)^n; ``terms`` holds ``(index, k)`` pairs."""

    terms: tuple[tuple[int, int], ...]

    def evaluate(self, group, h):
        if not isinstance(group, U1):
            raise ValueError("cos(...) is only defined on U1")
        phase = np.zeros(group.batch_shape(h)[:-1])
        for i, k in self.terms:
            phase = phase + k * _component(group, h, i)
        return np.cos(phase)

    def bound(self, group):
        return 1.0

    def components(self):
        return {i for i, k in self.terms if k}

    def __str__(self):
        parts = []
        for i, k in self.terms:
            coef = "" if k == 1 else "-" if k == -1 else f"{k}*"
            parts.append(f"{coef}h{i + 1}")
        return "cos(" + " + ".join(parts).replace("+ -", "- ") + ")"


@dataclass(frozen=True)
class Ramp(CylFunction):
    """Smoothed indicator of a ball about the identity: ``clip((r_out - d) / (r_out - r_in), 0, 1)``."""

    index: int
    r_in: float
    r_out: float

    def __post_init__(self) -> None:
        if not 0 <= self.r_in < self.r_out:
            raise ValueError(f"ramp needs 0 <= r_in < r_out, got {self.r_in}, {self.r_out}")

    def evaluate(self, group, h):
        d = group.norm(_component(group, h, self.index))
        return np.clip((self.r_out - d) / (self.r_out - self.r_in), 0.0, 1.0)

    def bound(self, group):
        return 1.0

    def components(self):
        return {self.index}

    def __str__(self):
        return f"ramp(h{self.index + 1}, {self.r_in!r}, {self.r_out!r})"


@dataclass(frozen=True)
class Indicator(CylFunction):
    """Indicator of one element; ``element=None`` means the identity."""

    index: int
    element: int | None = None

    def evaluate(self, group, h):
        x = _component(group, h, self.index)
        if self.element is None:
            return (group.norm(x) == 0).astype(float)
        if not isinstance(group, FiniteGroup):
            raise ValueError("eq(h, k) needs a finite group")
        return (x == self.element).astype(float)

    def bound(self, group):
        return 1.0

    def components(self):
        return {self.index}

    def __str__(self):
        if self.element is None:
            return f"ind(h{self.index + 1})"
        return f"eq(h{self.index + 1}, {self.element})"


@dataclass(frozen=True)
class Scaled(CylFunction):
    c: float
    f: CylFunction

    def evaluate(self, group, h):
        return self.c * self.f.evaluate(group, h)

    def bound(self, group):
        return abs(self.c) * self.f.bound(group)

    def components(self):
        return self.f.components()

    def __str__(self):
        return f"{self.c!r}*({self.f})"


@dataclass(frozen=True)
class Sum(CylFunction):
    terms: tuple[CylFunction, ...]

    def evaluate(self, group, h):
        total = self.terms[0].evaluate(group, h)
        for t in self.terms[1:]:
            total = total + t.evaluate(group, h)
        return total

    def bound(self, group):
        return sum(t.bound(group) for t in self.terms)

    def components(self):
        return set().union(*(t.components() for t in self.terms))

    def __str__(self):
        return "(" + " + ".join(str(t) for t in self.terms) + ")"


@dataclass(frozen=True)
class Product(CylFunction):
    factors: tuple[CylFunction, ...]

    def evaluate(self, group, h):
        total = self.factors[0].evaluate(group, h)
        for f in self.factors[1:]:
            total = total * f.evaluate(group, h)
        return total

    def bound(self, group):
        return math.prod(f.bound(group) for f in self.factors)

    def components(self):
        return set().union(*(f.components() for f in self.factors))

    def __str__(self):
        return "*".join(f"({f})" for f in self.factors)


# ----------------------------------------------------------------------
# text form

_VAR = re.compile(r"h([1-9][0-9]*)$")


def _var_index(node: ast.AST, text: str) -> int:
    if isinstance(node, ast.Name):
        m = _VAR.match(node.id)
        if m:
            return int(m.group(1)) - 1
    raise FunctionSyntaxError(f"expected a component h1, h2, ... in {text!r}")


def _number(node: ast.AST, text: str) -> float:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _number(node.operand, text)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Mult, ast.Div, ast.Add, ast.Sub)):
        a, b = _number(node.left, text), _number(node.right, text)
        return {ast.Mult: a * b, ast.Div: a / b if b else math.nan, ast.Add: a + b, ast.Sub: a - b}[type(node.op)]
    raise FunctionSyntaxError(f"expected a number in {text!r}")


def _linear_angles(node: ast.AST, text: str) -> dict[int, int]:
    """Integer linear combination of components, e.g. ``2*h1 - h2``."""
    if isinstance(node, ast.Name):
        return {_var_index(node, text): 1}
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _linear_angles(node.operand, text)
        return {i: -k for i, k in inner.items()} if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub)):
        left, right = _linear_angles(node.left, text), _linear_angles(node.right, text)
        sign = 1 if isinstance(node.op, ast.Add) else -1
        out = dict(left)
        for i, k in right.items():
            out[i] = out.get(i, 0) + sign * k
        return out
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mult):
        for coef, var in ((node.left, node.right), (node.right, node.left)):
            try:
                k = _number(coef, text)
            except FunctionSyntaxError:
                continue
            if k != int(k):
                raise FunctionSyntaxError(f"cos() needs integer coefficients in {text!r}")
            return {i: int(k) * c for i, c in _linear_angles(var, text).items()}
    raise FunctionSyntaxError(f"cos() argument must be an integer combination of h's in {text!r}")


def _build(node: ast.AST, text: str) -> CylFunction:
    if isinstance(node, ast.Expression):
        return _build(node.body, text)
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, (ast.Add, ast.Sub, ast.Mult)):
            left, right = _build(node.left, text), _build(node.right, text)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(left, Const):
                return left.c * right
            if isinstance(right, Const):
                return right.c * left
            return left * right
        if isinstance(node.op, ast.Div):
            return (1.0 / _number(node.right, text)) * _build(node.left, text)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _build(node.operand, text)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, (ast.Constant, ast.Name)) and not _VAR.match(getattr(node, "id", "")):
        return Const(_number(node, text))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        name, args = node.func.id, node.args
        if name == "const" and len(args) == 1:
            return Const(_number(args[0], text))
        if name == "retr" and len(args) == 1:
            return ReTr(_var_index(args[0], text))
        if name == "abstr2" and len(args) == 1:
            return AbsTr2(_var_index(args[0], text))
        if name == "cos" and len(args) == 1:
            combo = _linear_angles(args[0], text)
            return CosChar(tuple(sorted((i, k) for i, k in combo.items() if k)))
        if name == "ramp" and len(args) == 3:
            return Ramp(_var_index(args[0], text), _number(args[1], text), _number(args[2], text))
        if name == "ind" and len(args) == 1:
            return Indicator(_var_index(args[0], text))
        if name == "eq" and len(args) == 2:
            k = _number(args[1], text)
            if k != int(k) or k < 0:
                raise FunctionSyntaxError(f"eq() needs a non-negative element index in {text!r}")
            return Indicator(_var_index(args[0], text), int(k))
        raise FunctionSyntaxError(f"unknown function or wrong arity: {name}() in {text!r}")
    raise FunctionSyntaxError(f"unsupported expression {ast.dump(node)} in {text!r}")


def parse_function(text: str) -> CylFunction:
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise FunctionSyntaxError(f"cannot parse {text!r}: {exc.msg}") from None
    return _build(tree, text)
