"""Experiment configuration files.

Flat ``key = value`` pairs grouped in ``[sections]``; ``#`` starts a comment.
Every key is checked against the sections the chosen experiment kind reads,
so a misspelt or irrelevant key is an error rather than a silent default.
See the README for the full grammar.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

KINDS = ("al-integrate", "restrict", "hausdorff", "tube", "shape-demo", "support-tail", "consistency")
MIN_SAMPLES = 1000

# keys accepted in each section
SECTION_KEYS: dict[str, tuple[str, ...]] = {
    "experiment": ("kind", "id"),
    "group": ("kind",),
    "words": ("alphabet", "xi", "alt_alphabet", "alt_xi"),
    "function": ("f",),
    "set": ("kind", "points", "center", "radius", "alpha", "shape"),
    "schedule": ("radii", "deltas", "extension", "tolerance"),
    "support": ("r_in", "r_out", "m", "u_radius", "n_tail"),
    "run": ("samples", "seed", "workers"),
    "output": ("path", "format", "summary"),
    "gate": ("expect", "atol", "nsigma"),
}

COMMON_SECTIONS = ("experiment", "run", "output", "gate")

# sections each kind reads beyond the common ones
KIND_SECTIONS: dict[str, tuple[str, ...]] = {
    "al-integrate": ("group", "words", "function"),
    "restrict": ("group", "words", "function", "set", "schedule"),
    "hausdorff": ("set", "schedule"),
    "tube": ("set", "schedule"),
    "shape-demo": ("schedule",),
    "support-tail": ("group", "support"),
    "consistency": ("group", "words", "function"),
}


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None, source: str = "<config>"):
        self.message, self.line, self.source = message, line, source
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class SetSpec:
    kind: str = "circle"  # circle | segment | polyline | point
    points: tuple[tuple[float, ...], ...] = ()
    center: tuple[float, ...] = (0.0, 0.0)
    radius: float = 1.0
    alpha: Optional[float] = None  # defaults to the set's own dimension
    shape: str = "ball"


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    id: str
    group: str = "SU2"
    alphabet: str = "a b"
    xi: str = "a b a' b'"
    alt_alphabet: Optional[str] = None
    alt_xi: Optional[str] = None
    f: str = "retr(h1)"
    set: Optional[SetSpec] = None
    schedule: tuple[float, ...] = ()
    extension: str = "naive"
    tolerance: float = 0.01
    r_in: float = 1.0
    r_out: float = math.pi / 2
    m: tuple[int, ...] = (1, 2, 4, 10)
    u_radius: float = math.pi / 2
    n_tail: tuple[int, ...] = (1, 5, 10, 20)
    samples: int = 200_000
    seed: int = 0
    workers: int = 1
    out: Optional[str] = None
    format: str = "csv"
    summary: Optional[str] = None
    gate_expect: Optional[float] = None
    gate_atol: float = 0.0
    gate_nsigma: float = 3.0

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


DEFAULTS: dict[str, ExperimentConfig] = {
    "al-integrate": ExperimentConfig("al-integrate", "al-integrate", samples=1_000_000),
    "restrict": ExperimentConfig(
        "restrict", "restrict", group="U1", alphabet="a", xi="a; a^2",
        f="cos(2*h1 - h2)", schedule=(0.8, 0.4, 0.2, 0.1)),
    "hausdorff": ExperimentConfig("hausdorff", "hausdorff", set=SetSpec(), samples=1_000_000,
                                  schedule=(0.2, 0.1, 0.05, 0.025), tolerance=0.02),
    "tube": ExperimentConfig("tube", "tube", set=SetSpec("segment", ((0.0, 0.0), (1.0, 0.0))),
                             samples=1_000_000, schedule=(0.2, 0.1, 0.05, 0.025)),
    "shape-demo": ExperimentConfig("shape-demo", "shape-demo", samples=2_000_000,
                                   schedule=(0.04, 0.02, 0.01, 0.005)),
    "support-tail": ExperimentConfig("support-tail", "support-tail"),
    "consistency": ExperimentConfig(
        "consistency", "consistency", xi="a b", alt_alphabet="c", alt_xi="c",
        f="abstr2(h1)", samples=1_000_000),
}


def default_config(kind: str) -> ExperimentConfig:
    if kind not in DEFAULTS:
        raise ConfigError(f"unknown experiment kind {kind!r}; expected one of {', '.join(KINDS)}")
    return DEFAULTS[kind]


_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#\s][^=:]*?)\s*[=:]")


def _key_lines(text: str) -> dict[tuple[str, Optional[str]], int]:
    """Line number of every section header and key, for error messages."""
    lines: dict[tuple[str, Optional[str]], int] = {}
    section = None
    for no, raw in enumerate(text.splitlines(), 1):
        if m := _SECTION_RE.match(raw):
            section = m.group(1).strip()
            lines.setdefault((section, None), no)
        elif section is not None and (m := _KEY_RE.match(raw)) and not raw[:1].isspace():
            lines.setdefault((section, m.group(1).strip().lower()), no)
    return lines


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _points(text: str) -> tuple[tuple[float, ...], ...]:
    pts = tuple(tuple(float(c) for c in tok.split(",")) for tok in text.split())
    if not pts or len({len(p) for p in pts}) != 1:
        raise ValueError("points are whitespace-separated comma tuples of one dimension, e.g. '0,0 1,0'")
    return pts


def _decreasing(values: tuple[float, ...]) -> tuple[float, ...]:
    if len(values) < 3:
        raise ValueError("need at least three values")
    if any(v <= 0 for v in values) or any(b >= a for a, b in zip(values, values[1:])):
        raise ValueError("schedule must be positive and strictly decreasing")
    return values


def _counts(text: str) -> tuple[int, ...]:
    vals = tuple(int(v) for v in text.replace(",", " ").split())
    if not vals or any(v < 0 for v in vals):
        raise ValueError("expected non-negative integers")
    return vals


def parse_config(text: str, source: str = "<config>", kind: Optional[str] = None) -> ExperimentConfig:
    """Parse configuration text.

    ``kind`` is the subcommand being run; it must agree with
    ``[experiment] kind`` when both are given.
    """
    lines = _key_lines(text)
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",),
                                   inline_comment_prefixes=("#",), default_section="\0")
    try:
        cp.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any [section]", exc.lineno, source) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigError(exc.message.split(": ", 1)[-1], exc.lineno, source) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line (expected 'key = value')", lineno, source) from None

    def fail(msg: str, section: str, key: Optional[str] = None) -> ConfigError:
        return ConfigError(msg, lines.get((section, key)) or lines.get((section, None)), source)

    for section in cp.sections():
        if section not in SECTION_KEYS:
            raise fail(f"unknown section [{section}]", section)
        for key in cp[section]:
            if key not in SECTION_KEYS[section]:
                raise fail(f"unknown key {key!r} in [{section}]", section, key)

    file_kind = cp.get("experiment", "kind", fallback=None)
    if file_kind is not None and kind is not None and file_kind != kind:
        raise fail(f"config is for {file_kind!r} but the {kind!r} command was run", "experiment", "kind")
    kind = file_kind or kind
    if kind is None:
        raise ConfigError("missing [experiment] kind", None, source)
    if kind not in KINDS:
        raise fail(f"unknown experiment kind {kind!r}", "experiment", "kind")

    allowed = set(COMMON_SECTIONS) | set(KIND_SECTIONS[kind])
    for section in cp.sections():
        if section not in allowed:
            raise fail(f"section [{section}] is not used by {kind!r} experiments", section)

    cfg = default_config(kind)
    values: dict = {}

    def take(section: str, key: str, conv, dest: Optional[str] = None) -> None:
        if not cp.has_option(section, key):
            return
        raw = cp.get(section, key)
        try:
            values[dest or key] = conv(raw)
        except ValueError as exc:
            raise fail(f"bad value for {key!r}: {exc}", section, key) from None

    take("experiment", "id", str)
    take("group", "kind", str, "group")
    for key in ("alphabet", "xi", "alt_alphabet", "alt_xi"):
        take("words", key, str)
    take("function", "f", str)
    take("schedule", "extension", _choice("pullback", "naive", "both"))
    take("schedule", "tolerance", _positive(float))
    if cp.has_option("schedule", "radii") and cp.has_option("schedule", "deltas"):
        raise fail("give either radii or deltas, not both", "schedule", "deltas")
    take("schedule", "radii", lambda s: _decreasing(_floats(s)), "schedule")
    take("schedule", "deltas", lambda s: _decreasing(_floats(s)), "schedule")
    for key in ("r_in", "r_out", "u_radius"):
        take("support", key, _positive(float))
    take("support", "m", _counts)
    take("support", "n_tail", _counts)
    take("run", "samples", _at_least(MIN_SAMPLES))
    take("run", "seed", _at_least(0))
    take("run", "workers", _at_least(1))
    take("output", "path", str, "out")
    take("output", "format", _choice("csv", "json"))
    take("output", "summary", str)
    take("gate", "expect", float, "gate_expect")
    take("gate", "atol", _at_least(0.0, float), "gate_atol")
    take("gate", "nsigma", _positive(float), "gate_nsigma")

    if cp.has_section("set"):
        s = cfg.set or SetSpec()
        sv: dict = {}
        for key, conv in (("kind", _choice("circle", "segment", "polyline", "point")),
                          ("points", _points), ("center", _floats),
                          ("radius", _positive(float)), ("alpha", _at_least(0.0, float)),
                          ("shape", _choice("ball", "cube"))):
            if cp.has_option("set", key):
                try:
                    sv[key] = conv(cp.get("set", key))
                except ValueError as exc:
                    raise fail(f"bad value for {key!r}: {exc}", "set", key) from None
        new = replace(s, **sv)
        # points are not inherited across a change of kind
        if new.kind != "circle" and "points" not in sv and (new.kind != s.kind or not s.points):
            raise fail(f"a {new.kind} needs points", "set", "kind")
        values["set"] = new

    cfg = replace(cfg, **values)
    if cfg.kind == "support-tail" and not 0 < cfg.r_in < cfg.r_out:
        raise fail("need 0 < r_in < r_out", "support", "r_out")
    if cfg.kind == "consistency" and (cfg.alt_alphabet is None or cfg.alt_xi is None):
        raise fail("consistency needs alt_alphabet and alt_xi", "words")
    return cfg


def load_config(path: str | Path, kind: Optional[str] = None) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(p)) from None
    return parse_config(text, str(p), kind)


def _choice(*options: str):
    def conv(s: str) -> str:
        s = s.strip().lower()
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return s
    return conv


def _positive(conv):
    def check(s: str):
        v = conv(s)
        if not v > 0:
            raise ValueError("must be positive")
        return v
    return check


def _at_least(lo, conv=int):
    def check(s: str):
        v = conv(s)
        if v < lo:
            raise ValueError(f"must be at least {lo}")
        return v
    return check
