import math
import textwrap

import pytest

from alrestrict.config import (
    KINDS,
    ConfigError,
    SetSpec,
    default_config,
    load_config,
    parse_config,
)


def cfg(text: str, kind=None):
    return parse_config(textwrap.dedent(text).lstrip("\n"), "exp.ini", kind)


def error(text: str, kind=None) -> ConfigError:
    with pytest.raises(ConfigError) as info:
        cfg(text, kind)
    return info.value


def test_full_restrict_file():
    c = cfg("""
        # restricted integral on the torus
        [experiment]
        kind = restrict
        id = torus-1
        [group]
        kind = U1
        [words]
        alphabet = a
        xi = a; a^2      # two loops
        [function]
        f = cos(2*h1 - h2)
        [schedule]
        radii = 0.8, 0.4, 0.2, 0.1
        extension = both
        [run]
        samples = 5000
        seed = 7
        [gate]
        expect = 1.0
        atol = 0.01
    """)
    assert (c.kind, c.id, c.group) == ("restrict", "torus-1", "U1")
    assert c.xi == "a; a^2"
    assert c.schedule == (0.8, 0.4, 0.2, 0.1)
    assert c.extension == "both"
    assert (c.samples, c.seed) == (5000, 7)
    assert (c.gate_expect, c.gate_atol, c.gate_nsigma) == (1.0, 0.01, 3.0)


def test_kind_from_subcommand():
    c = cfg("[run]\nseed = 3\n", kind="al-integrate")
    assert c.kind == "al-integrate" and c.seed == 3 and c.samples == 1_000_000


def test_kind_mismatch():
    e = error("[experiment]\nkind = tube\n", kind="hausdorff")
    assert e.line == 2 and "tube" in str(e)


def test_missing_kind():
    assert "kind" in str(error("[run]\nseed = 1\n"))


@pytest.mark.parametrize(
    "text, line, needle",
    [
        ("[experiment]\nkind = tube\n[run]\nsamplez = 5000\n", 4, "samplez"),
        ("[experiment]\nkind = tube\n[bogus]\nx = 1\n", 3, "bogus"),
        ("[experiment]\nkind = tube\n[run]\nsamples = 999\n", 4, "1000"),
        ("[experiment]\nkind = tube\n[schedule]\ndeltas = 0.1, 0.2, 0.05\n", 4, "decreasing"),
        ("[experiment]\nkind = tube\n[schedule]\ndeltas = 0.2, 0.1\n", 4, "three"),
        ("[experiment]\nkind = restrict\n[schedule]\nradii = 0.3 0.2 0.1\ndeltas = 0.3 0.2 0.1\n", 5, "either"),
        ("[experiment]\nkind = tube\n[group]\nkind = SU2\n", 3, "not used"),
        ("kind = tube\n", 1, "section"),
        ("[experiment]\nkind = hausdorff\n[set]\nkind = segment\n", 4, "points"),
        ("[experiment]\nkind = tube\n[set]\nkind = segment\npoints = 0,0 1,0,0\n", 5, "points"),
        ("[experiment]\nkind = tube\n[set]\nshape = sphere\n", 4, "ball"),
        ("[experiment]\nkind = support-tail\n[support]\nr_in = 2\nr_out = 1\n", 5, "r_in"),
        ("[experiment]\nkind = support-tail\n[support]\nm = 1 -2\n", 4, "non-negative"),
        ("[experiment]\nkind = restrict\n[schedule]\nextension = sideways\n", 4, "pullback"),
        ("[experiment]\nkind = tube\n[run]\nseed = 1\nseed = 2\n", 5, "seed"),
        ("[experiment]\nkind = warp\n", 2, "warp"),
        ("[experiment]\nkind = tube\n[run]\nsamples = lots\n", 4, "samples"),
    ],
)
def test_errors_carry_line_numbers(text, line, needle):
    e = error(text)
    assert e.line == line, str(e)
    assert needle in str(e)
    assert str(e).startswith(f"exp.ini:{line}: ")


def test_consistency_requires_alt_words():
    # the defaults supply them; a file can only override
    c = cfg("[experiment]\nkind = consistency\n")
    assert (c.alt_alphabet, c.alt_xi) == ("c", "c")


def test_set_kind_change_needs_points():
    c = cfg("[experiment]\nkind = hausdorff\n[set]\nkind = point\npoints = 0,0\nalpha = 0\n")
    assert c.set == SetSpec("point", ((0.0, 0.0),), alpha=0.0)
    tube = cfg("[experiment]\nkind = tube\n[set]\nshape = cube\n")
    assert tube.set.kind == "segment" and tube.set.points == ((0.0, 0.0), (1.0, 0.0))
    assert tube.set.shape == "cube"


def test_semicolon_is_not_a_comment():
    c = cfg("[experiment]\nkind = al-integrate\n[words]\nxi = a b; b a  # note\n")
    assert c.xi == "a b; b a"


def test_with_overrides_ignores_none():
    c = default_config("restrict")
    d = c.with_overrides(seed=5, samples=None, out="x.csv")
    assert (d.seed, d.samples, d.out) == (5, c.samples, "x.csv")


def test_defaults_for_every_kind():
    for kind in KINDS:
        c = default_config(kind)
        assert c.kind == kind and c.samples >= 1000
    assert default_config("support-tail").r_out == pytest.approx(math.pi / 2)
    with pytest.raises(ConfigError):
        default_config("nope")


def test_load_config(tmp_path):
    p = tmp_path / "a.ini"
    p.write_text("[experiment]\nkind = tube\nid = t\n")
    assert load_config(p).id == "t"
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.ini")
