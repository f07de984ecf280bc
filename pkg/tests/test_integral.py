import itertools
import math

import numpy as np
import pytest

from alrestrict.functions import CosChar, Indicator, ReTr, parse_function
from alrestrict.groups import SU2, U1, symmetric_group
from alrestrict.integral import (
    CylindricalFunction,
    EnumerationBudgetError,
    consistency_check,
    integrate,
    integrate_exact,
    integrate_mc,
)
from alrestrict.montecarlo import derive_seed
from alrestrict.words import WordMap

S3 = symmetric_group(3)


def cf(alphabet, words, f):
    return CylindricalFunction.parse(alphabet, words, parse_function(f) if isinstance(f, str) else f)


# ---------------------------------------------------------------- exact


def test_exact_normalization():
    assert integrate_exact(cf("a b", "a b", "const(1)"), S3) == 1.0


def test_exact_identity_indicator():
    assert integrate_exact(cf("a", "a", "ind(h1)"), S3) == pytest.approx(1 / 6)


def test_commuting_pairs_in_s3():
    # oracle: count commuting pairs of permutations directly
    perms = list(itertools.permutations(range(3)))
    comp = lambda p, q: tuple(p[q[x]] for x in range(3))  # noqa: E731
    commuting = sum(comp(p, q) == comp(q, p) for p in perms for q in perms)
    assert commuting == 18
    val = integrate_exact(cf("a b", "a b a^-1 b^-1", "ind(h1)"), S3)
    assert val == commuting / 36


def test_enumeration_budget():
    big = cf("a b c d e f g h i j k", "a", "ind(h1)")
    with pytest.raises(EnumerationBudgetError):
        integrate_exact(big, S3)
    with pytest.raises(TypeError):
        integrate_exact(big, U1())


def test_arity_check():
    with pytest.raises(ValueError, match="h2"):
        cf("a", "a", "retr(h1) * retr(h2)")


# ---------------------------------------------------------------- Monte Carlo


def test_su2_trace_integrals():
    assert integrate_mc(cf("a", "a", "retr(h1)"), SU2(), 10**6, 1).within(0.0)
    comm = integrate_mc(cf("a b", "a b a^-1 b^-1", "retr(h1)"), SU2(), 10**6, 2)
    assert comm.within(0.5)


def test_u1_cos_of_square():
    assert integrate_mc(cf("a", "a^2", CosChar(((0, 1),))), U1(), 10**5, 3).within(0.0)


def test_minimum_samples():
    with pytest.raises(ValueError, match="1000"):
        integrate_mc(cf("a", "a", "retr(h1)"), SU2(), 999, 0)


def test_seed_determinism():
    c = cf("a b", "a b", "abstr2(h1)")
    assert integrate_mc(c, SU2(), 20_000, 9) == integrate_mc(c, SU2(), 20_000, 9)


def _random_cylindrical(rng: np.random.Generator) -> CylindricalFunction:
    gens = ["a", "b"]
    n = int(rng.integers(1, 3))
    words = []
    for _ in range(n):
        length = int(rng.integers(0, 5))
        words.append(" ".join(gens[rng.integers(2)] + ("'" if rng.random() < 0.5 else "") for _ in range(length)) or "1")
    terms = [f"{rng.normal():.3f}*eq(h{rng.integers(1, n + 1)}, {rng.integers(6)})" for _ in range(3)]
    return cf("a b", "; ".join(words), " + ".join(terms))


@pytest.mark.parametrize("i", range(20))
def test_mc_agrees_with_exact_on_s3(i):
    c = _random_cylindrical(np.random.default_rng(1000 + i))
    exact = integrate_exact(c, S3)
    mc = integrate_mc(c, S3, 50_000, derive_seed(2, i))
    assert mc.within(exact), (str(c.word_map), str(c.f))


def test_mc_stderr_is_calibrated():
    # z-scores against the exact value over many seeds should be standard normal
    c = _random_cylindrical(np.random.default_rng(1006))
    exact = integrate_exact(c, S3)
    z = np.array([(e.value - exact) / e.stderr
                  for e in (integrate_mc(c, S3, 5_000, s) for s in range(400))])
    assert abs(z.mean()) < 0.2
    assert 0.9 < z.std() < 1.1


def test_integrate_dispatch():
    assert integrate(cf("a b", "a b", "ind(h1)"), S3).stderr == 0.0
    assert integrate(cf("a", "a", "retr(h1)"), SU2(), 5000, 0).stderr > 0


# ---------------------------------------------------------------- properties


def test_linearity_exact_and_mc():
    wm = WordMap.parse("a b", "a b; b a'")
    f, g = parse_function("eq(h1, 2)"), parse_function("eq(h2, 4)")
    lhs = integrate_exact(CylindricalFunction(wm, 2 * f - 3 * g), S3)
    rhs = 2 * integrate_exact(CylindricalFunction(wm, f), S3) - 3 * integrate_exact(CylindricalFunction(wm, g), S3)
    assert lhs == pytest.approx(rhs, abs=1e-15)

    G = SU2()
    f2, g2 = parse_function("retr(h1)"), parse_function("abstr2(h2)")
    combo = integrate_mc(CylindricalFunction(wm, 2 * f2 - 3 * g2), G, 10**5, 5)
    a = integrate_mc(CylindricalFunction(wm, f2), G, 10**5, 6)
    b = integrate_mc(CylindricalFunction(wm, g2), G, 10**5, 7)
    err = math.sqrt(combo.stderr**2 + 4 * a.stderr**2 + 9 * b.stderr**2)
    assert abs(combo.value - (2 * a.value - 3 * b.value)) <= 3 * err


def test_positivity_and_bound():
    G = SU2()
    c = cf("a b", "a b", "abstr2(h1)")
    est = integrate_mc(c, G, 10**4, 0)
    assert 0 <= est.value <= c.sup_bound(G)


def test_factorization_over_independent_loops():
    G = SU2()
    f1, f2 = parse_function("abstr2(h1)"), parse_function("ramp(h2, 0.5, 1.5)")
    prod = integrate_mc(CylindricalFunction(WordMap.parse("a b", "a; b"), f1 * f2), G, 10**6, 1)
    one = integrate_mc(CylindricalFunction(WordMap.parse("a", "a"), f1), G, 10**6, 2)
    two = integrate_mc(CylindricalFunction(WordMap.parse("b", "b; b"), f2), G, 10**6, 3)
    pred = one.value * two.value
    pred_err = math.hypot(one.stderr * two.value, two.stderr * one.value)
    assert abs(prod.value - pred) <= 3 * math.hypot(prod.stderr, pred_err)


# ---------------------------------------------------------------- consistency


def test_consistency_su2():
    rep = consistency_check(cf("a b", "a b", "abstr2(h1)"), cf("c", "c", "abstr2(h1)"), SU2(), 10**6, 0)
    assert rep.consistent
    assert rep.first.within(1.0) and rep.second.within(1.0)


def test_consistency_finite_is_exact():
    rep = consistency_check(cf("a b", "a b", "eq(h1, 3)"), cf("c", "c", "eq(h1, 3)"), S3)
    assert rep.delta == 0.0 and rep.consistent


def test_consistency_constant_function():
    rep = consistency_check(cf("a b", "a b", "const(1)"), cf("c", "c", "const(1)"), SU2(), 10**4, 0)
    assert rep.delta == 0.0


def test_consistency_flags_different_loops():
    # a^2 is not Haar distributed, so its trace integral differs from that of a
    rep = consistency_check(cf("a", "a^2", "retr(h1)"), cf("c", "c", "retr(h1)"), SU2(), 10**5, 0)
    assert not rep.consistent


def test_indicator_catalog_defaults_to_identity():
    assert Indicator(0).evaluate(S3, np.array([[S3.e]]))[0] == 1.0
    assert ReTr(0).components() == {0}
