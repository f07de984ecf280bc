import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alrestrict.groups import SU2, U1, GroupTuple, symmetric_group
from alrestrict.words import (
    Alphabet,
    AlphabetMismatchError,
    Word,
    WordMap,
    WordParseError,
    compose_word_maps,
    concat,
    eval_word_map,
    invert,
    parse_word,
    reduce,
)

AB = Alphabet.of("a b")
ABC = Alphabet.of("a b c")


def letters(m: int, max_len: int = 20):
    return st.lists(st.tuples(st.integers(0, m - 1), st.sampled_from([1, -1])), max_size=max_len)


def words(alphabet: Alphabet, max_len: int = 20):
    return letters(len(alphabet), max_len).map(lambda ls: Word(alphabet, tuple(ls)))


def is_reduced(w: Word) -> bool:
    return all(not (x[0] == y[0] and x[1] == -y[1]) for x, y in zip(w.letters, w.letters[1:]))


# ---------------------------------------------------------------- parsing


def test_parse_commutator():
    w = parse_word("a b a^-1 b^-1", AB)
    assert w.letters == ((0, 1), (1, 1), (0, -1), (1, -1))


def test_parse_cancellation_to_empty():
    w = parse_word("a a^-1", AB)
    assert len(w) == 0
    assert str(w) == "1"


def test_parse_power_of_group():
    assert parse_word("(a b)^2", AB).letters == ((0, 1), (1, 1), (0, 1), (1, 1))


@pytest.mark.parametrize(
    "text, expected",
    [
        ("ab", "a b"),
        ("a'", "a^-1"),
        ("(a b)'", "b^-1 a^-1"),
        ("a^3 a^-2", "a"),
        ("(a b)^-2", "b^-1 a^-1 b^-1 a^-1"),
        ("1", "1"),
        ("", "1"),
        ("a 1 b", "a b"),
        ("a^0", "1"),
        ("a^ - 1", "a^-1"),
    ],
)
def test_parse_forms(text, expected):
    assert str(parse_word(text, AB)) == expected


def test_greedy_multichar_generators():
    alpha = Alphabet.of(["g1", "g12", "h"])
    assert parse_word("g12g1h", alpha).letters == ((1, 1), (0, 1), (2, 1))


@pytest.mark.parametrize(
    "text, pos, msg",
    [
        ("a c", 2, "unknown generator 'c'"),
        ("(a b", 0, "missing"),
        ("a ^ x", 4, "integer exponent"),
        ("a ) b", 2, "unexpected"),
        ("a * b", 2, "unexpected"),
    ],
)
def test_parse_errors_report_position(text, pos, msg):
    with pytest.raises(WordParseError, match=msg) as info:
        parse_word(text, AB)
    assert info.value.pos == pos


def test_alphabet_validation():
    with pytest.raises(ValueError, match="duplicate"):
        Alphabet.of("a a")
    with pytest.raises(ValueError, match="invalid"):
        Alphabet.of(["1x"])


@given(words(ABC))
def test_parse_print_roundtrip(w):
    assert parse_word(str(w), ABC) == w


# ---------------------------------------------------------------- reduction


def test_reduce_examples():
    w = Word(AB, ((0, 1), (1, 1), (1, -1), (0, 1)))
    assert reduce(w).letters == ((0, 1), (0, 1))
    assert reduce(Word(AB)).letters == ()


@given(letters(3))
def test_construction_always_reduces(ls):
    w = Word(ABC, tuple(ls))
    assert is_reduced(w)
    assert len(w) <= len(ls)
    assert reduce(w) == w  # idempotent


@given(words(ABC))
def test_word_times_inverse_is_empty(w):
    assert len(concat(w, invert(w))) == 0
    assert len(w * ~w) == 0


def test_concat_invert_examples():
    a, b = Word.generator(AB, "a"), Word.generator(AB, "b")
    assert str(concat(a, b)) == "a b"
    assert str(invert(a * b)) == "b^-1 a^-1"
    assert str(concat(a * b, ~b)) == "a"
    assert str(a**3) == "a a a"
    assert str(b**-2) == "b^-1 b^-1"


def test_concat_alphabet_mismatch():
    with pytest.raises(AlphabetMismatchError):
        concat(Word.generator(AB, "a"), Word.generator(ABC, "a"))


# ---------------------------------------------------------------- evaluation


def test_eval_identity_and_doubling_on_u1():
    G = U1()
    g = GroupTuple(G, np.array([1.0]))
    assert eval_word_map(WordMap.parse("a", "a"), g).data[0] == pytest.approx(1.0)
    assert eval_word_map(WordMap.parse("a", "a^2"), g).data[0] == pytest.approx(2.0)


def test_eval_commutator_on_s3_against_permutations():
    G = symmetric_group(3)
    perms = list(itertools.permutations(range(3)))

    def comp(p, q):
        return tuple(p[q[x]] for x in range(3))

    def inv(p):
        out = [0] * 3
        for i, v in enumerate(p):
            out[v] = i
        return tuple(out)

    wm = WordMap.parse(AB, "a b a^-1 b^-1")
    for a, b in [((1, 0, 2), (0, 2, 1)), ((1, 0, 2), (2, 1, 0)), ((1, 2, 0), (2, 0, 1))]:
        g = GroupTuple(G, np.array([perms.index(a), perms.index(b)]))
        expect = comp(comp(comp(a, b), inv(a)), inv(b))
        assert perms[int(eval_word_map(wm, g).data[0])] == expect


def test_eval_left_to_right_on_su2():
    G = SU2()
    rng = np.random.default_rng(0)
    g = G.haar(rng, (2,))
    out = WordMap.parse(AB, "a b a^-1").evaluate(G, g)[0]
    expect = G.multiply(G.multiply(g[0], g[1]), G.inverse(g[0]))
    np.testing.assert_allclose(out, expect, atol=1e-12)


def test_eval_empty_word_is_identity():
    G = SU2()
    out = WordMap.parse(AB, "1; a a'").evaluate(G, G.haar(np.random.default_rng(1), (5, 2)))
    np.testing.assert_allclose(out, G.identity((5, 2)))


def test_eval_arity_mismatch():
    with pytest.raises(ValueError, match="needs 2"):
        eval_word_map(WordMap.parse(AB, "a"), GroupTuple(U1(), np.array([0.1])))


@pytest.mark.parametrize("G", [SU2(), U1(), symmetric_group(3)], ids=str)
@given(w1=words(ABC), w2=words(ABC), seed=st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_evaluation_is_a_homomorphism(G, w1, w2, seed):
    g = G.haar(np.random.default_rng(seed), (10, 3))
    ev = lambda w: WordMap(ABC, (w,)).evaluate(G, g)[:, 0]  # noqa: E731
    assert np.max(G.distance(ev(w1 * w2), G.multiply(ev(w1), ev(w2)))) < 1e-9
    assert np.max(G.distance(ev(~w1), G.inverse(ev(w1)))) < 1e-9


# ---------------------------------------------------------------- composition


def test_compose_examples():
    inner_b = WordMap.parse("b", "b")
    assert str(compose_word_maps(WordMap.parse("a", "a^2"), inner_b)) == "b b"
    inner_bc = WordMap.parse("b c", "b c")
    assert str(compose_word_maps(WordMap.parse("a", "a"), inner_bc)) == "b c"
    with pytest.raises(ValueError):
        compose_word_maps(WordMap.parse(AB, "a b"), inner_b)


@given(
    outer=st.lists(words(AB, 8), min_size=1, max_size=3),
    inner=st.lists(words(ABC, 8), min_size=2, max_size=2),
    seed=st.integers(0, 2**32 - 1),
)
@settings(max_examples=40, deadline=None)
def test_compose_matches_two_step_evaluation(outer, inner, seed):
    G = SU2()
    o, i = WordMap(AB, tuple(outer)), WordMap(ABC, tuple(inner))
    g = G.haar(np.random.default_rng(seed), (100, 3))
    direct = compose_word_maps(o, i).evaluate(G, g)
    two_step = o.evaluate(G, i.evaluate(G, g))
    assert np.max(G.distance(direct, two_step)) < 1e-9
