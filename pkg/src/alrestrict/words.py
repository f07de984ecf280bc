"""Free-group words over a finite alphabet of loop generators, and word maps.

Text grammar (whitespace is insignificant)::

    word    := factor*                  (juxtaposition is the product)
    factor  := atom postfix*
    atom    := GENERATOR | "(" word ")" | "1"
    postfix := "'" | "^" INTEGER        ("'" and "^-1" invert, "^k" is a power)

Generator names are matched greedily against the alphabet, so ``ab`` over
``{a, b}`` reads as ``a b`` while an alphabet ``{g1, g2}`` reads ``g1g2`` as
``g1 g2``. Powers are expanded when parsing. Words are always stored freely
reduced; the empty word prints as ``1``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .groups import CompactGroup, GroupTuple

Letter = tuple[int, int]  # (generator index, +1 or -1)


class WordParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos}: {text!r}")
        self.text = text
        self.pos = pos


class AlphabetMismatchError(ValueError):
    pass


def _free_reduce(letters: Iterable[Letter]) -> tuple[Letter, ...]:
    stack: list[Letter] = []
    for gen, sign in letters:
        if stack and stack[-1][0] == gen and stack[-1][1] == -sign:
            stack.pop()
        else:
            stack.append((gen, sign))
    return tuple(stack)


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __post_init__(self) -> None:
        syms = tuple(self.symbols)
        if len(set(syms)) != len(syms):
            raise ValueError(f"duplicate generator names in {syms}")
        for s in syms:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", s):
                raise ValueError(f"invalid generator name {s!r}")
        object.__setattr__(self, "symbols", syms)

    @classmethod
    def of(cls, symbols: str | Sequence[str]) -> "Alphabet":
        if isinstance(symbols, str):
            symbols = [s for s in re.split(r"[\s,]+", symbols.strip()) if s]
        return cls(tuple(symbols))

    def __len__(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        return self.symbols.index(symbol)


@dataclass(frozen=True)
class Word:
    """A freely reduced word. Build through :meth:`of`, :func:`parse_word` or the operators."""

    alphabet: Alphabet
    letters: tuple[Letter, ...] = ()

    def __post_init__(self) -> None:
        m = len(self.alphabet)
        for gen, sign in self.letters:
            if not 0 <= gen < m or sign not in (1, -1):
                raise ValueError(f"bad letter {(gen, sign)} for alphabet of size {m}")
        object.__setattr__(self, "letters", _free_reduce(self.letters))

    @classmethod
    def of(cls, alphabet: Alphabet, letters: Iterable[Letter]) -> "Word":
        return cls(alphabet, tuple(letters))

    @classmethod
    def generator(cls, alphabet: Alphabet, symbol: str) -> "Word":
        return cls(alphabet, ((alphabet.index(symbol), 1),))

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return concat(self, other)

    def __invert__(self) -> "Word":
        return invert(self)

    def __pow__(self, k: int) -> "Word":
        base = self if k >= 0 else invert(self)
        return Word(self.alphabet, base.letters * abs(k))

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(
            self.alphabet.symbols[g] + ("" if s == 1 else "^-1") for g, s in self.letters
        )

    def generators_used(self) -> set[int]:
        return {g for g, _ in self.letters}


def reduce(w: Word) -> Word:
    """Free reduction. Words are kept reduced, so this re-validates and returns an equal word."""
    return Word(w.alphabet, _free_reduce(w.letters))


def concat(w1: Word, w2: Word) -> Word:
    if w1.alphabet != w2.alphabet:
        raise AlphabetMismatchError(f"{w1.alphabet.symbols} vs {w2.alphabet.symbols}")
    return Word(w1.alphabet, w1.letters + w2.letters)


def invert(w: Word) -> Word:
    return Word(w.alphabet, tuple((g, -s) for g, s in reversed(w.letters)))


# ----------------------------------------------------------------------
# parsing


class _Parser:
    def __init__(self, text: str, alphabet: Alphabet):
        self.text = text
        self.alphabet = alphabet
        self.pos = 0
        self.names = sorted(alphabet.symbols, key=len, reverse=True)

    def error(self, message: str, pos: int | None = None) -> WordParseError:
        return WordParseError(message, self.text, self.pos if pos is None else pos)

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> list[Letter]:
        letters = self.word()
        if self.peek():
            raise self.error(f"unexpected {self.peek()!r}")
        return letters

    def word(self) -> list[Letter]:
        letters: list[Letter] = []
        while True:
            ch = self.peek()
            if not ch or ch == ")":
                return letters
            letters.extend(self.factor())

    def factor(self) -> list[Letter]:
        letters = self.atom()
        while True:
            ch = self.peek()
            if ch == "'":
                self.pos += 1
                letters = [(g, -s) for g, s in reversed(letters)]
            elif ch == "^":
                self.pos += 1
                self.skip()
                m = re.compile(r"[+-]?\s*\d+").match(self.text, self.pos)
                if not m:
                    raise self.error("expected integer exponent after '^'")
                self.pos = m.end()
                k = int(m.group().replace(" ", ""))
                base = letters if k >= 0 else [(g, -s) for g, s in reversed(letters)]
                letters = base * abs(k)
            else:
                return letters

    def atom(self) -> list[Letter]:
        ch = self.peek()
        start = self.pos
        if ch == "(":
            self.pos += 1
            inner = self.word()
            if self.peek() != ")":
                raise self.error("missing ')'", start if not self.peek() else None)
            self.pos += 1
            return inner
        if ch == "1":
            self.pos += 1
            return []
        for name in self.names:
            if self.text.startswith(name, self.pos):
                self.pos += len(name)
                return [(self.alphabet.index(name), 1)]
        m = re.compile(r"[A-Za-z_][A-Za-z0-9_]*").match(self.text, self.pos)
        if m:
            raise self.error(f"unknown generator {m.group()!r}")
        raise self.error(f"unexpected {ch!r}")


def parse_word(text: str, alphabet: Alphabet | str | Sequence[str]) -> Word:
    if not isinstance(alphabet, Alphabet):
        alphabet = Alphabet.of(alphabet)
    return Word(alphabet, tuple(_Parser(text, alphabet).parse()))


# ----------------------------------------------------------------------
# word maps


@dataclass(frozen=True)
class WordMap:
    """n words over an m-letter alphabet: the map ``G^m -> G^n``."""

    alphabet: Alphabet
    words: tuple[Word, ...]

    def __post_init__(self) -> None:
        words = tuple(self.words)
        for w in words:
            if w.alphabet != self.alphabet:
                raise AlphabetMismatchError(f"word {w} is not over {self.alphabet.symbols}")
        object.__setattr__(self, "words", words)

    @classmethod
    def parse(cls, alphabet: Alphabet | str | Sequence[str], words: str | Sequence[str]) -> "WordMap":
        """``words`` is a list of expressions or one string separated by ``;``."""
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet.of(alphabet)
        if isinstance(words, str):
            words = [w for w in words.split(";")]
        return cls(alphabet, tuple(parse_word(w, alphabet) for w in words))

    @property
    def m(self) -> int:
        return len(self.alphabet)

    @property
    def n(self) -> int:
        return len(self.words)

    def __str__(self) -> str:
        return "; ".join(str(w) for w in self.words)

    def evaluate(self, group: CompactGroup, g: np.ndarray) -> np.ndarray:
        """Batched evaluation: ``g`` has shape ``batch + (m,) + elem``; result ``batch + (n,) + elem``."""
        g = np.asarray(g)
        axis = group.tuple_axis(g.ndim)
        if g.shape[axis] != self.m:
            raise ValueError(f"word map needs {self.m} group elements, got {g.shape[axis]}")
        gens = [group.take(g, j) for j in range(self.m)]
        invs: dict[int, np.ndarray] = {}
        batch = group.batch_shape(gens[0]) if gens else group.batch_shape(g)[:-1]
        out = []
        for word in self.words:
            acc = None
            for gen, sign in word.letters:
                if sign == 1:
                    x = gens[gen]
                else:
                    if gen not in invs:
                        invs[gen] = group.inverse(gens[gen])
                    x = invs[gen]
                acc = x if acc is None else group.multiply(acc, x)
            out.append(group.identity(batch) if acc is None else acc)
        if not out:
            raise ValueError("word map has no words")
        return group.stack(out)


def eval_word_map(wm: WordMap, g: GroupTuple) -> GroupTuple:
    if g.arity != wm.m:
        raise ValueError(f"word map needs {wm.m} group elements, got {g.arity}")
    return GroupTuple(g.group, wm.evaluate(g.group, g.data))


def compose_word_maps(outer: WordMap, inner: WordMap) -> WordMap:
    """Substitute ``inner``'s words for ``outer``'s generators.

    ``eval(compose(outer, inner), g) == eval(outer, eval(inner, g))``.
    """
    if outer.m != inner.n:
        raise ValueError(f"outer alphabet has {outer.m} letters but inner map has {inner.n} words")
    words = []
    for w in outer.words:
        letters: list[Letter] = []
        for gen, sign in w.letters:
            sub = inner.words[gen]
            letters.extend(sub.letters if sign == 1 else invert(sub).letters)
        words.append(Word(inner.alphabet, tuple(letters)))
    return WordMap(inner.alphabet, tuple(words))
