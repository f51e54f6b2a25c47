"""Free-group words over named alphabets.

Words are run-length encoded: a word is a sequence of syllables
(generator index, nonzero exponent).  A word is *reduced* when no two
adjacent syllables share a generator index; in run-length form that is
exactly cancellation-freeness.  Words are immutable values and every
operation returns a new value, so they are safe to share freely.
"""

from __future__ import annotations

import re
from typing import Iterable, Iterator, Mapping

from .errors import AlphabetMismatch, MissingImage, UnknownGenerator

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

Syllable = tuple[int, int]


class Generator:
    """A named generator with its dense position inside an Alphabet."""

    __slots__ = ("name", "index")

    def __init__(self, name: str, index: int):
        if not _NAME_RE.match(name):
            raise ValueError(f"bad generator name {name!r}")
        self.name = name
        self.index = index

    def __repr__(self) -> str:
        return f"Generator({self.name!r}, {self.index})"

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Generator)
            and self.name == other.name
            and self.index == other.index
        )

    def __hash__(self) -> int:
        return hash((self.name, self.index))


class Alphabet:
    """Ordered list of distinct generators; equality is by name sequence."""

    __slots__ = ("generators", "names", "_pos")

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate generator names in {names}")
        self.names = names
        self.generators = tuple(Generator(n, i) for i, n in enumerate(names))
        self._pos = {n: i for i, n in enumerate(names)}

    def index(self, name: str) -> int:
        try:
            return self._pos[name]
        except KeyError:
            raise UnknownGenerator(f"unknown generator {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._pos

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[Generator]:
        return iter(self.generators)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"Alphabet({list(self.names)!r})"

    def extend(self, extra: Iterable[str]) -> "Alphabet":
        return Alphabet(self.names + tuple(extra))


def _check_same_alphabet(u: "Word", v: "Word") -> None:
    if u.alphabet != v.alphabet:
        raise AlphabetMismatch(
            f"words over different alphabets: {u.alphabet.names} vs {v.alphabet.names}"
        )


class Word:
    """An immutable word; may be unreduced (relators are stored as given)."""

    __slots__ = ("alphabet", "syllables")

    def __init__(self, alphabet: Alphabet, syllables: Iterable[Syllable] = ()):
        syllables = tuple((int(g), int(e)) for g, e in syllables)
        n = len(alphabet)
        for g, e in syllables:
            if e == 0:
                raise ValueError("syllable with exponent 0")
            if not 0 <= g < n:
                raise ValueError(f"generator index {g} out of range")
        self.alphabet = alphabet
        self.syllables = syllables

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "Word":
        return cls(alphabet, ())

    @classmethod
    def build(cls, alphabet: Alphabet, *pairs: tuple[str, int]) -> "Word":
        """Construct from (name, exponent) pairs, e.g. build(A, ("a", 2), ("b", -1))."""
        return cls(alphabet, ((alphabet.index(n), e) for n, e in pairs))

    # -- views ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self.syllables)

    def __bool__(self) -> bool:
        return bool(self.syllables)

    def __iter__(self) -> Iterator[Syllable]:
        return iter(self.syllables)

    def letter_count(self) -> int:
        return sum(abs(e) for _, e in self.syllables)

    def letters(self) -> Iterator[tuple[int, int]]:
        """Expand to single letters as (generator index, sign) pairs."""
        for g, e in self.syllables:
            s = 1 if e > 0 else -1
            for _ in range(abs(e)):
                yield g, s

    def is_reduced(self) -> bool:
        return all(
            self.syllables[i][0] != self.syllables[i + 1][0]
            for i in range(len(self.syllables) - 1)
        )

    def exponent_sum(self, name: str) -> int:
        g = self.alphabet.index(name)
        return sum(e for h, e in self.syllables if h == g)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Word)
            and self.alphabet == other.alphabet
            and self.syllables == other.syllables
        )

    def __hash__(self) -> int:
        return hash((self.alphabet, self.syllables))

    def __str__(self) -> str:
        # Matches the dsl word grammar: `a b^-2 a^3`; empty word prints as "".
        parts = []
        for g, e in self.syllables:
            name = self.alphabet.names[g]
            parts.append(name if e == 1 else f"{name}^{e}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"Word({str(self) or 'ε'!r})"

    # -- group operations ----------------------------------------------

    def free_reduce(self) -> "Word":
        return Word(self.alphabet, _reduce_syllables(self.syllables))

    def invert(self) -> "Word":
        return Word(self.alphabet, tuple((g, -e) for g, e in reversed(self.syllables)))

    def __invert__(self) -> "Word":
        return self.invert()

    def multiply(self, other: "Word") -> "Word":
        _check_same_alphabet(self, other)
        return Word(self.alphabet, _reduce_syllables(self.syllables + other.syllables))

    def __mul__(self, other: "Word") -> "Word":
        return self.multiply(other)

    def __pow__(self, n: int) -> "Word":
        if n == 0:
            return Word.identity(self.alphabet)
        base = self if n > 0 else self.invert()
        out = base
        for _ in range(abs(n) - 1):
            out = out.multiply(base)
        return out

    def conjugate(self, by: "Word") -> "Word":
        """by * self * by^-1."""
        return by.multiply(self).multiply(by.invert())

    def substitute(
        self,
        images: Mapping[str, "Word"],
        target: Alphabet | None = None,
    ) -> "Word":
        """Homomorphic image under name -> word, freely reduced.

        Every generator occurring in the word must have an image; all
        images must share one target alphabet.
        """
        if target is None:
            for img in images.values():
                target = img.alphabet
                break
            else:
                target = self.alphabet if not self.syllables else None
        if target is None:
            raise MissingImage("no images given for a non-empty word")
        out: list[Syllable] = []
        for g, e in self.syllables:
            name = self.alphabet.names[g]
            img = images.get(name)
            if img is None:
                raise MissingImage(f"no image for generator {name!r}")
            if img.alphabet != target:
                raise AlphabetMismatch(
                    f"image of {name!r} is over a different alphabet"
                )
            piece = img.syllables if e > 0 else img.invert().syllables
            for _ in range(abs(e)):
                _append_reducing(out, piece)
        return Word(target, tuple(out))

    def cyclically_reduce(self) -> tuple["Word", "Word"]:
        """Return (core, conjugator) with self = conjugator * core * conjugator^-1."""
        core = list(self.free_reduce().syllables)
        conj: list[Syllable] = []
        while len(core) >= 2 and core[0][0] == core[-1][0]:
            g, e1 = core[0]
            _, e2 = core[-1]
            if e1 + e2 == 0:
                # w = g^e1 m g^-e1: peel the conjugating syllable.
                conj.append((g, e1))
                core = core[1:-1]
            else:
                # w = g^e1 m g^e2 ~ g^-e2 (g^(e1+e2) m) g^e2.
                conj.append((g, -e2))
                core = [(g, e1 + e2)] + core[1:-1]
                break
        conj_word = Word(self.alphabet, _reduce_syllables(tuple(conj)))
        return Word(self.alphabet, tuple(core)), conj_word

    def translate(
        self,
        target: Alphabet,
        rename: Mapping[str, str] | None = None,
    ) -> "Word":
        """Re-express over another alphabet, optionally renaming generators."""
        out = []
        for g, e in self.syllables:
            name = self.alphabet.names[g]
            if rename is not None:
                name = rename.get(name, name)
            out.append((target.index(name), e))
        return Word(target, out)


def _append_reducing(acc: list[Syllable], tail: Iterable[Syllable]) -> None:
    for g, e in tail:
        if acc and acc[-1][0] == g:
            e2 = acc[-1][1] + e
            if e2 == 0:
                acc.pop()
            else:
                acc[-1] = (g, e2)
        else:
            acc.append((g, e))


def _reduce_syllables(syllables: Iterable[Syllable]) -> tuple[Syllable, ...]:
    acc: list[Syllable] = []
    _append_reducing(acc, syllables)
    return tuple(acc)


def free_reduce(w: Word) -> Word:
    return w.free_reduce()


def invert(w: Word) -> Word:
    return w.invert()


def multiply(u: Word, v: Word) -> Word:
    return u.multiply(v)


def substitute(w: Word, images: Mapping[str, Word], target: Alphabet | None = None) -> Word:
    return w.substitute(images, target)


def cyclically_reduce(w: Word) -> tuple[Word, Word]:
    return w.cyclically_reduce()
