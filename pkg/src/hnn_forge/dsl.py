"""Presentation/word text grammar and canonical serialization.

Grammar (ASCII only)::

    presentation := "<" genlist "|" relitem* ">"
    genlist      := name ("," name)* | ε
    relitem      := word ("=" word)?     -- items separated by ","
    word         := term+
    term         := name ("^" signed-integer)?

Whitespace separates terms; `a b^-2 a^3` is a three-syllable word.
Relations `u = v` are normalized to the relator u·v^-1 at parse time.
Generator names are case-sensitive and uppercase is not inverse shorthand.

The canonical JSON export is ``{"generators": [...], "relators": [[[name,
exponent], ...], ...]}``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any

from .errors import ForgeParseError, SourceSpan, UnknownGenerator
from .words import Alphabet, Word

__all__ = [
    "Presentation",
    "parse_presentation",
    "parse_word",
    "render",
    "render_word",
    "presentation_to_json",
    "presentation_from_json",
    "word_to_json",
    "word_from_json",
]


@dataclass(frozen=True)
class Presentation:
    """A finite presentation: alphabet plus relator words.

    Relators are stored as given; equality compares them after free
    reduction, so `< a | a a^-1 b >` equals `< a | b >` structurally.
    """

    alphabet: Alphabet
    relators: tuple[Word, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        for r in self.relators:
            if r.alphabet != self.alphabet:
                raise ValueError(f"relator {r!r} not over the presentation alphabet")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Presentation):
            return NotImplemented
        return self.alphabet == other.alphabet and tuple(
            r.free_reduce() for r in self.relators
        ) == tuple(r.free_reduce() for r in other.relators)

    def __hash__(self) -> int:
        return hash((self.alphabet, tuple(r.free_reduce() for r in self.relators)))

    def __str__(self) -> str:
        return render(self)

    def is_free(self) -> bool:
        return all(not r.free_reduce() for r in self.relators)


_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<name>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<int>-?\d+)"
    r"|(?P<punct>[<>|,^=])"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    span: SourceSpan


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ForgeParseError(
                SourceSpan(pos, pos + 1), f"unexpected character {text[pos]!r}"
            )
        kind = m.lastgroup or ""
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), SourceSpan(m.start(), m.end())))
        pos = m.end()
    tokens.append(_Token("eof", "", SourceSpan(len(text), len(text))))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.cur
        self.pos += 1
        return tok

    def expect(self, text: str, what: str) -> _Token:
        if self.cur.text != text:
            raise ForgeParseError(self.cur.span, f"expected {what}")
        return self.advance()

    def fail(self, message: str):
        raise ForgeParseError(self.cur.span, message)

    # word := term+ ; term := name ("^" signed-integer)?
    def parse_syllables(self, alphabet: Alphabet) -> list[tuple[int, int]]:
        syllables: list[tuple[int, int]] = []
        while self.cur.kind == "name":
            name_tok = self.advance()
            if name_tok.text not in alphabet:
                raise ForgeParseError(
                    name_tok.span, f"unknown generator {name_tok.text!r}"
                )
            exp = 1
            if self.cur.text == "^":
                self.advance()
                if self.cur.kind != "int":
                    self.fail("malformed power: expected an integer exponent")
                exp_tok = self.advance()
                exp = int(exp_tok.text)
                if exp == 0:
                    raise ForgeParseError(exp_tok.span, "zero exponent forbidden")
            syllables.append((alphabet.index(name_tok.text), exp))
        if not syllables:
            self.fail("expected a word")
        return syllables

    def parse_word(self, alphabet: Alphabet) -> Word:
        return Word(alphabet, self.parse_syllables(alphabet))

    def parse_presentation(self) -> Presentation:
        self.expect("<", "'<' to open the presentation")
        names = []
        if self.cur.kind == "name":
            names.append(self.advance().text)
            while self.cur.text == ",":
                self.advance()
                if self.cur.kind != "name":
                    self.fail("expected a generator name after ','")
                names.append(self.advance().text)
        if len(set(names)) != len(names):
            self.fail("duplicate generator name")
        self.expect("|", "'|' between generators and relators")
        alphabet = Alphabet(names)
        relators: list[Word] = []
        if self.cur.text not in (">", ""):
            relators.append(self._parse_relitem(alphabet))
            while self.cur.text == ",":
                self.advance()
                relators.append(self._parse_relitem(alphabet))
        if self.cur.text != ">":
            self.fail("unbalanced brackets: expected '>'")
        self.advance()
        if self.cur.kind != "eof":
            self.fail("trailing input after '>'")
        return Presentation(alphabet, tuple(relators))

    def _parse_relitem(self, alphabet: Alphabet) -> Word:
        lhs = self.parse_word(alphabet)
        if self.cur.text == "=":
            self.advance()
            rhs = self.parse_word(alphabet)
            # u = v is stored as the relator u·v^-1, unreduced.
            return Word(alphabet, lhs.syllables + rhs.invert().syllables)
        return lhs


def parse_presentation(text: str) -> Presentation:
    return _Parser(text).parse_presentation()


def parse_word(text: str, alphabet: Alphabet) -> Word:
    """Parse a word and freely reduce it."""
    parser = _Parser(text)
    word = parser.parse_word(alphabet)
    if parser.cur.kind != "eof":
        parser.fail("trailing input after word")
    return word.free_reduce()


def render_word(w: Word) -> str:
    return str(w)


def render(p: Presentation) -> str:
    """Canonical text; relators are freely reduced and empty ones dropped."""
    gens = ", ".join(p.alphabet.names)
    reduced = [r.free_reduce() for r in p.relators]
    rels = ", ".join(str(r) for r in reduced if r)
    if gens:
        return f"< {gens} | {rels} >" if rels else f"< {gens} | >"
    return f"< | {rels} >" if rels else "< | >"


# -- canonical JSON ------------------------------------------------------


def word_to_json(w: Word) -> list[list[Any]]:
    return [[w.alphabet.names[g], e] for g, e in w.syllables]


def word_from_json(data: Any, alphabet: Alphabet) -> Word:
    """Accept either dsl text or a [[name, exponent], ...] syllable list."""
    if isinstance(data, str):
        return parse_word(data, alphabet)
    try:
        pairs = [(str(name), int(exp)) for name, exp in data]
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad word JSON {data!r}") from exc
    for name, _ in pairs:
        if name not in alphabet:
            raise UnknownGenerator(f"unknown generator {name!r}")
    return Word.build(alphabet, *pairs)


def presentation_to_json(p: Presentation) -> dict[str, Any]:
    return {
        "generators": list(p.alphabet.names),
        "relators": [word_to_json(r) for r in p.relators],
    }


def presentation_from_json(data: Any) -> Presentation:
    """Accept the canonical dict form or a dsl text string."""
    if isinstance(data, str):
        return parse_presentation(data)
    alphabet = Alphabet(str(n) for n in data["generators"])
    relators = tuple(word_from_json(r, alphabet) for r in data.get("relators", []))
    return Presentation(alphabet, relators)
