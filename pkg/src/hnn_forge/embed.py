"""Two-generator embeddings and the truncated undecidability family.

The centerpiece is the explicit embedding of any finite presentation
into a two-generator group: generator i maps to the {a,b}-word

    a^-1 b^-1 a b^-i a b^-1 a^-1 b^i a^-1 b a b^-i a b a^-1 b^i

and every relator is rewritten by formal substitution, so the relator
count is preserved exactly.  The intermediate tower K, P, Q, H of the
construction is materialized as presentations.

The Hall semigroup embedding g_i -> b a b a^(i+2) b a a b is paired
with a Sardinas-Patterson decoder to witness injectivity at desk
scale, and the four-generator family with relators
b^-f(n)·a·b^f(n) = d^-f(n)·c·d^f(n) is truncated at a finite N, with
membership queries answered through the amalgam normal form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

from . import dsl
from .amalgam import AmalgamData, amalgam_presentation, is_trivial_amalgam
from .dsl import Presentation
from .errors import InvalidIndex, OracleFailure, OutOfTruncationRange
from .hnn import HnnData, IsoData, MultiHnnData, hnn_presentation, multi_hnn_presentation
from .oracles import FreeStallingsOracle
from .words import Alphabet, Word

__all__ = [
    "EmbedResult",
    "HigmanFamily",
    "hnn_generator_word",
    "embed_two_generators",
    "build_tower",
    "hall_semigroup_word",
    "is_uniquely_decodable",
    "higman_presentation",
    "higman_query",
    "BUILTIN_F_FORMULAS",
]

TARGET_ALPHABET = Alphabet(["a", "b"])


def hnn_generator_word(i: int) -> Word:
    """The image of the i-th generator in the two-generator group.

    Emitted in reduced form with 12 + 4i letters; the a-letters and
    b-runs strictly alternate, so no free cancellation is possible.
    """
    if i < 1:
        raise InvalidIndex(f"generator index must be >= 1, got {i}")
    return Word.build(
        TARGET_ALPHABET,
        ("a", -1), ("b", -1), ("a", 1), ("b", -i),
        ("a", 1), ("b", -1), ("a", -1), ("b", i),
        ("a", -1), ("b", 1), ("a", 1), ("b", -i),
        ("a", 1), ("b", 1), ("a", -1), ("b", i),
    )


@dataclass(frozen=True)
class EmbedResult:
    """Two-generator target with the generator images and the proof tower."""

    target: Presentation
    images: dict[str, Word]
    tower: tuple[Presentation, Presentation, Presentation, Presentation]  # K, P, Q, H

    def to_json(self) -> dict[str, Any]:
        k, p, q, h = self.tower
        return {
            "target": dsl.presentation_to_json(self.target),
            "images": {name: dsl.word_to_json(w) for name, w in self.images.items()},
            "tower": {
                "K": dsl.presentation_to_json(k),
                "P": dsl.presentation_to_json(p),
                "Q": dsl.presentation_to_json(q),
                "H": dsl.presentation_to_json(h),
            },
        }


def embed_two_generators(src: Presentation) -> EmbedResult:
    """Rewrite every relator over {a, b}; relator count is preserved."""
    images = {
        name: hnn_generator_word(i + 1) for i, name in enumerate(src.alphabet.names)
    }
    relators = tuple(
        r.substitute(images, target=TARGET_ALPHABET) for r in src.relators
    )
    target = Presentation(TARGET_ALPHABET, relators)
    return EmbedResult(target, images, build_tower(src))


def _fresh_names(taken: set[str], wanted: Sequence[str]) -> list[str]:
    out = []
    for name in wanted:
        candidate = name
        n = 2
        while candidate in taken:
            candidate = f"{name}{n}"
            n += 1
        taken.add(candidate)
        out.append(candidate)
    return out


def build_tower(src: Presentation) -> tuple[Presentation, Presentation, Presentation, Presentation]:
    """The four stages K = G∗⟨u⟩, P (stable letters t_i conjugating u to
    g_i·u), Q (amalgamating ⟨t_1..t_k⟩ with ⟨b^-i·v·b^i⟩ < F(b,v)) and
    H (stable letter a with b -> u, v -> b)."""
    gens = src.alphabet.names
    k = len(gens)
    taken = set(gens)
    (u_name,) = _fresh_names(taken, ["u"])
    t_names = _fresh_names(taken, [f"t{i + 1}" for i in range(k)])
    b_name, v_name = _fresh_names(taken, ["b", "v"])
    a_name = _fresh_names(taken, ["a"])[0]

    k_alphabet = src.alphabet.extend([u_name])
    K = Presentation(k_alphabet, tuple(r.translate(k_alphabet) for r in src.relators))

    u = Word.build(k_alphabet, (u_name, 1))
    family = []
    for i, g in enumerate(gens):
        gu = Word.build(k_alphabet, (g, 1), (u_name, 1))
        iso = IsoData(
            FreeStallingsOracle([u], k_alphabet),
            FreeStallingsOracle([gu], k_alphabet),
            [gu],
            [u],
        )
        family.append((t_names[i], iso))
    P = multi_hnn_presentation(MultiHnnData(K, tuple(family)))

    f_alphabet = Alphabet([b_name, v_name])
    F1 = Presentation(f_alphabet)
    b = Word.build(f_alphabet, (b_name, 1))
    v = Word.build(f_alphabet, (v_name, 1))
    s_words = [(b ** -i) * v * (b ** i) for i in range(1, k + 1)]
    t_words = [Word.build(P.alphabet, (t, 1)) for t in t_names]
    q_iso = IsoData(
        FreeStallingsOracle(t_words, P.alphabet) if t_words else FreeStallingsOracle([], P.alphabet),
        FreeStallingsOracle(s_words, f_alphabet) if s_words else FreeStallingsOracle([], f_alphabet),
        s_words,
        t_words,
    )
    q_data = AmalgamData(P, F1, q_iso)
    from .amalgam import amalgam_presentation

    Q = amalgam_presentation(q_data)

    b_q = Word.build(Q.alphabet, (b_name, 1))
    v_q = Word.build(Q.alphabet, (v_name, 1))
    u_q = Word.build(Q.alphabet, (u_name, 1))
    h_iso = IsoData(
        FreeStallingsOracle([b_q, v_q], Q.alphabet),
        FreeStallingsOracle([u_q, b_q], Q.alphabet),
        [u_q, b_q],
        [b_q, v_q],
    )
    H = hnn_presentation(HnnData(Q, a_name, h_iso))
    return K, P, Q, H


# -- Hall's semigroup embedding -----------------------------------------


def hall_semigroup_word(i: int) -> Word:
    """b a b a^(i+2) b a a b, a positive word of length i + 9."""
    if i < 1:
        raise InvalidIndex(f"index must be >= 1, got {i}")
    return Word.build(
        TARGET_ALPHABET,
        ("b", 1), ("a", 1), ("b", 1), ("a", i + 2), ("b", 1), ("a", 2), ("b", 1),
    )


def is_uniquely_decodable(words: Sequence[Word]) -> bool:
    """Sardinas-Patterson: no concatenation of codewords is ambiguous."""
    if not words:
        raise ValueError("empty code")
    codewords: list[tuple[int, ...]] = []
    for w in words:
        if any(e < 0 for _, e in w.syllables):
            raise ValueError(f"{w} is not a positive word")
        codewords.append(tuple(g for g, _ in w.letters()))
    if len(set(codewords)) != len(codewords):
        return False
    code = set(codewords)

    dangling: set[tuple[int, ...]] = set()
    work: list[tuple[int, ...]] = []
    for c1 in code:
        for c2 in code:
            if c1 != c2 and len(c1) < len(c2) and c2[: len(c1)] == c1:
                s = c2[len(c1):]
                if s not in dangling:
                    dangling.add(s)
                    work.append(s)
    while work:
        d = work.pop()
        for c in code:
            if c == d:
                return False
            s = None
            if len(c) > len(d) and c[: len(d)] == d:
                s = c[len(d):]
            elif len(d) > len(c) and d[: len(c)] == c:
                s = d[len(c):]
            if s is not None and s not in dangling:
                dangling.add(s)
                work.append(s)
    return True


# -- the truncated Higman family ----------------------------------------

BUILTIN_F_FORMULAS: dict[str, Callable[[int], int]] = {
    "n^2": lambda n: n * n,
    "2n": lambda n: 2 * n,
    "n^3 mod 17": lambda n: (n ** 3) % 17,
}

HIGMAN_ALPHABET = Alphabet(["a", "b", "c", "d"])


@dataclass(frozen=True)
class HigmanFamily:
    """The four-generator family truncated at N, with its amalgam model.

    The amalgamated subgroup is freely generated by the conjugates
    b^-m·a·b^m for the distinct values m of f on 0..N; queries are only
    valid for m up to the largest tabulated value.
    """

    f_table: tuple[tuple[int, int], ...]
    presentation: Presentation
    amalgam: AmalgamData

    def max_value(self) -> int:
        return max(v for _, v in self.f_table)

    def values(self) -> set[int]:
        return {v for _, v in self.f_table}


def _conjugate_word(alphabet: Alphabet, inner: str, outer: str, m: int) -> Word:
    if m == 0:
        return Word.build(alphabet, (inner, 1))
    return Word.build(alphabet, (outer, -m), (inner, 1), (outer, m))


def higman_presentation(
    f_table: Sequence[int] | Mapping[int, int] | Callable[[int], int],
    N: int,
) -> HigmanFamily:
    """Relators b^-f(n)·a·b^f(n)·d^-f(n)·c^-1·d^f(n) for n = 0..N.

    Repeated f-values contribute one amalgamated-subgroup basis element
    (deduplication); values must be non-negative.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    if callable(f_table):
        values = [int(f_table(n)) for n in range(N + 1)]
    elif isinstance(f_table, Mapping):
        values = [int(f_table[n]) for n in range(N + 1)]
    else:
        values = [int(x) for x in f_table[: N + 1]]
        if len(values) != N + 1:
            raise ValueError(f"table must cover 0..{N}")
    if any(v < 0 for v in values):
        raise ValueError("f values must be non-negative")

    relators = []
    for v in values:
        left = _conjugate_word(HIGMAN_ALPHABET, "a", "b", v)
        right = _conjugate_word(HIGMAN_ALPHABET, "c", "d", v)
        relators.append(Word(HIGMAN_ALPHABET, left.syllables + right.invert().syllables))
    presentation = Presentation(HIGMAN_ALPHABET, tuple(relators))

    left_alphabet = Alphabet(["a", "b"])
    right_alphabet = Alphabet(["c", "d"])
    ms = sorted(set(values))
    left_gens = [_conjugate_word(left_alphabet, "a", "b", m) for m in ms]
    right_gens = [_conjugate_word(right_alphabet, "c", "d", m) for m in ms]
    domain = FreeStallingsOracle(left_gens, left_alphabet)
    codomain = FreeStallingsOracle(right_gens, right_alphabet)
    if list(domain.basis) != left_gens or list(codomain.basis) != right_gens:
        raise OracleFailure("conjugate generators did not fold to themselves")
    amalgam = AmalgamData(
        Presentation(left_alphabet),
        Presentation(right_alphabet),
        IsoData(domain, codomain, right_gens, left_gens),
    )
    return HigmanFamily(tuple(enumerate(values)), presentation, amalgam)


def higman_query(fam: HigmanFamily, m: int) -> bool:
    """Does b^-m·a·b^m = d^-m·c·d^m hold in the truncated group?

    True exactly when m is in the range of the tabulated f.  Queries
    beyond the largest tabulated value would silently disagree with the
    untruncated group, so they fail loudly instead.
    """
    if m < 0:
        raise InvalidIndex("m must be non-negative")
    if m > fam.max_value():
        raise OutOfTruncationRange(
            f"query {m} exceeds the truncation's largest f-value {fam.max_value()}"
        )
    union = fam.amalgam.union_alphabet()
    left = _conjugate_word(union, "a", "b", m)
    right = _conjugate_word(union, "c", "d", m)
    w = Word(union, left.syllables + right.invert().syllables)
    return is_trivial_amalgam(fam.amalgam, w)
