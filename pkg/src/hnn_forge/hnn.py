"""HNN extensions and Britton reduction.

The convention is fixed once: ``t^-1 a t = φ(a)`` for ``a`` in the
domain subgroup A.  Thus a subword ``t^-1 u t`` with u in A pinches via
forward images, and ``t u t^-1`` with u in B = φ(A) pinches via
backward images.  Pinch search scans left to right and applies the
first applicable pinch, so reduced outputs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from . import dsl
from .dsl import Presentation
from .errors import (
    InvalidIsoData,
    NotInSubgroup,
    OracleFailure,
    StableLetterClash,
    UnsupportedClass,
)
from .oracles import (
    FiniteGroupTable,
    FiniteSubsetOracle,
    FreeStallingsOracle,
    SubgroupOracle,
)
from .words import Alphabet, Word

__all__ = [
    "IsoData",
    "HnnData",
    "MultiHnnData",
    "hnn_presentation",
    "multi_hnn_presentation",
    "britton_reduce",
    "is_trivial_hnn",
    "theorem_one_witness",
    "TheoremOneWitness",
    "free_word_problem",
    "finite_word_problem",
    "hnn_data_from_json",
    "hnn_data_to_json",
]

WordProblem = Callable[[Word], bool]


def free_word_problem(w: Word) -> bool:
    """Triviality in a free group: freely reduces to the empty word."""
    return not w.free_reduce()


def finite_word_problem(table: FiniteGroupTable) -> WordProblem:
    """Triviality through a finite multiplication table."""

    def wp(w: Word) -> bool:
        return table.evaluate(w) == table.identity

    return wp


class IsoData:
    """An isomorphism between two subgroups, given on oracle bases.

    ``forward[i]`` is the image of the i-th domain basis element, as a
    word over the codomain's ambient alphabet; ``backward[j]`` the image
    of the j-th codomain basis element.  The round trip is verified at
    construction so inconsistent data fails fast.
    """

    __slots__ = ("domain", "codomain", "forward", "backward")

    def __init__(
        self,
        domain: SubgroupOracle,
        codomain: SubgroupOracle,
        forward: Sequence[Word],
        backward: Sequence[Word],
    ):
        self.domain = domain
        self.codomain = codomain
        self.forward = tuple(forward)
        self.backward = tuple(backward)
        self._verify()

    def _verify(self) -> None:
        if len(self.forward) != len(self.domain.basis):
            raise InvalidIsoData(
                f"{len(self.forward)} forward images for "
                f"{len(self.domain.basis)} domain basis elements"
            )
        if len(self.backward) != len(self.codomain.basis):
            raise InvalidIsoData(
                f"{len(self.backward)} backward images for "
                f"{len(self.codomain.basis)} codomain basis elements"
            )
        for w in self.forward:
            if not self.codomain.contains(w):
                raise InvalidIsoData(f"forward image {w} is not in the codomain")
        for w in self.backward:
            if not self.domain.contains(w):
                raise InvalidIsoData(f"backward image {w} is not in the domain")
        for i, a in enumerate(self.domain.basis):
            if not self.domain.same_element(self.apply_backward(self.forward[i]), a):
                raise InvalidIsoData(f"backward∘forward does not fix basis element {a}")
        for j, b in enumerate(self.codomain.basis):
            if not self.codomain.same_element(self.apply_forward(self.backward[j]), b):
                raise InvalidIsoData(f"forward∘backward does not fix basis element {b}")

    def apply_forward(self, w: Word) -> Word:
        """Image of a domain-subgroup member under the isomorphism."""
        coords = self.domain.rewrite_in_basis(w)
        images = {
            self.domain.basis_alphabet.names[i]: self.forward[i]
            for i in range(len(self.forward))
        }
        return coords.substitute(images, target=self.codomain.alphabet)

    def apply_backward(self, w: Word) -> Word:
        coords = self.codomain.rewrite_in_basis(w)
        images = {
            self.codomain.basis_alphabet.names[j]: self.backward[j]
            for j in range(len(self.backward))
        }
        return coords.substitute(images, target=self.domain.alphabet)

    def with_alphabet(self, alphabet: Alphabet) -> "IsoData":
        return IsoData(
            self.domain.with_alphabet(alphabet),
            self.codomain.with_alphabet(alphabet),
            tuple(w.translate(alphabet) for w in self.forward),
            tuple(w.translate(alphabet) for w in self.backward),
        )


@dataclass(frozen=True)
class HnnData:
    """Base presentation G, fresh stable letter t, and iso φ: A → B."""

    base: Presentation
    stable: str
    iso: IsoData

    def __post_init__(self) -> None:
        if self.stable in self.base.alphabet:
            raise StableLetterClash(f"stable letter {self.stable!r} is a base generator")
        if (
            self.iso.domain.alphabet != self.base.alphabet
            or self.iso.codomain.alphabet != self.base.alphabet
        ):
            raise OracleFailure("oracle alphabets must equal the base alphabet")

    def extended_alphabet(self) -> Alphabet:
        return self.base.alphabet.extend([self.stable])


@dataclass(frozen=True)
class MultiHnnData:
    """A finite family of simultaneous HNN extensions of one base."""

    base: Presentation
    family: tuple[tuple[str, IsoData], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        names = [stable for stable, _ in self.family]
        if len(set(names)) != len(names):
            raise StableLetterClash("stable letters must be pairwise distinct")
        for stable, iso in self.family:
            if stable in self.base.alphabet:
                raise StableLetterClash(
                    f"stable letter {stable!r} is a base generator"
                )
            if (
                iso.domain.alphabet != self.base.alphabet
                or iso.codomain.alphabet != self.base.alphabet
            ):
                raise OracleFailure("oracle alphabets must equal the base alphabet")

    def extended_alphabet(self) -> Alphabet:
        return self.base.alphabet.extend(stable for stable, _ in self.family)


def _stable_relators(
    ext: Alphabet, t_index: int, iso: IsoData
) -> list[Word]:
    """One relator t^-1·a_i·t·φ(a_i)^-1 per domain basis element."""
    out = []
    for a, fa in zip(iso.domain.basis, iso.forward):
        syllables = (
            ((t_index, -1),)
            + a.translate(ext).syllables
            + ((t_index, 1),)
            + fa.translate(ext).invert().syllables
        )
        out.append(Word(ext, syllables))
    return out


def hnn_presentation(d: HnnData) -> Presentation:
    """Defining relations of the extension: those of G plus t^-1·a·t = φ(a)."""
    ext = d.extended_alphabet()
    t_index = ext.index(d.stable)
    relators = [r.translate(ext) for r in d.base.relators]
    relators.extend(_stable_relators(ext, t_index, d.iso))
    return Presentation(ext, tuple(relators))


def multi_hnn_presentation(d: MultiHnnData) -> Presentation:
    """Simultaneous extension; equals iterating hnn_presentation in family order."""
    ext = d.extended_alphabet()
    relators = [r.translate(ext) for r in d.base.relators]
    for stable, iso in d.family:
        relators.extend(_stable_relators(ext, ext.index(stable), iso))
    return Presentation(ext, tuple(relators))


# -- Britton reduction -------------------------------------------------


def _find_pinch(
    syllables: list[tuple[int, int]], t_index: int, iso: IsoData, base_alphabet: Alphabet
) -> tuple[int, int, Word] | None:
    """Leftmost pinch in a freely reduced syllable list.

    Returns (position of left t-syllable, position of right t-syllable,
    replacement word over the base alphabet), or None if pinch-free.
    """
    t_positions = [i for i, (g, _) in enumerate(syllables) if g == t_index]
    for p1, p2 in zip(t_positions, t_positions[1:]):
        e1 = syllables[p1][1]
        e2 = syllables[p2][1]
        u = Word(base_alphabet, syllables[p1 + 1 : p2])
        if e1 < 0 < e2:
            if iso.domain.contains(u):
                return p1, p2, iso.apply_forward(u)
        elif e1 > 0 > e2:
            if iso.codomain.contains(u):
                return p1, p2, iso.apply_backward(u)
    return None


def britton_reduce(d: HnnData, w: Word) -> Word:
    """Remove pinches until none remain; equal to w in the extension.

    Each pinch t^∓1·u·t^±1 is replaced by the image of u, removing one
    t and one t^-1, so the stable-letter exponent sum is preserved and
    the loop terminates after at most (t-count)/2 pinches.
    """
    ext = d.extended_alphabet()
    if w.alphabet == d.base.alphabet:
        w = w.translate(ext)
    elif w.alphabet != ext:
        raise OracleFailure("word must be over the base or extended alphabet")
    t_index = ext.index(d.stable)
    syllables = list(w.free_reduce().syllables)
    while True:
        hit = _find_pinch(syllables, t_index, d.iso, d.base.alphabet)
        if hit is None:
            return Word(ext, syllables)
        p1, p2, image = hit
        g1, e1 = syllables[p1]
        g2, e2 = syllables[p2]
        new_mid: list[tuple[int, int]] = []
        if e1 + (1 if e1 < 0 else -1) != 0:
            new_mid.append((g1, e1 + (1 if e1 < 0 else -1)))
        new_mid.extend(image.translate(ext).syllables)
        if e2 + (-1 if e2 > 0 else 1) != 0:
            new_mid.append((g2, e2 + (-1 if e2 > 0 else 1)))
        merged = Word(ext, tuple(syllables[:p1]) + tuple(new_mid) + tuple(syllables[p2 + 1 :]))
        syllables = list(merged.free_reduce().syllables)


def is_trivial_hnn(
    d: HnnData, w: Word, base_wp: WordProblem | None = None
) -> bool:
    """Decide w = 1 in the extension, given a word problem for the base.

    By Britton's Lemma a pinch-free word that still contains the stable
    letter is non-trivial; otherwise triviality is delegated to the
    base-group oracle (free reduction for free bases by default).
    """
    ext = d.extended_alphabet()
    t_index = ext.index(d.stable)
    reduced = britton_reduce(d, w)
    if any(g == t_index for g, _ in reduced.syllables):
        return False
    base_word = Word(d.base.alphabet, reduced.syllables)
    if base_wp is None:
        if not d.base.is_free():
            raise UnsupportedClass(
                "base group has relators; supply an explicit word problem oracle"
            )
        return free_word_problem(base_word)
    return base_wp(base_word)


# -- the amalgam witness from the original existence proof -------------


@dataclass(frozen=True)
class TheoremOneWitness:
    """K ∗_{U=V} L with t = u·v, realizing the extension inside an amalgam."""

    amalgam: Any  # AmalgamData; typed loosely to avoid an import cycle
    generator_images: dict[str, Word]
    stable_image: Word


def theorem_one_witness(d: HnnData) -> TheoremOneWitness:
    """Build K = G∗⟨u⟩ and L = G∗⟨v⟩ amalgamated over U = ⟨G, u^-1Au⟩
    and V = ⟨G, vBv^-1⟩, with the identification fixing G and sending
    u^-1·a·u to v·φ(a)·v^-1.  The stable letter embeds as t = u·v.

    Supported for free base groups (the oracle classes cannot express
    ⟨G, u^-1Au⟩ otherwise).
    """
    from .amalgam import AmalgamData  # local import; amalgam depends on hnn

    if not d.base.is_free():
        raise UnsupportedClass("the amalgam witness needs a free base group")
    if not isinstance(d.iso.domain, FreeStallingsOracle) or not isinstance(
        d.iso.codomain, FreeStallingsOracle
    ):
        raise UnsupportedClass("the amalgam witness needs Stallings oracles")
    base_names = d.base.alphabet.names
    for fresh in ("u", "v"):
        if fresh in base_names:
            raise StableLetterClash(f"generator {fresh!r} clashes with the fresh letter")
    rename = {name: f"{name}_r" for name in base_names}
    right_names = tuple(rename[n] for n in base_names) + ("v",)
    if len(set(right_names)) != len(right_names) or "v" in rename.values():
        raise StableLetterClash("renamed right-copy generators collide")

    left_alphabet = Alphabet(base_names + ("u",))
    right_alphabet = Alphabet(right_names)
    left = Presentation(left_alphabet)
    right = Presentation(right_alphabet)

    u_word = Word.build(left_alphabet, ("u", 1))
    v_word = Word.build(right_alphabet, ("v", 1))

    u_gens = [Word.build(left_alphabet, (n, 1)) for n in base_names]
    u_gens += [
        u_word.invert() * a.translate(left_alphabet) * u_word
        for a in d.iso.domain.basis
    ]
    v_gens = [Word.build(right_alphabet, (rename[n], 1)) for n in base_names]
    v_gens += [
        v_word * fa.translate(right_alphabet, rename) * v_word.invert()
        for fa in d.iso.forward
    ]
    image_of = {
        u_gens[k].free_reduce(): v_gens[k].free_reduce() for k in range(len(u_gens))
    }

    domain = FreeStallingsOracle(u_gens, left_alphabet)
    codomain = FreeStallingsOracle(v_gens, right_alphabet)
    try:
        forward = [image_of[a] for a in domain.basis]
    except KeyError as exc:
        raise OracleFailure(
            f"computed basis element {exc.args[0]} is not a constructed generator"
        ) from None

    preimage_of = {v: k for k, v in image_of.items()}
    try:
        backward = [preimage_of[b] for b in codomain.basis]
    except KeyError as exc:
        raise OracleFailure(
            f"computed basis element {exc.args[0]} is not a constructed generator"
        ) from None

    amalgam = AmalgamData(left, right, IsoData(domain, codomain, forward, backward))
    union = amalgam.union_alphabet()
    generator_images = {
        name: Word.build(union, (name, 1)) for name in base_names
    }
    stable_image = Word.build(union, ("u", 1), ("v", 1))
    return TheoremOneWitness(amalgam, generator_images, stable_image)


# -- CLI-facing JSON ----------------------------------------------------


def _oracle_from_words(
    words: list[Word],
    alphabet: Alphabet,
    table: FiniteGroupTable | None,
) -> SubgroupOracle:
    if table is not None:
        return FiniteSubsetOracle(table, words, alphabet)
    return FreeStallingsOracle(words, alphabet)


def hnn_data_from_json(data: dict[str, Any]) -> HnnData:
    base = dsl.presentation_from_json(data["base"])
    table = None
    if data.get("base_table") is not None:
        table = FiniteGroupTable.from_json(data["base_table"])
    alphabet = base.alphabet
    domain_words = [dsl.word_from_json(w, alphabet) for w in data["domain"]]
    codomain_words = [dsl.word_from_json(w, alphabet) for w in data["codomain"]]
    domain = _oracle_from_words(domain_words, alphabet, table)
    codomain = _oracle_from_words(codomain_words, alphabet, table)
    forward = [dsl.word_from_json(w, alphabet) for w in data["forward"]]
    backward = [dsl.word_from_json(w, alphabet) for w in data["backward"]]
    return HnnData(base, str(data["stable"]), IsoData(domain, codomain, forward, backward))


def hnn_data_to_json(d: HnnData) -> dict[str, Any]:
    return {
        "base": dsl.presentation_to_json(d.base),
        "stable": d.stable,
        "domain": [dsl.word_to_json(w) for w in d.iso.domain.basis],
        "codomain": [dsl.word_to_json(w) for w in d.iso.codomain.basis],
        "forward": [dsl.word_to_json(w) for w in d.iso.forward],
        "backward": [dsl.word_to_json(w) for w in d.iso.backward],
    }
