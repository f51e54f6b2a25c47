"""Amalgamated free products: presentation and alternating normal form.

An element is written as prefix · x_1 ⋯ x_n where the prefix lies in
the amalgamated subgroup (recorded in its basis letters) and the x_i
are shortlex-minimal right-coset representatives drawn alternately
from the two factors, none of them in the amalgamated subgroup.  A
word is trivial exactly when it normalizes to an empty prefix with no
factors.  Factors must be free (Stallings coset machinery) or finite
(tables); a leading factor that lies in the subgroup is absorbed into
the prefix, which makes the form unique.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from . import dsl
from .dsl import Presentation
from .errors import AlphabetCollision, OracleFailure, UnsupportedFactorClass
from .hnn import IsoData
from .oracles import (
    FiniteGroupTable,
    FiniteSubsetOracle,
    FreeStallingsOracle,
    SubgroupOracle,
)
from .words import Alphabet, Word

__all__ = [
    "AmalgamData",
    "NormalForm",
    "amalgam_presentation",
    "normal_form",
    "is_trivial_amalgam",
    "amalgam_data_from_json",
    "amalgam_data_to_json",
]


@dataclass(frozen=True)
class AmalgamData:
    """Factors V0 (left), V1 (right) and the subgroup identification.

    iso.domain is the amalgamated subgroup inside the left factor,
    iso.codomain its image inside the right factor.
    """

    left: Presentation
    right: Presentation
    iso: IsoData

    def __post_init__(self) -> None:
        shared = set(self.left.alphabet.names) & set(self.right.alphabet.names)
        if shared:
            raise AlphabetCollision(f"factor alphabets share names {sorted(shared)}")
        if self.iso.domain.alphabet != self.left.alphabet:
            raise OracleFailure("domain oracle must live over the left alphabet")
        if self.iso.codomain.alphabet != self.right.alphabet:
            raise OracleFailure("codomain oracle must live over the right alphabet")

    def union_alphabet(self) -> Alphabet:
        return Alphabet(self.left.alphabet.names + self.right.alphabet.names)


@dataclass(frozen=True)
class NormalForm:
    """prefix · factors, prefix over the amalgamated subgroup's basis letters."""

    prefix: Word
    factors: tuple[tuple[str, Word], ...]  # ("L" | "R", coset representative)

    def is_trivial(self) -> bool:
        return not self.prefix and not self.factors

    def factor_count(self) -> int:
        return len(self.factors)

    def to_json(self) -> dict[str, Any]:
        return {
            "prefix": dsl.word_to_json(self.prefix),
            "factors": [
                {"side": side, "word": dsl.word_to_json(w)} for side, w in self.factors
            ],
        }


def amalgam_presentation(d: AmalgamData) -> Presentation:
    """Union of the factor presentations plus u_i = φ(u_i) identifications."""
    union = d.union_alphabet()
    relators = [r.translate(union) for r in d.left.relators]
    relators += [r.translate(union) for r in d.right.relators]
    for u, fu in zip(d.iso.domain.basis, d.iso.forward):
        relators.append(
            Word(union, u.translate(union).syllables + fu.translate(union).invert().syllables)
        )
    return Presentation(union, tuple(relators))


class _Side:
    """One factor with its membership, coset and coordinate machinery."""

    def __init__(self, data: AmalgamData, tag: str):
        self.tag = tag
        if tag == "L":
            self.alphabet = data.left.alphabet
            self.presentation = data.left
        else:
            self.alphabet = data.right.alphabet
            self.presentation = data.right
        self.oracle: SubgroupOracle = data.iso.domain if tag == "L" else data.iso.codomain
        if not isinstance(self.oracle, (FreeStallingsOracle, FiniteSubsetOracle)):
            raise UnsupportedFactorClass(
                f"unsupported oracle class {type(self.oracle).__name__}"
            )
        if isinstance(self.oracle, FreeStallingsOracle) and not self.presentation.is_free():
            raise UnsupportedFactorClass(
                "free-side machinery needs a relator-free factor presentation"
            )
        self._iso = data.iso
        self._domain = data.iso.domain

    def to_coords(self, w: Word) -> Word:
        """Canonical coordinates (domain basis letters) of a subgroup member."""
        if self.tag == "L":
            return self._domain.rewrite_in_basis(w)
        via_left = self._iso.apply_backward(w)
        return self._domain.rewrite_in_basis(via_left)

    def from_coords(self, coords: Word) -> Word:
        """Realize subgroup coordinates as a word in this factor."""
        if self.tag == "L":
            images = dict(zip(self._domain.basis_alphabet.names, self._domain.basis))
        else:
            images = dict(zip(self._domain.basis_alphabet.names, self._iso.forward))
        return coords.substitute(images, target=self.alphabet)


def normal_form(d: AmalgamData, w: Word) -> NormalForm:
    """Normalize a word over the union alphabet, processing right to left."""
    union = d.union_alphabet()
    if w.alphabet != union:
        raise OracleFailure("word must be over the amalgam's union alphabet")
    left = _Side(d, "L")
    right = _Side(d, "R")
    n_left = len(d.left.alphabet)

    prefix = Word.identity(d.iso.domain.basis_alphabet)
    factors: list[tuple[str, Word]] = []
    for g, e in reversed(w.free_reduce().syllables):
        if g < n_left:
            side = left
            syl = Word(d.left.alphabet, ((g, e),))
        else:
            side = right
            syl = Word(d.right.alphabet, ((g - n_left, e),))
        y = syl.multiply(side.from_coords(prefix)) if prefix else syl
        if factors and factors[0][0] == side.tag:
            y = y.multiply(factors[0][1])
            factors.pop(0)
        if side.oracle.contains(y):
            prefix = side.to_coords(y)
        else:
            rep = side.oracle.right_coset_rep(y)
            u = y.multiply(rep.invert())
            prefix = side.to_coords(u)
            factors.insert(0, (side.tag, rep))
    return NormalForm(prefix, tuple(factors))


def is_trivial_amalgam(d: AmalgamData, w: Word) -> bool:
    """w = 1 in the amalgam iff its normal form has no factors and empty prefix."""
    return normal_form(d, w).is_trivial()


# -- CLI-facing JSON ----------------------------------------------------


def amalgam_data_from_json(data: dict[str, Any]) -> AmalgamData:
    left = dsl.presentation_from_json(data["left"])
    right = dsl.presentation_from_json(data["right"])

    def oracle(side: Presentation, words_key: str, table_key: str) -> SubgroupOracle:
        words = [dsl.word_from_json(w, side.alphabet) for w in data[words_key]]
        if data.get(table_key) is not None:
            table = FiniteGroupTable.from_json(data[table_key])
            return FiniteSubsetOracle(table, words, side.alphabet)
        return FreeStallingsOracle(words, side.alphabet)

    domain = oracle(left, "domain", "left_table")
    codomain = oracle(right, "codomain", "right_table")
    forward = [dsl.word_from_json(w, right.alphabet) for w in data["forward"]]
    backward = [dsl.word_from_json(w, left.alphabet) for w in data["backward"]]
    return AmalgamData(left, right, IsoData(domain, codomain, forward, backward))


def amalgam_data_to_json(d: AmalgamData) -> dict[str, Any]:
    out: dict[str, Any] = {
        "left": dsl.presentation_to_json(d.left),
        "right": dsl.presentation_to_json(d.right),
        "domain": [dsl.word_to_json(w) for w in d.iso.domain.basis],
        "codomain": [dsl.word_to_json(w) for w in d.iso.codomain.basis],
        "forward": [dsl.word_to_json(w) for w in d.iso.forward],
        "backward": [dsl.word_to_json(w) for w in d.iso.backward],
    }
    if isinstance(d.iso.domain, FiniteSubsetOracle):
        out["left_table"] = d.iso.domain.table.to_json()
    if isinstance(d.iso.codomain, FiniteSubsetOracle):
        out["right_table"] = d.iso.codomain.table.to_json()
    return out
