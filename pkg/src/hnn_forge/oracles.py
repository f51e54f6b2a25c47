"""Subgroup membership and rewriting oracles.

Two realizations of the same interface:

* ``FreeStallingsOracle`` — a folded Stallings automaton for a finitely
  generated subgroup of a free group.  Reduced loops at the base state
  are exactly the subgroup elements.
* ``FiniteSubsetOracle`` — a subgroup of a finite group given by a
  multiplication table.

Both expose ``contains``, ``rewrite_in_basis`` and ``basis`` uniformly,
plus the coset machinery (canonical right-coset representatives, left
transversals) used by amalgam normal forms and Bass-Serre ball
expansion.

Letters are encoded as ints: ``2*g`` for generator ``g``, ``2*g + 1``
for its inverse; ``code ^ 1`` inverts.  Shortlex order on words is
(length, letter codes).
"""

from __future__ import annotations

from collections import deque
from typing import Any, Iterable, Sequence

from .errors import (
    AlphabetMismatch,
    InvalidTable,
    MissingImage,
    NotInSubgroup,
    OracleFailure,
    UnsupportedClass,
)
from .words import Alphabet, Word

__all__ = [
    "StallingsAutomaton",
    "build_stallings",
    "FiniteGroupTable",
    "evaluate",
    "cyclic_group_table",
    "SubgroupOracle",
    "FreeStallingsOracle",
    "FiniteSubsetOracle",
    "stallings_to_dot",
]

MAX_TABLE_ORDER = 10_000

Codes = tuple[int, ...]


def word_codes(w: Word) -> Codes:
    return tuple(2 * g + (0 if s > 0 else 1) for g, s in w.letters())


def word_from_codes(alphabet: Alphabet, codes: Iterable[int]) -> Word:
    syllables: list[tuple[int, int]] = []
    for c in codes:
        g, e = c >> 1, (1 if c % 2 == 0 else -1)
        if syllables and syllables[-1][0] == g:
            e2 = syllables[-1][1] + e
            if e2 == 0:
                syllables.pop()
            else:
                syllables[-1] = (g, e2)
        else:
            syllables.append((g, e))
    return Word(alphabet, syllables)


def shortlex_key(w: Word) -> tuple[int, Codes]:
    codes = word_codes(w)
    return (len(codes), codes)


# =====================================================================
# Stallings automata
# =====================================================================


class StallingsAutomaton:
    """Folded, connected, inverse-deterministic automaton with a base state.

    States are dense ints renumbered by BFS from the base (state 0),
    exploring letter codes in ascending order, so equal subgroups yield
    byte-identical automata.
    """

    __slots__ = ("alphabet", "transitions", "base", "basis", "paths", "_edge_letter")

    def __init__(self, alphabet: Alphabet, transitions: Sequence[dict[int, int]]):
        self.alphabet = alphabet
        self.transitions = tuple(dict(t) for t in transitions)
        self.base = 0
        self._check_inverse_consistency()
        self.paths, tree_edges = self._spanning_tree()
        self.basis, self._edge_letter = self._compute_basis(tree_edges)

    def _check_inverse_consistency(self) -> None:
        for s, trans in enumerate(self.transitions):
            for code, t in trans.items():
                back = self.transitions[t].get(code ^ 1)
                if back != s:
                    raise OracleFailure(
                        f"inverse-inconsistent transition ({s}, {code}) -> {t}"
                    )

    def _spanning_tree(self) -> tuple[tuple[Codes, ...], set[tuple[int, int]]]:
        # BFS tree from the base; path words are shortlex geodesics.
        n = len(self.transitions)
        paths: list[Codes | None] = [None] * n
        paths[self.base] = ()
        tree_edges: set[tuple[int, int]] = set()  # (state, code) pairs used by the tree
        queue = deque([self.base])
        while queue:
            s = queue.popleft()
            for code in sorted(self.transitions[s]):
                t = self.transitions[s][code]
                if paths[t] is None:
                    paths[t] = paths[s] + (code,)  # type: ignore[operator]
                    tree_edges.add((s, code))
                    tree_edges.add((t, code ^ 1))
                    queue.append(t)
        if any(p is None for p in paths):
            raise OracleFailure("automaton is not connected")
        return tuple(paths), tree_edges  # type: ignore[return-value]

    def _compute_basis(
        self, tree_edges: set[tuple[int, int]]
    ) -> tuple[tuple[Word, ...], dict[tuple[int, int], tuple[int, int]]]:
        # One basis element per non-tree unoriented edge, enumerated at its
        # positively-labeled source; ordered shortlex.
        items: list[tuple[tuple[int, Codes], tuple[int, int], Codes]] = []
        for s, trans in enumerate(self.transitions):
            for code in sorted(trans):
                if code % 2 == 1:
                    continue
                t = trans[code]
                if (s, code) in tree_edges:
                    continue
                codes = self._reduce_codes(
                    self.paths[s] + (code,) + tuple(c ^ 1 for c in reversed(self.paths[t]))
                )
                items.append(((len(codes), codes), (s, code), codes))
        items.sort(key=lambda it: it[0])
        basis = []
        edge_letter: dict[tuple[int, int], tuple[int, int]] = {}
        for k, (_, (s, code), codes) in enumerate(items):
            basis.append(word_from_codes(self.alphabet, codes))
            t = self.transitions[s][code]
            edge_letter[(s, code)] = (k, 1)
            edge_letter[(t, code ^ 1)] = (k, -1)
        return tuple(basis), edge_letter

    @staticmethod
    def _reduce_codes(codes: Iterable[int]) -> Codes:
        out: list[int] = []
        for c in codes:
            if out and out[-1] == (c ^ 1):
                out.pop()
            else:
                out.append(c)
        return tuple(out)

    # -- queries ---------------------------------------------------------

    @property
    def num_states(self) -> int:
        return len(self.transitions)

    def num_edges(self) -> int:
        """Unoriented edge count."""
        return sum(1 for trans in self.transitions for c in trans if c % 2 == 0)

    def rank(self) -> int:
        return self.num_edges() - self.num_states + 1

    def trace_coset(self, w: Word) -> tuple[int, Codes]:
        """Follow the reduced word from the base as far as possible.

        Returns (state reached, unconsumed letter codes).  The pair is a
        complete invariant of the right coset of the subgroup.
        """
        if w.alphabet != self.alphabet:
            raise AlphabetMismatch("word is over a different alphabet")
        codes = word_codes(w.free_reduce())
        s = self.base
        for i, c in enumerate(codes):
            t = self.transitions[s].get(c)
            if t is None:
                return s, codes[i:]
            s = t
        return s, ()

    def accepts(self, w: Word) -> bool:
        state, tail = self.trace_coset(w)
        return state == self.base and not tail

    def is_complete(self) -> bool:
        full = 2 * len(self.alphabet)
        return all(len(t) == full for t in self.transitions)

    def structurally_equal(self, other: "StallingsAutomaton") -> bool:
        return (
            self.alphabet == other.alphabet and self.transitions == other.transitions
        )


def build_stallings(gens: Sequence[Word], alphabet: Alphabet | None = None) -> StallingsAutomaton:
    """Fold a generating set into its canonical Stallings automaton.

    Accepts unreduced words.  An empty generating set (with an explicit
    alphabet) yields the one-state automaton of the trivial subgroup.
    """
    if alphabet is None:
        if not gens:
            raise ValueError("empty generating set needs an explicit alphabet")
        alphabet = gens[0].alphabet
    for g in gens:
        if g.alphabet != alphabet:
            raise AlphabetMismatch("generators over different alphabets")

    # adjacency with multi-edges: state -> code -> list of targets
    adj: list[dict[int, list[int]]] = [{}]
    base = 0

    def new_state() -> int:
        adj.append({})
        return len(adj) - 1

    def add_edge(s: int, code: int, t: int) -> None:
        adj[s].setdefault(code, []).append(t)
        adj[t].setdefault(code ^ 1, []).append(s)

    for g in gens:
        codes = word_codes(g.free_reduce())
        if not codes:
            continue
        s = base
        for c in codes[:-1]:
            t = new_state()
            add_edge(s, c, t)
            s = t
        add_edge(s, codes[-1], base)

    # Fold: merge targets of same-labeled edges until deterministic.
    # Conflicts are resolved through a FIFO queue of scheduled unions.
    parent = list(range(len(adj)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    pairs: deque[tuple[int, int]] = deque()

    def schedule_dedupe(s: int) -> None:
        for code, targets in adj[s].items():
            if len(targets) > 1:
                canon = sorted({find(t) for t in targets})
                for other in canon[1:]:
                    pairs.append((canon[0], other))
                adj[s][code] = [canon[0]]

    for s in range(len(adj)):
        schedule_dedupe(s)
    while pairs:
        x, y = pairs.popleft()
        x, y = find(x), find(y)
        if x == y:
            continue
        if y < x:
            x, y = y, x
        parent[y] = x
        for code, ts in adj[y].items():
            adj[x].setdefault(code, []).extend(ts)
        adj[y] = {}
        schedule_dedupe(x)

    # Compress to canonical BFS numbering from the base.
    root = find(base)
    order: dict[int, int] = {root: 0}
    queue = deque([root])
    seq = [root]
    while queue:
        s = queue.popleft()
        for code in sorted(adj[s]):
            t = find(adj[s][code][0])
            if t not in order:
                order[t] = len(order)
                seq.append(t)
                queue.append(t)
    transitions: list[dict[int, int]] = []
    for s in seq:
        transitions.append({code: order[find(ts[0])] for code, ts in sorted(adj[s].items())})
    return StallingsAutomaton(alphabet, transitions)


def stallings_to_dot(aut: StallingsAutomaton) -> str:
    lines = ["digraph stallings {", '  rankdir=LR;', '  0 [shape=doublecircle];']
    for s, trans in enumerate(aut.transitions):
        for code in sorted(trans):
            if code % 2 == 1:
                continue
            name = aut.alphabet.names[code >> 1]
            lines.append(f'  {s} -> {trans[code]} [label="{name}"];')
    lines.append("}")
    return "\n".join(lines)


# =====================================================================
# Finite group tables
# =====================================================================


class FiniteGroupTable:
    """A finite group as an order x order multiplication table.

    ``product[i][j]`` is the element i*j; generator_images names the
    elements that realize presentation generators.  Identity and
    inverses are derived and the group laws validated (associativity by
    full triple check for order <= 64).
    """

    __slots__ = ("order", "product", "identity", "inverse", "generator_images")

    def __init__(self, product: Sequence[Sequence[int]], generator_images: dict[str, int]):
        order = len(product)
        if order == 0:
            raise InvalidTable("empty table")
        if order > MAX_TABLE_ORDER:
            raise InvalidTable(f"order {order} exceeds the {MAX_TABLE_ORDER} cap")
        self.product = tuple(tuple(int(x) for x in row) for row in product)
        self.order = order
        for row in self.product:
            if len(row) != order or sorted(row) != list(range(order)):
                raise InvalidTable("rows must be permutations of 0..order-1")
        for j in range(order):
            col = sorted(self.product[i][j] for i in range(order))
            if col != list(range(order)):
                raise InvalidTable("columns must be permutations of 0..order-1")
        identity = None
        for e in range(order):
            if all(self.product[e][x] == x for x in range(order)) and all(
                self.product[x][e] == x for x in range(order)
            ):
                identity = e
                break
        if identity is None:
            raise InvalidTable("no identity element")
        self.identity = identity
        inverse = [None] * order
        for x in range(order):
            for y in range(order):
                if self.product[x][y] == identity and self.product[y][x] == identity:
                    inverse[x] = y
                    break
            if inverse[x] is None:
                raise InvalidTable(f"element {x} has no inverse")
        self.inverse = tuple(inverse)  # type: ignore[arg-type]
        if order <= 64:
            p = self.product
            for a in range(order):
                for b in range(order):
                    ab = p[a][b]
                    row_a = p[a]
                    for c in range(order):
                        if p[ab][c] != row_a[p[b][c]]:
                            raise InvalidTable(f"not associative at ({a},{b},{c})")
        for name, img in generator_images.items():
            if not 0 <= img < order:
                raise InvalidTable(f"generator {name!r} image {img} out of range")
        self.generator_images = dict(generator_images)

    def mul(self, x: int, y: int) -> int:
        return self.product[x][y]

    def power(self, x: int, n: int) -> int:
        if n < 0:
            x, n = self.inverse[x], -n
        acc = self.identity
        while n:
            if n & 1:
                acc = self.product[acc][x]
            x = self.product[x][x]
            n >>= 1
        return acc

    def evaluate(self, w: Word) -> int:
        acc = self.identity
        for g, e in w.syllables:
            name = w.alphabet.names[g]
            img = self.generator_images.get(name)
            if img is None:
                raise MissingImage(f"generator {name!r} has no image in the table")
            acc = self.product[acc][self.power(img, e)]
        return acc

    def element_words(
        self, alphabet: Alphabet, names: Sequence[str] | None = None
    ) -> tuple[dict[int, Word], list[int]]:
        """Shortlex-minimal word per element over the given generators.

        Returns (element -> word, elements in discovery order).  Raises
        if the generators do not generate the whole table group.
        """
        moves = []
        for name in names if names is not None else alphabet.names:
            img = self.generator_images.get(name)
            if img is None:
                raise MissingImage(f"generator {name!r} has no image in the table")
            moves.append((alphabet.index(name), 1, img))
            moves.append((alphabet.index(name), -1, self.inverse[img]))
        words: dict[int, Word] = {self.identity: Word.identity(alphabet)}
        seq = [self.identity]
        queue = deque([self.identity])
        while queue:
            x = queue.popleft()
            wx = words[x]
            for g, s, img in moves:
                y = self.product[x][img]
                if y not in words:
                    words[y] = Word(alphabet, wx.syllables + ((g, s),)).free_reduce()
                    seq.append(y)
                    queue.append(y)
        if len(words) != self.order:
            raise InvalidTable("generator images do not generate the table group")
        return words, seq

    def to_json(self) -> dict[str, Any]:
        return {
            "order": self.order,
            "product": [list(row) for row in self.product],
            "generators": dict(self.generator_images),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "FiniteGroupTable":
        product = data["product"]
        if "order" in data and int(data["order"]) != len(product):
            raise InvalidTable("declared order does not match the table size")
        return cls(product, {str(k): int(v) for k, v in data["generators"].items()})


def evaluate(table: FiniteGroupTable, w: Word) -> int:
    return table.evaluate(w)


def cyclic_group_table(n: int, name: str = "x") -> FiniteGroupTable:
    """The cyclic group of order n with one named generator."""
    if n < 1:
        raise ValueError("order must be positive")
    product = [[(i + j) % n for j in range(n)] for i in range(n)]
    return FiniteGroupTable(product, {name: 1 % n})


# =====================================================================
# Subgroup oracles
# =====================================================================


def _basis_alphabet(rank: int) -> Alphabet:
    return Alphabet(f"x{i + 1}" for i in range(rank))


class SubgroupOracle:
    """Uniform interface over the two supported subgroup classes."""

    alphabet: Alphabet
    basis: tuple[Word, ...]
    basis_alphabet: Alphabet

    def contains(self, w: Word) -> bool:
        raise NotImplementedError

    def rewrite_in_basis(self, w: Word) -> Word:
        """Express a member in fresh basis letters x1..xr."""
        raise NotImplementedError

    def expand_basis_word(self, coords: Word) -> Word:
        """Substitute basis words for basis letters (inverse of rewrite)."""
        images = {
            self.basis_alphabet.names[i]: self.basis[i] for i in range(len(self.basis))
        }
        return coords.substitute(images, target=self.alphabet)

    def right_coset_key(self, w: Word) -> Any:
        raise NotImplementedError

    def right_coset_rep(self, w: Word) -> Word:
        """Shortlex-minimal representative of the right coset H·w."""
        raise NotImplementedError

    def left_transversal(self) -> list[Word]:
        """Shortlex-minimal representatives of the left cosets w·H."""
        raise NotImplementedError

    def index(self) -> int | None:
        raise NotImplementedError

    def same_element(self, u: Word, v: Word) -> bool:
        """Equality of u and v as elements of the ambient group."""
        raise NotImplementedError

    def with_alphabet(self, alphabet: Alphabet) -> "SubgroupOracle":
        """The same subgroup viewed over an extended ambient alphabet."""
        raise NotImplementedError

    def _check_alphabet(self, w: Word) -> None:
        if w.alphabet != self.alphabet:
            raise AlphabetMismatch("word is over a different alphabet")


class FreeStallingsOracle(SubgroupOracle):
    """Finitely generated subgroup of a free group, via a folded automaton."""

    def __init__(self, gens: Sequence[Word], alphabet: Alphabet | None = None):
        self.automaton = build_stallings(gens, alphabet)
        self.alphabet = self.automaton.alphabet
        self.basis = self.automaton.basis
        self.basis_alphabet = _basis_alphabet(len(self.basis))

    @classmethod
    def from_automaton(cls, automaton: StallingsAutomaton) -> "FreeStallingsOracle":
        oracle = cls.__new__(cls)
        oracle.automaton = automaton
        oracle.alphabet = automaton.alphabet
        oracle.basis = automaton.basis
        oracle.basis_alphabet = _basis_alphabet(len(automaton.basis))
        return oracle

    def contains(self, w: Word) -> bool:
        self._check_alphabet(w)
        return self.automaton.accepts(w)

    def rewrite_in_basis(self, w: Word) -> Word:
        self._check_alphabet(w)
        aut = self.automaton
        codes = word_codes(w.free_reduce())
        s = aut.base
        letters: list[int] = []
        for c in codes:
            t = aut.transitions[s].get(c)
            if t is None:
                raise NotInSubgroup(f"{w} is not in the subgroup")
            hit = aut._edge_letter.get((s, c))
            if hit is not None:
                k, sign = hit
                letters.append(2 * k + (0 if sign > 0 else 1))
            s = t
        if s != aut.base:
            raise NotInSubgroup(f"{w} is not in the subgroup")
        return word_from_codes(self.basis_alphabet, letters).free_reduce()

    def right_coset_key(self, w: Word) -> Any:
        self._check_alphabet(w)
        return self.automaton.trace_coset(w)

    def right_coset_rep(self, w: Word) -> Word:
        state, tail = self.right_coset_key(w)
        return word_from_codes(self.alphabet, self.automaton.paths[state] + tail)

    def index(self) -> int | None:
        return self.automaton.num_states if self.automaton.is_complete() else None

    def same_element(self, u: Word, v: Word) -> bool:
        return u.free_reduce() == v.free_reduce()

    def with_alphabet(self, alphabet: Alphabet) -> "FreeStallingsOracle":
        return FreeStallingsOracle([b.translate(alphabet) for b in self.basis], alphabet)

    def left_transversal(self) -> list[Word]:
        if not self.automaton.is_complete():
            raise UnsupportedClass(
                "subgroup has infinite index; left transversal is infinite"
            )
        aut = self.automaton
        pending = set(range(aut.num_states))

        def state_of_inverse(codes: Codes) -> int:
            s = aut.base
            for c in reversed(codes):
                s = aut.transitions[s][c ^ 1]
            return s

        reps: list[Word] = []
        level: list[Codes] = [()]
        n_codes = 2 * len(self.alphabet)
        while pending:
            next_level: list[Codes] = []
            for codes in level:
                s = state_of_inverse(codes)
                if s in pending:
                    pending.discard(s)
                    reps.append(word_from_codes(self.alphabet, codes))
                for c in range(n_codes):
                    if codes and codes[-1] == (c ^ 1):
                        continue
                    next_level.append(codes + (c,))
            if not pending:
                break
            if level and len(level[0]) > aut.num_states:
                raise OracleFailure("transversal search exceeded the state count")
            level = next_level
        return reps


class FiniteSubsetOracle(SubgroupOracle):
    """Subgroup of a finite group generated by given words."""

    def __init__(
        self,
        table: FiniteGroupTable,
        gens: Sequence[Word],
        alphabet: Alphabet | None = None,
        generator_names: Sequence[str] | None = None,
    ):
        if alphabet is None:
            if not gens:
                raise ValueError("empty generating set needs an explicit alphabet")
            alphabet = gens[0].alphabet
        for g in gens:
            if g.alphabet != alphabet:
                raise AlphabetMismatch("generators over different alphabets")
        self.table = table
        self.alphabet = alphabet
        self._generator_names = tuple(
            generator_names if generator_names is not None else alphabet.names
        )
        self.basis = tuple(gens)
        self.basis_alphabet = _basis_alphabet(len(self.basis))
        self._element_word, self._element_order = table.element_words(
            alphabet, self._generator_names
        )

        images = [table.evaluate(g) for g in gens]
        # subgroup closure + shortlex-minimal word in basis letters per member
        moves = []
        for k, img in enumerate(images):
            moves.append((k, 1, img))
            moves.append((k, -1, table.inverse[img]))
        member_word: dict[int, Word] = {table.identity: Word.identity(self.basis_alphabet)}
        queue = deque([table.identity])
        while queue:
            x = queue.popleft()
            wx = member_word[x]
            for k, s, img in moves:
                y = table.product[x][img]
                if y not in member_word:
                    member_word[y] = Word(
                        self.basis_alphabet, wx.syllables + ((k, s),)
                    ).free_reduce()
                    queue.append(y)
        self._member_word = member_word
        self.elements = frozenset(member_word)

        # canonical reps of right cosets H·g and left cosets g·H
        self._right_rep: dict[int, tuple[Word, int]] = {}
        self._left_reps: list[Word] = []
        seen_left: set[int] = set()
        for g in self._element_order:
            rk = self._right_key(g)
            if rk not in self._right_rep:
                self._right_rep[rk] = (self._element_word[g], g)
            lk = min(table.product[g][h] for h in self.elements)
            if lk not in seen_left:
                seen_left.add(lk)
                self._left_reps.append(self._element_word[g])

    def _right_key(self, g: int) -> int:
        return min(self.table.product[h][g] for h in self.elements)

    def contains(self, w: Word) -> bool:
        self._check_alphabet(w)
        return self.table.evaluate(w) in self.elements

    def rewrite_in_basis(self, w: Word) -> Word:
        self._check_alphabet(w)
        x = self.table.evaluate(w)
        if x not in self.elements:
            raise NotInSubgroup(f"{w} is not in the subgroup")
        return self._member_word[x]

    def right_coset_key(self, w: Word) -> Any:
        self._check_alphabet(w)
        return self._right_key(self.table.evaluate(w))

    def right_coset_rep(self, w: Word) -> Word:
        return self._right_rep[self.right_coset_key(w)][0]

    def index(self) -> int | None:
        return self.table.order // len(self.elements)

    def left_transversal(self) -> list[Word]:
        return list(self._left_reps)

    def same_element(self, u: Word, v: Word) -> bool:
        return self.table.evaluate(u) == self.table.evaluate(v)

    def with_alphabet(self, alphabet: Alphabet) -> "FiniteSubsetOracle":
        return FiniteSubsetOracle(
            self.table,
            [b.translate(alphabet) for b in self.basis],
            alphabet,
            generator_names=self._generator_names,
        )
