"""Serre graphs, graphs of groups, and Bass-Serre machinery.

A graph in Serre's sense: directed edge set with endpoint maps o, t and
a free involution e -> bar(e) satisfying o(bar(e)) = t(e).  A graph of
groups adds vertex/edge presentations and injections of each edge group
into the target vertex group.

The fundamental group is presented by choosing the BFS maximal tree
from vertex 0: vertex relators, tree-edge identifications, and one
stable letter per non-tree unoriented edge.  Orientation convention:
the direction whose edge id is smaller is positive; crossing the
positive direction of non-tree edge rank k contributes stable letter
t<k>, the reverse contributes its inverse.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any

from . import dsl
from .dsl import Presentation
from .errors import (
    InvalidGraphOfGroups,
    NotConnected,
    RadiusTooLarge,
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
    "SerreGraph",
    "GraphOfGroups",
    "BallTree",
    "validate_graph",
    "spanning_tree",
    "fundamental_presentation",
    "bass_serre_ball",
    "gog_from_json",
    "gog_to_json",
    "DEFAULT_NODE_BUDGET",
]

DEFAULT_NODE_BUDGET = 10**6


@dataclass(frozen=True)
class SerreGraph:
    num_vertices: int
    o: tuple[int, ...]
    t: tuple[int, ...]
    bar: tuple[int, ...]

    def __post_init__(self) -> None:
        n_edges = len(self.o)
        if len(self.t) != n_edges or len(self.bar) != n_edges:
            raise ValueError("o, t, bar must have equal lengths")
        for arr, bound in ((self.o, self.num_vertices), (self.t, self.num_vertices), (self.bar, n_edges)):
            for x in arr:
                if not 0 <= x < bound:
                    raise ValueError(f"index {x} out of range")

    @property
    def num_edges(self) -> int:
        return len(self.o)

    def canonical(self, e: int) -> int:
        """The positive direction of the unoriented edge {e, bar(e)}."""
        return min(e, self.bar[e])

    def unoriented_edges(self) -> list[int]:
        return sorted({self.canonical(e) for e in range(self.num_edges)})

    def edges_from(self, v: int) -> list[int]:
        return [e for e in range(self.num_edges) if self.o[e] == v]


def validate_graph(g: SerreGraph) -> list[str]:
    """Check the Serre graph axioms; violations are returned, not raised."""
    violations = []
    for e in range(g.num_edges):
        if g.bar[g.bar[e]] != e:
            violations.append(f"involution not an involution at edge {e}")
        if g.bar[e] == e:
            violations.append(f"involution not free at edge {e}")
        if g.o[g.bar[e]] != g.t[e]:
            violations.append(f"o(bar({e})) != t({e})")
    if g.num_vertices > 0:
        seen = {0}
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for e in range(g.num_edges):
                if g.o[e] == v and g.t[e] not in seen:
                    seen.add(g.t[e])
                    queue.append(g.t[e])
                if g.t[e] == v and g.o[e] not in seen:
                    seen.add(g.o[e])
                    queue.append(g.o[e])
        if len(seen) != g.num_vertices:
            missing = sorted(set(range(g.num_vertices)) - seen)
            violations.append(f"not connected: vertices {missing} unreachable from 0")
    return violations


def spanning_tree(g: SerreGraph) -> set[int]:
    """Canonical edge ids of a maximal tree: BFS from vertex 0, ties by
    smallest edge id.  |tree| = |V| - 1."""
    seen = {0}
    tree: set[int] = set()
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for e in range(g.num_edges):
            if g.o[e] == v and g.t[e] not in seen:
                seen.add(g.t[e])
                tree.add(g.canonical(e))
                queue.append(g.t[e])
    if len(seen) != g.num_vertices:
        raise NotConnected("graph is not connected")
    return tree


@dataclass(frozen=True)
class GraphOfGroups:
    """Vertex/edge presentations with edge-group injections.

    injections[e][j] is the image in vertex_groups[t(e)] of the j-th
    generator of edge_groups[e].  Finite vertex groups carry their
    multiplication tables (vertex_tables); edge groups may carry tables
    for the desk-scale injectivity check.
    """

    graph: SerreGraph
    vertex_groups: tuple[Presentation, ...]
    edge_groups: tuple[Presentation, ...]
    injections: tuple[tuple[Word, ...], ...]
    vertex_tables: tuple[FiniteGroupTable | None, ...] = field(default=())
    edge_tables: tuple[FiniteGroupTable | None, ...] = field(default=())

    def __post_init__(self) -> None:
        g = self.graph
        problems = validate_graph(g)
        if problems:
            raise InvalidGraphOfGroups("; ".join(problems))
        if len(self.vertex_groups) != g.num_vertices:
            raise InvalidGraphOfGroups("one presentation per vertex required")
        if len(self.edge_groups) != g.num_edges or len(self.injections) != g.num_edges:
            raise InvalidGraphOfGroups("one presentation and injection per edge required")
        if not self.vertex_tables:
            object.__setattr__(self, "vertex_tables", (None,) * g.num_vertices)
        if not self.edge_tables:
            object.__setattr__(self, "edge_tables", (None,) * g.num_edges)
        if len(self.vertex_tables) != g.num_vertices or len(self.edge_tables) != g.num_edges:
            raise InvalidGraphOfGroups("table tuples have wrong lengths")
        for e in range(g.num_edges):
            if self.edge_groups[e] != self.edge_groups[g.bar[e]]:
                raise InvalidGraphOfGroups(f"edge groups differ on {e} and bar({e})")
            target = self.vertex_groups[g.t[e]]
            if len(self.injections[e]) != len(self.edge_groups[e].alphabet):
                raise InvalidGraphOfGroups(
                    f"injection on edge {e} must image every edge-group generator"
                )
            for w in self.injections[e]:
                if w.alphabet != target.alphabet:
                    raise InvalidGraphOfGroups(
                        f"injection image {w} on edge {e} is not over the target vertex group"
                    )
        self._verify_injectivity()

    def _verify_injectivity(self) -> None:
        # Desk-scale necessary conditions: Stallings rank for free targets
        # (sufficient there, free groups being Hopfian), subgroup order for
        # finite targets with a known edge-group order.
        g = self.graph
        for e in range(g.num_edges):
            edge_rank = len(self.edge_groups[e].alphabet)
            table = self.vertex_tables[g.t[e]]
            try:
                oracle = self.crossing_oracle(g.bar[e])
            except UnsupportedClass:
                continue  # vertex group outside the decidable classes; skip the check
            if table is None:
                if self.edge_groups[e].is_free():
                    if len(oracle.basis) != edge_rank:
                        raise InvalidGraphOfGroups(
                            f"edge {e}: injection images have rank {len(oracle.basis)}, "
                            f"expected {edge_rank}"
                        )
            else:
                if self.edge_groups[e].is_free() and edge_rank >= 1:
                    raise InvalidGraphOfGroups(
                        f"edge {e}: a free edge group cannot inject into a finite vertex group"
                    )
                etable = self.edge_tables[e]
                if etable is not None and isinstance(oracle, FiniteSubsetOracle):
                    if len(oracle.elements) != etable.order:
                        raise InvalidGraphOfGroups(
                            f"edge {e}: injection image has order {len(oracle.elements)}, "
                            f"expected {etable.order}"
                        )

    def crossing_oracle(self, e: int) -> SubgroupOracle:
        """Oracle for the image of edge group e inside vertex group t(e)."""
        v = self.graph.t[e]
        target = self.vertex_groups[v]
        table = self.vertex_tables[v]
        words = list(self.injections[e])
        if table is not None:
            return FiniteSubsetOracle(table, words, target.alphabet)
        if target.is_free():
            return FreeStallingsOracle(words, target.alphabet)
        raise UnsupportedClass(
            f"vertex group {v} is neither free nor backed by a table"
        )


@dataclass(frozen=True)
class _Naming:
    alphabet: Alphabet
    renames: tuple[dict[str, str], ...]  # per vertex
    stable_of: dict[int, str]  # canonical non-tree edge id -> stable letter
    tree: set[int]


def _fresh(name: str, taken: set[str]) -> str:
    while name in taken:
        name += "_"
    return name


def _naming(gg: GraphOfGroups) -> _Naming:
    g = gg.graph
    all_names: list[str] = []
    for p in gg.vertex_groups:
        all_names.extend(p.alphabet.names)
    counts: dict[str, int] = {}
    for n in all_names:
        counts[n] = counts.get(n, 0) + 1

    names: list[str] = []
    renames: list[dict[str, str]] = []
    taken: set[str] = set()
    for v, p in enumerate(gg.vertex_groups):
        rename: dict[str, str] = {}
        for n in p.alphabet.names:
            # vertex-index suffix only on cross-vertex collision
            new = n if counts[n] == 1 else _fresh(f"{n}_{v}", taken | set(all_names))
            rename[n] = new
            taken.add(new)
            names.append(new)
        renames.append(rename)

    tree = spanning_tree(g)
    stable_of: dict[int, str] = {}
    for k, e in enumerate(sorted(set(g.unoriented_edges()) - tree)):
        stable = _fresh(f"t{k}", taken)
        taken.add(stable)
        names.append(stable)
        stable_of[e] = stable
    return _Naming(Alphabet(names), tuple(renames), stable_of, tree)


def _vertex_word(naming: _Naming, v: int, w: Word) -> Word:
    return w.translate(naming.alphabet, naming.renames[v])


def fundamental_presentation(gg: GraphOfGroups) -> Presentation:
    """Vertex relators, tree-edge identifications i_e(g) = i_bar(e)(g),
    and relators t^-1·i_bar(e)(g)·t·i_e(g)^-1 for non-tree edges."""
    g = gg.graph
    naming = _naming(gg)
    ext = naming.alphabet
    relators: list[Word] = []
    for v, p in enumerate(gg.vertex_groups):
        relators.extend(_vertex_word(naming, v, r) for r in p.relators)
    for e in sorted(gg.graph.unoriented_edges()):
        eb = g.bar[e]
        images_e = [_vertex_word(naming, g.t[e], w) for w in gg.injections[e]]
        images_eb = [_vertex_word(naming, g.t[eb], w) for w in gg.injections[eb]]
        if e in naming.tree:
            for we, wb in zip(images_e, images_eb):
                relators.append(Word(ext, we.syllables + wb.invert().syllables))
        else:
            t_index = ext.index(naming.stable_of[e])
            for we, wb in zip(images_e, images_eb):
                relators.append(
                    Word(
                        ext,
                        ((t_index, -1),)
                        + wb.syllables
                        + ((t_index, 1),)
                        + we.invert().syllables,
                    )
                )
    return Presentation(ext, tuple(relators))


@dataclass(frozen=True)
class BallTree:
    """A radius-r ball of the Bass-Serre tree, rooted at a vertex-group coset."""

    root: int
    nodes: tuple[tuple[int, int, Word], ...]  # (coset id, vertex orbit, representative)
    edges: tuple[tuple[int, int, int], ...]  # (parent id, child id, unoriented edge orbit)

    def node_count(self) -> int:
        return len(self.nodes)

    def degrees(self) -> dict[int, int]:
        deg: dict[int, int] = {node_id: 0 for node_id, _, _ in self.nodes}
        for a, b, _ in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def is_tree(self) -> bool:
        """Connected and acyclic: |E| = |V| - 1 with every node reachable."""
        if len(self.edges) != len(self.nodes) - 1:
            return False
        adj: dict[int, list[int]] = {node_id: [] for node_id, _, _ in self.nodes}
        for a, b, _ in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        seen = {self.root}
        queue = deque([self.root])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return len(seen) == len(self.nodes)

    def to_json(self) -> dict[str, Any]:
        return {
            "root": self.root,
            "nodes": [
                {"id": i, "vertex": v, "word": dsl.word_to_json(w)}
                for i, v, w in self.nodes
            ],
            "edges": [
                {"parent": a, "child": b, "edge": e} for a, b, e in self.edges
            ],
        }

    def to_dot(self) -> str:
        lines = ["graph ball {"]
        for i, v, _ in self.nodes:
            lines.append(f'  {i} [label="v{v}"];')
        for a, b, e in self.edges:
            lines.append(f'  {a} -- {b} [label="e{e}"];')
        lines.append("}")
        return "\n".join(lines)


def bass_serre_ball(
    gg: GraphOfGroups,
    base_vertex: int,
    radius: int,
    node_budget: int | None = None,
) -> BallTree:
    """Expand the ball of the tree the fundamental group acts on.

    Nodes are cosets g·G_v; the children of a node are indexed by the
    directed edges e leaving its orbit vertex and the left cosets of
    the crossing subgroup i_bar(e)(G_e) in G_v, excluding the coset
    that folds back to the parent.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if not 0 <= base_vertex < gg.graph.num_vertices:
        raise ValueError(f"no vertex {base_vertex}")
    budget = DEFAULT_NODE_BUDGET if node_budget is None else node_budget
    g = gg.graph
    naming = _naming(gg)
    ext = naming.alphabet

    transversals: dict[int, list[Word]] = {}

    def transversal(e: int) -> list[Word]:
        if e not in transversals:
            oracle = gg.crossing_oracle(g.bar[e])  # i_bar(e)(G_e) inside G_o(e)
            transversals[e] = [
                _vertex_word(naming, g.o[e], w) for w in oracle.left_transversal()
            ]
        return transversals[e]

    def edge_letter(e: int) -> tuple[tuple[int, int], ...]:
        ce = g.canonical(e)
        if ce in naming.tree:
            return ()
        t_index = ext.index(naming.stable_of[ce])
        return ((t_index, 1 if e == ce else -1),)

    nodes: list[tuple[int, int, Word]] = [(0, base_vertex, Word.identity(ext))]
    edges: list[tuple[int, int, int]] = []
    frontier: list[tuple[int, int, Word, int | None]] = [
        (0, base_vertex, Word.identity(ext), None)
    ]
    for _ in range(radius):
        next_frontier: list[tuple[int, int, Word, int | None]] = []
        for node_id, v, word, arrived in frontier:
            for e in g.edges_from(v):
                reps = transversal(e)
                for j, rep in enumerate(reps):
                    if arrived is not None and e == g.bar[arrived] and j == 0:
                        continue  # the trivial coset along the reverse edge is the parent
                    child_word = Word(
                        ext, word.syllables + rep.syllables + edge_letter(e)
                    ).free_reduce()
                    child_id = len(nodes)
                    if child_id >= budget:
                        raise RadiusTooLarge(
                            f"ball exceeds the node budget of {budget}"
                        )
                    nodes.append((child_id, g.t[e], child_word))
                    edges.append((node_id, child_id, g.canonical(e)))
                    next_frontier.append((child_id, g.t[e], child_word, e))
        frontier = next_frontier
    return BallTree(0, tuple(nodes), tuple(edges))


# -- JSON ----------------------------------------------------------------


def gog_from_json(data: dict[str, Any]) -> GraphOfGroups:
    vertices = data["vertices"]
    edges = data["edges"]
    graph = SerreGraph(
        len(vertices),
        tuple(int(e["o"]) for e in edges),
        tuple(int(e["t"]) for e in edges),
        tuple(int(e["bar"]) for e in edges),
    )
    vertex_groups = tuple(dsl.presentation_from_json(v["presentation"]) for v in vertices)
    vertex_tables = tuple(
        FiniteGroupTable.from_json(v["table"]) if v.get("table") is not None else None
        for v in vertices
    )
    edge_groups = tuple(dsl.presentation_from_json(e["group"]) for e in edges)
    edge_tables = tuple(
        FiniteGroupTable.from_json(e["table"]) if e.get("table") is not None else None
        for e in edges
    )
    injections = tuple(
        tuple(
            dsl.word_from_json(w, vertex_groups[graph.t[i]].alphabet)
            for w in e["injection"]
        )
        for i, e in enumerate(edges)
    )
    return GraphOfGroups(graph, vertex_groups, edge_groups, injections, vertex_tables, edge_tables)


def gog_to_json(gg: GraphOfGroups) -> dict[str, Any]:
    vertices = []
    for v, p in enumerate(gg.vertex_groups):
        entry: dict[str, Any] = {"presentation": dsl.presentation_to_json(p)}
        if gg.vertex_tables[v] is not None:
            entry["table"] = gg.vertex_tables[v].to_json()
        vertices.append(entry)
    edges = []
    for e in range(gg.graph.num_edges):
        entry = {
            "o": gg.graph.o[e],
            "t": gg.graph.t[e],
            "bar": gg.graph.bar[e],
            "group": dsl.presentation_to_json(gg.edge_groups[e]),
            "injection": [dsl.word_to_json(w) for w in gg.injections[e]],
        }
        if gg.edge_tables[e] is not None:
            entry["table"] = gg.edge_tables[e].to_json()
        edges.append(entry)
    return {"vertices": vertices, "edges": edges}
