"""Core graph types: directed mixed graphs, conditional ADMGs, and the text format.

A directed mixed graph has a vertex set plus directed and bidirected edge
sets.  Graphs here are *canonical*: every vertex implicitly carries a
bidirected self-loop (every vertex gets its own disturbance), so explicit loops are
never stored.  All graph values are immutable; transformations elsewhere in
the package return new graphs.
"""

import re
from typing import Iterable

__all__ = [
    "GraphError",
    "GraphParseError",
    "DirectedMixedGraph",
    "CondADMG",
    "parse_graph",
    "serialize_graph",
    "is_acyclic",
    "classify",
    "exogenous_vertices",
    "topological_orders",
    "induced_subgraph",
]

_LABEL_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_EDGE_RE = re.compile(r"\s*([A-Za-z0-9_]+)\s*(<->|->)\s*([A-Za-z0-9_]+)\s*\Z")


class GraphError(ValueError):
    """Invalid graph construction or graph-class violation."""


class GraphParseError(GraphError):
    """Malformed graph text; carries the offending line number."""

    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class DirectedMixedGraph:
    """Immutable directed mixed graph.

    Vertex order is significant: it is the authoritative index order for
    probability tables and for all deterministic enumeration downstream.
    Bidirected edges are stored as unordered pairs, normalized to vertex
    order.  ``canonical=True`` means every vertex implicitly carries a
    bidirected loop.
    """

    __slots__ = ("vertices", "directed", "bidirected", "canonical",
                 "_index", "_pa", "_ch", "_bidir_adj", "_steps")

    def __init__(self, vertices: Iterable[str],
                 directed: Iterable[tuple[str, str]] = (),
                 bidirected: Iterable[tuple[str, str]] = (),
                 canonical: bool = True):
        vertices = tuple(vertices)
        index = {}
        for v in vertices:
            if not _LABEL_RE.match(v):
                raise GraphError(f"invalid vertex label {v!r}")
            if v in index:
                raise GraphError(f"duplicate vertex {v!r}")
            index[v] = len(index)
        dset = set()
        for tail, head in directed:
            if tail not in index or head not in index:
                raise GraphError(f"edge endpoint not a vertex: {tail} -> {head}")
            if tail == head:
                raise GraphError(f"directed self-loop at {tail}")
            dset.add((tail, head))
        bset = set()
        for a, b in bidirected:
            if a not in index or b not in index:
                raise GraphError(f"edge endpoint not a vertex: {a} <-> {b}")
            if a == b:
                continue  # implicit canonical loop, never stored
            bset.add((a, b) if index[a] < index[b] else (b, a))
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "directed", frozenset(dset))
        object.__setattr__(self, "bidirected", frozenset(bset))
        object.__setattr__(self, "canonical", bool(canonical))
        object.__setattr__(self, "_index", index)
        pa = {v: set() for v in vertices}
        ch = {v: set() for v in vertices}
        for tail, head in dset:
            pa[head].add(tail)
            ch[tail].add(head)
        badj = {v: set() for v in vertices}
        for a, b in bset:
            badj[a].add(b)
            badj[b].add(a)
        object.__setattr__(self, "_pa", {v: frozenset(s) for v, s in pa.items()})
        object.__setattr__(self, "_ch", {v: frozenset(s) for v, s in ch.items()})
        object.__setattr__(self, "_bidir_adj", {v: frozenset(s) for v, s in badj.items()})
        object.__setattr__(self, "_steps", None)

    def __setattr__(self, name, value):
        raise AttributeError("DirectedMixedGraph is immutable")

    def __eq__(self, other):
        if not isinstance(other, DirectedMixedGraph):
            return NotImplemented
        return (self.vertices == other.vertices
                and self.directed == other.directed
                and self.bidirected == other.bidirected
                and self.canonical == other.canonical)

    def __hash__(self):
        return hash((self.vertices, self.directed, self.bidirected, self.canonical))

    def __repr__(self):
        return (f"DirectedMixedGraph(vertices={list(self.vertices)}, "
                f"directed={sorted(self.directed)}, "
                f"bidirected={sorted(self.bidirected)})")

    def __contains__(self, v: str) -> bool:
        return v in self._index

    def index_of(self, v: str) -> int:
        return self._index[v]

    def require_vertex(self, v: str) -> None:
        if v not in self._index:
            raise GraphError(f"unknown vertex {v!r}")

    def parents_of(self, v: str) -> frozenset:
        return self._pa[v]

    def children_of(self, v: str) -> frozenset:
        return self._ch[v]

    def bidirected_adjacent(self, v: str) -> frozenset:
        return self._bidir_adj[v]

    def sorted_by_order(self, vs: Iterable[str]) -> list[str]:
        return sorted(vs, key=self._index.__getitem__)

    def steps(self) -> dict:
        """Per-vertex incident walk steps: v -> ((mark_at_v, w, mark_at_w), ...).

        A directed edge contributes a tail at its tail and an arrowhead at
        its head; bidirected edges contribute arrowheads at both ends.
        Canonical loops are omitted here: a loop step never changes walk
        blocking status, so reachability queries can ignore it.
        """
        if self._steps is None:
            steps = {v: [] for v in self.vertices}
            for tail, head in self.directed:
                steps[tail].append(("tail", head, "head"))
                steps[head].append(("head", tail, "tail"))
            for a, b in self.bidirected:
                steps[a].append(("head", b, "head"))
                steps[b].append(("head", a, "head"))
            object.__setattr__(self, "_steps", {v: tuple(s) for v, s in steps.items()})
        return self._steps

    def replace(self, directed=None, bidirected=None) -> "DirectedMixedGraph":
        return DirectedMixedGraph(
            self.vertices,
            self.directed if directed is None else directed,
            self.bidirected if bidirected is None else bidirected,
            self.canonical,
        )


class CondADMG:
    """An ADMG whose vertices are partitioned into random and fixed sets.

    No edge may carry an arrowhead at a fixed vertex: fixed vertices have no
    incoming directed edges and touch no bidirected edges.  Random vertices
    keep their implicit bidirected loops; fixed vertices do not.
    """

    __slots__ = ("graph", "random", "fixed")

    def __init__(self, graph: DirectedMixedGraph, fixed: Iterable[str] = ()):
        fixed = frozenset(fixed)
        for v in fixed:
            graph.require_vertex(v)
        for tail, head in graph.directed:
            if head in fixed:
                raise GraphError(f"directed edge into fixed vertex {head}")
        for a, b in graph.bidirected:
            if a in fixed or b in fixed:
                raise GraphError(f"bidirected edge touching fixed vertex: {a} <-> {b}")
        object.__setattr__(self, "graph", graph)
        object.__setattr__(self, "fixed", fixed)
        object.__setattr__(self, "random", frozenset(graph.vertices) - fixed)

    def __setattr__(self, name, value):
        raise AttributeError("CondADMG is immutable")

    def __eq__(self, other):
        if not isinstance(other, CondADMG):
            return NotImplemented
        return self.graph == other.graph and self.fixed == other.fixed

    def __hash__(self):
        return hash((self.graph, self.fixed))

    def __repr__(self):
        return f"CondADMG(graph={self.graph!r}, fixed={sorted(self.fixed)})"


def parse_graph(text: str) -> DirectedMixedGraph:
    """Parse the graph text format.

    Format: optional full-line ``#`` comments; the first non-comment line is
    ``vertices: <label> <label> ...``; every following non-empty line is one
    edge, ``a -> b`` or ``a <-> b``.  ``<->`` pairs are order-insensitive and
    deduplicated.  The vertex order of the ``vertices:`` line is preserved.
    """
    vertices = None
    directed = []
    bidirected = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if vertices is None:
            if not line.startswith("vertices:"):
                raise GraphParseError(lineno, "expected 'vertices:' line")
            labels = line[len("vertices:"):].split()
            for lab in labels:
                if not _LABEL_RE.match(lab):
                    raise GraphParseError(lineno, f"invalid vertex label {lab!r}")
                if lab in seen:
                    raise GraphParseError(lineno, f"duplicate vertex {lab!r}")
                seen.add(lab)
            vertices = labels
            continue
        m = _EDGE_RE.match(line)
        if not m:
            raise GraphParseError(lineno, f"cannot parse edge line {line!r}")
        a, kind, b = m.group(1), m.group(2), m.group(3)
        for lab in (a, b):
            if lab not in seen:
                raise GraphParseError(lineno, f"unknown vertex {lab!r} in edge line")
        if kind == "->":
            if a == b:
                raise GraphParseError(lineno, f"directed self-loop at {a}")
            directed.append((a, b))
        else:
            bidirected.append((a, b))
    if vertices is None:
        raise GraphParseError(1, "missing 'vertices:' line")
    return DirectedMixedGraph(vertices, directed, bidirected)


def serialize_graph(g: DirectedMixedGraph) -> str:
    """Serialize to the text format; reparsing yields an equal graph."""
    lines = ["vertices: " + " ".join(g.vertices)]
    key = g.index_of
    for tail, head in sorted(g.directed, key=lambda e: (key(e[0]), key(e[1]))):
        lines.append(f"{tail} -> {head}")
    for a, b in sorted(g.bidirected, key=lambda e: (key(e[0]), key(e[1]))):
        lines.append(f"{a} <-> {b}")
    return "\n".join(lines) + "\n"


def is_acyclic(g: DirectedMixedGraph) -> bool:
    """True iff the directed edges contain no directed cycle."""
    state = {}  # 0 = visiting, 1 = done

    def visit(v):
        stack = [(v, iter(g.children_of(v)))]
        state[v] = 0
        while stack:
            node, it = stack[-1]
            advanced = False
            for c in it:
                if c not in state:
                    state[c] = 0
                    stack.append((c, iter(g.children_of(c))))
                    advanced = True
                    break
                if state[c] == 0:
                    return False
            if not advanced:
                state[node] = 1
                stack.pop()
        return True

    for v in g.vertices:
        if v not in state and not visit(v):
            return False
    return True


def exogenous_vertices(g: DirectedMixedGraph) -> frozenset:
    """Vertices with no incoming directed edge."""
    return frozenset(v for v in g.vertices if not g.parents_of(v))


def classify(g: DirectedMixedGraph) -> frozenset:
    """Graph classes of ``g``: subset of {ADMG, DAG, Bidirected, Unconfounded}.

    Unconfounded means every bidirected edge between distinct vertices joins
    two exogenous vertices; it is reported independently of acyclicity, so
    the unconfounded-ADMG class is membership in both ADMG and Unconfounded.
    """
    classes = set()
    acyclic = is_acyclic(g)
    if acyclic:
        classes.add("ADMG")
        if not g.bidirected:
            classes.add("DAG")
    if not g.directed:
        classes.add("Bidirected")
    exo = exogenous_vertices(g)
    if all(a in exo and b in exo for a, b in g.bidirected):
        classes.add("Unconfounded")
    return frozenset(classes)


def topological_orders(g: DirectedMixedGraph, limit: int = 1) -> list[tuple[str, ...]]:
    """Up to ``limit`` topological orders, lexicographic-first by vertex order."""
    if not is_acyclic(g):
        raise GraphError("graph has a directed cycle; no topological order exists")
    orders: list[tuple[str, ...]] = []
    indeg = {v: len(g.parents_of(v)) for v in g.vertices}
    prefix: list[str] = []

    def extend():
        if len(orders) >= limit:
            return
        if len(prefix) == len(g.vertices):
            orders.append(tuple(prefix))
            return
        for v in g.vertices:
            if indeg[v] == 0 and v not in taken:
                taken.add(v)
                prefix.append(v)
                for c in g.children_of(v):
                    indeg[c] -= 1
                extend()
                for c in g.children_of(v):
                    indeg[c] += 1
                prefix.pop()
                taken.discard(v)
                if len(orders) >= limit:
                    return

    taken: set = set()
    extend()
    return orders


def induced_subgraph(g: DirectedMixedGraph, keep: Iterable[str]) -> DirectedMixedGraph:
    """Subgraph on ``keep`` (original vertex order), retaining internal edges."""
    keep = set(keep)
    for v in keep:
        g.require_vertex(v)
    vertices = [v for v in g.vertices if v in keep]
    directed = [(t, h) for t, h in g.directed if t in keep and h in keep]
    bidirected = [(a, b) for a, b in g.bidirected if a in keep and b in keep]
    return DirectedMixedGraph(vertices, directed, bidirected, g.canonical)
