"""Graph-level operators: latent projection, expansions, SWIGs, augmentation,
and the fixing operator on conditional ADMGs."""

import itertools
from dataclasses import dataclass
from typing import FrozenSet, Iterable

from .graph_core import CondADMG, DirectedMixedGraph, GraphError, is_acyclic
from .walk_algebra import HEAD, descendants, district, markov_boundary

__all__ = [
    "UndirectedGraph",
    "BidirectedClique",
    "TildeFixedGraph",
    "marginalize",
    "enumerate_bidirected_cliques",
    "expand_pairwise",
    "expand_clique",
    "expand_noise",
    "swig",
    "swig_display_labels",
    "augment",
    "undirected_separated",
    "is_fixable",
    "fix_graph",
    "tilde_fix_graph",
    "fixable_sets",
]


class UndirectedGraph:
    """Simple undirected graph: no loops, unordered deduplicated edges."""

    __slots__ = ("vertices", "edges", "_adj")

    def __init__(self, vertices: Iterable[str], edges: Iterable[tuple[str, str]] = ()):
        vertices = tuple(vertices)
        index = {v: i for i, v in enumerate(vertices)}
        if len(index) != len(vertices):
            raise GraphError("duplicate vertex")
        eset = set()
        for a, b in edges:
            if a not in index or b not in index:
                raise GraphError(f"edge endpoint not a vertex: {a} - {b}")
            if a == b:
                raise GraphError(f"undirected self-loop at {a}")
            eset.add((a, b) if index[a] < index[b] else (b, a))
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "edges", frozenset(eset))
        adj = {v: set() for v in vertices}
        for a, b in eset:
            adj[a].add(b)
            adj[b].add(a)
        object.__setattr__(self, "_adj", {v: frozenset(s) for v, s in adj.items()})

    def __setattr__(self, name, value):
        raise AttributeError("UndirectedGraph is immutable")

    def __eq__(self, other):
        if not isinstance(other, UndirectedGraph):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def __hash__(self):
        return hash((self.vertices, self.edges))

    def neighbors(self, v: str) -> frozenset:
        return self._adj[v]


@dataclass(frozen=True)
class BidirectedClique:
    """A vertex subset every pair of which is bidirected-adjacent.

    Singletons qualify vacuously (canonical loops).
    """

    members: FrozenSet[str]


@dataclass(frozen=True)
class TildeFixedGraph:
    """Result of fixing a whole set J on a graph.

    ``cadmg`` is the conditional ADMG after fixing along a fixable
    permutation of J.  ``overlay`` holds the extra bidirected edges among
    the fixed vertices of J; they violate the no-arrowhead-at-fixed
    invariant, so they live outside the CondADMG and are consulted only by
    m-separation via ``msep_graph``.
    """

    cadmg: CondADMG
    overlay: FrozenSet[tuple]
    order: tuple

    @property
    def msep_graph(self) -> DirectedMixedGraph:
        g = self.cadmg.graph
        return g.replace(bidirected=set(g.bidirected) | set(self.overlay))


def marginalize(g: DirectedMixedGraph, keep: Iterable[str]) -> DirectedMixedGraph:
    """Latent projection of ``g`` onto ``keep``.

    The projected graph has a directed edge u -> v when some directed path
    from u to v has no non-endpoint in ``keep``, and a bidirected edge
    u <-> v when some confounding arc (collider-free path with arrowheads at
    both ends) has no non-endpoint in ``keep``.
    """
    keep = set(keep)
    for v in keep:
        g.require_vertex(v)
    vertices = [v for v in g.vertices if v in keep]
    steps = g.steps()

    directed = set()
    for u in vertices:
        # directed reachability through vertices outside keep
        seen = set()
        frontier = [u]
        while frontier:
            x = frontier.pop()
            for c in g.children_of(x):
                if c in keep:
                    if c != u:
                        directed.add((u, c))
                elif c not in seen:
                    seen.add(c)
                    frontier.append(c)

    bidirected = set()
    for u in vertices:
        # collider-free walks leaving u against an arrowhead, interior outside
        # keep, arriving at a keep vertex with an arrowhead
        seen = set()
        frontier = []
        for (m_at_u, w, m_at_w) in steps[u]:
            if m_at_u != HEAD:
                continue
            if w in keep:
                if m_at_w == HEAD and w != u:
                    bidirected.add((u, w))
                continue
            state = (w, m_at_w)
            if state not in seen:
                seen.add(state)
                frontier.append(state)
        while frontier:
            x, m_in = frontier.pop()
            for (m_at_x, w, m_at_w) in steps[x]:
                if m_in == HEAD and m_at_x == HEAD:
                    continue  # collider: not part of an arc
                if w in keep:
                    if m_at_w == HEAD and w != u:
                        bidirected.add((u, w))
                    continue
                state = (w, m_at_w)
                if state not in seen:
                    seen.add(state)
                    frontier.append(state)

    return DirectedMixedGraph(vertices, directed, bidirected, g.canonical)


def enumerate_bidirected_cliques(g: DirectedMixedGraph, maximal: bool = False) -> list[BidirectedClique]:
    """All nonempty bidirected cliques, in size-then-lexicographic order.

    Singletons are always cliques.  With ``maximal=True`` only cliques not
    contained in a larger one are returned (same statistical model, shorter
    list).
    """
    order = {v: i for i, v in enumerate(g.vertices)}
    cliques: list[tuple] = []

    def extend(current: tuple, candidates: list):
        for i, v in enumerate(candidates):
            nxt = current + (v,)
            cliques.append(nxt)
            adj = g.bidirected_adjacent(v)
            extend(nxt, [w for w in candidates[i + 1:] if w in adj])

    extend((), list(g.vertices))
    if maximal:
        sets = [frozenset(c) for c in cliques]
        cliques = [c for c, s in zip(cliques, sets)
                   if not any(s < t for t in sets)]
    cliques.sort(key=lambda c: (len(c), tuple(order[v] for v in c)))
    return [BidirectedClique(frozenset(c)) for c in cliques]


def _require_admg(g: DirectedMixedGraph) -> None:
    if not is_acyclic(g):
        raise GraphError("operation requires an acyclic directed mixed graph")


def _fresh(name: str, taken: set) -> str:
    if name in taken:
        raise GraphError(f"latent name {name!r} collides with an existing vertex")
    return name


def expand_pairwise(g: DirectedMixedGraph) -> DirectedMixedGraph:
    """Replace every bidirected edge by a latent common parent E_<j>_<k>."""
    _require_admg(g)
    taken = set(g.vertices)
    key = g.index_of
    latents = []
    directed = set(g.directed)
    for a, b in sorted(g.bidirected, key=lambda e: (key(e[0]), key(e[1]))):
        e = _fresh(f"E_{a}_{b}", taken)
        latents.append(e)
        directed.add((e, a))
        directed.add((e, b))
    return DirectedMixedGraph(tuple(g.vertices) + tuple(latents), directed, ())


def expand_clique(g: DirectedMixedGraph, maximal: bool = False) -> DirectedMixedGraph:
    """Replace every bidirected clique by a latent common parent E_c<i>.

    Cliques include singletons by default; ``maximal=True`` restricts to
    maximal cliques, which leaves the associated model unchanged.
    """
    _require_admg(g)
    taken = set(g.vertices)
    directed = set(g.directed)
    latents = []
    for i, clique in enumerate(enumerate_bidirected_cliques(g, maximal=maximal), start=1):
        e = _fresh(f"E_c{i}", taken)
        latents.append(e)
        for v in clique.members:
            directed.add((e, v))
    return DirectedMixedGraph(tuple(g.vertices) + tuple(latents), directed, ())


def expand_noise(g: DirectedMixedGraph) -> DirectedMixedGraph:
    """Give each vertex a latent parent E_<j> inheriting its bidirected edges."""
    _require_admg(g)
    taken = set(g.vertices)
    latents = {v: _fresh(f"E_{v}", taken) for v in g.vertices}
    directed = set(g.directed) | {(latents[v], v) for v in g.vertices}
    bidirected = {(latents[a], latents[b]) for a, b in g.bidirected}
    return DirectedMixedGraph(tuple(g.vertices) + tuple(latents[v] for v in g.vertices),
                              directed, bidirected)


def swig(g: DirectedMixedGraph, I: Iterable[str]) -> DirectedMixedGraph:
    """Single-world intervention graph: drop every directed edge leaving I.

    Bidirected edges and edges into I are untouched.  Vertex names are kept;
    display relabeling (``V(v_I)`` style) is cosmetic, see
    :func:`swig_display_labels`.
    """
    _require_admg(g)
    I = set(I)
    for v in I:
        g.require_vertex(v)
    directed = {(t, h) for t, h in g.directed if t not in I}
    return g.replace(directed=directed)


def swig_display_labels(g: DirectedMixedGraph, I: Iterable[str]) -> dict:
    """Display names for SWIG vertices, e.g. ``A -> A(b,c)`` for I = {B, C}."""
    tag = ",".join(v.lower() for v in g.sorted_by_order(set(I)))
    if not tag:
        return {v: v for v in g.vertices}
    return {v: f"{v}({tag})" for v in g.vertices}


def augment(g: DirectedMixedGraph) -> UndirectedGraph:
    """Undirected graph joining each pair of collider-connected vertices.

    Restricted to DAGs this is moralization.
    """
    edges = set()
    for v in g.vertices:
        for u in markov_boundary(g, v):
            edges.add((u, v))
    return UndirectedGraph(g.vertices, edges)


def undirected_separated(u: UndirectedGraph, J, K, L=frozenset()) -> bool:
    """True iff every path from J to K passes through L."""
    J, K, L = set(J), set(K), set(L)
    if not J or not K:
        raise GraphError("separation query needs nonempty J and K")
    if J & K or J & L or K & L:
        raise GraphError("separation query sets must be pairwise disjoint")
    seen = set(J)
    frontier = list(J)
    while frontier:
        v = frontier.pop()
        for w in u.neighbors(v):
            if w in K:
                return False
            if w not in seen and w not in L:
                seen.add(w)
                frontier.append(w)
    return True


def is_fixable(c: CondADMG, v: str) -> bool:
    """True iff no strict descendant of ``v`` shares its district."""
    c.graph.require_vertex(v)
    if v not in c.random:
        raise GraphError(f"vertex {v} is already fixed")
    g = c.graph
    return not ((descendants(g, v) - {v}) & district(g, v))


def fix_graph(c: CondADMG, v: str) -> CondADMG:
    """Fix ``v``: delete every edge with an arrowhead at ``v``, move it to fixed."""
    if not is_fixable(c, v):
        raise GraphError(f"vertex {v} is not fixable")
    g = c.graph
    directed = {(t, h) for t, h in g.directed if h != v}
    bidirected = {(a, b) for a, b in g.bidirected if v not in (a, b)}
    return CondADMG(DirectedMixedGraph(g.vertices, directed, bidirected, g.canonical),
                    c.fixed | {v})


def _greedy_fixable_order(g: DirectedMixedGraph, J: Iterable[str]):
    """Lexicographic-first fixable permutation of J, or None.

    Greedy by vertex order is exhaustive here: fixing only deletes edges, so
    a vertex fixable now stays fixable after any other fix.
    """
    remaining = set(J)
    c = CondADMG(g)
    order = []
    while remaining:
        for v in g.sorted_by_order(remaining):
            if is_fixable(c, v):
                c = fix_graph(c, v)
                order.append(v)
                remaining.discard(v)
                break
        else:
            return None, None
    return tuple(order), c


def tilde_fix_graph(g: DirectedMixedGraph, J: Iterable[str]) -> TildeFixedGraph:
    """Fix the set J along its canonical order and overlay bidirected edges
    among all pairs of J."""
    _require_admg(g)
    J = set(J)
    for v in J:
        g.require_vertex(v)
    order, c = _greedy_fixable_order(g, J)
    if order is None:
        raise GraphError(f"set {sorted(J)} admits no fixable permutation")
    key = g.index_of
    overlay = frozenset(
        (a, b) if key(a) < key(b) else (b, a)
        for a, b in itertools.combinations(sorted(J, key=key), 2)
    )
    return TildeFixedGraph(c, overlay, order)


def fixable_sets(g: DirectedMixedGraph) -> dict:
    """All subsets of V with a fixable permutation.

    Returns a mapping from each fixable set (frozenset) to its canonical
    order, the lexicographic-first fixable permutation.  Search is a
    breadth-first walk over fixed sets; memoizing on the set is valid
    because graph-level fixing is order-invariant.
    """
    _require_admg(g)
    start = CondADMG(g)
    states = {frozenset(): start}
    frontier = [frozenset()]
    while frontier:
        nxt = []
        for S in frontier:
            c = states[S]
            for v in c.random:
                if is_fixable(c, v):
                    S2 = S | {v}
                    if S2 not in states:
                        states[S2] = fix_graph(c, v)
                        nxt.append(S2)
        frontier = nxt
    key = g.index_of
    result = {}
    for S in sorted(states, key=lambda s: (len(s), sorted(key(v) for v in s))):
        order, _ = _greedy_fixable_order(g, S)
        result[S] = order
    return result
