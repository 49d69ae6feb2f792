"""Reachability queries on directed mixed graphs.

All queries are phrased in terms of walks (vertex repeats allowed, edge
direction ignored for connectivity).  A walk is blocked by a conditioning
set L when some non-endpoint occurrence is a collider outside L or a
non-collider inside L; colliders are occurrences whose two incident edge
marks are both arrowheads.  Walks make the classical descendant-collider
clause unnecessary: conditioning on a collider's descendant is captured by
a detour walk down to the descendant and back.

``m_connected`` runs a linear-time reachability over (vertex, incoming
mark) states.  ``m_connected_oracle`` enumerates explicit walks instead and
exists to cross-validate the reachability implementation; never use it on a
production path.
"""

from dataclasses import dataclass
from typing import FrozenSet, Iterable

from .graph_core import DirectedMixedGraph, GraphError

__all__ = [
    "SeparationQuery",
    "Walk",
    "m_connected",
    "m_connected_oracle",
    "district",
    "markov_boundary",
    "markov_background",
    "ancestral_closure",
    "arc_connected",
    "parents",
    "children",
    "ancestors",
    "descendants",
]

HEAD = "head"
TAIL = "tail"


@dataclass(frozen=True)
class SeparationQuery:
    """A triple (J, K, L) of pairwise disjoint vertex sets, J and K nonempty."""

    J: FrozenSet[str]
    K: FrozenSet[str]
    L: FrozenSet[str] = frozenset()

    def validate(self, g: DirectedMixedGraph) -> None:
        _check_query(g, self.J, self.K, self.L)


def _check_query(g, J, K, L):
    J, K, L = set(J), set(K), set(L)
    if not J or not K:
        raise GraphError("separation query needs nonempty J and K")
    if J & K or J & L or K & L:
        raise GraphError("separation query sets must be pairwise disjoint")
    for v in J | K | L:
        g.require_vertex(v)


@dataclass(frozen=True)
class Walk:
    """Explicit walk: steps (endpoint, mark, mark, endpoint), marks in {tail, head}.

    Consecutive steps share the connecting vertex; each step must be an edge
    of the graph (canonical bidirected loops are admissible steps).
    """

    steps: tuple

    def validate(self, g: DirectedMixedGraph) -> None:
        if not self.steps:
            raise GraphError("walk must be nonempty")
        for (a, ma, mb, b) in self.steps:
            g.require_vertex(a)
            g.require_vertex(b)
            if ma == TAIL and mb == HEAD:
                if (a, b) not in g.directed:
                    raise GraphError(f"no directed edge {a} -> {b}")
            elif ma == HEAD and mb == TAIL:
                if (b, a) not in g.directed:
                    raise GraphError(f"no directed edge {b} -> {a}")
            elif ma == HEAD and mb == HEAD:
                if a == b:
                    if not g.canonical:
                        raise GraphError(f"no bidirected loop at {a}")
                elif (a, b) not in g.bidirected and (b, a) not in g.bidirected:
                    raise GraphError(f"no bidirected edge {a} <-> {b}")
            else:
                raise GraphError(f"invalid mark pair ({ma}, {mb})")
        for (_, _, _, b), (a2, _, _, _) in zip(self.steps, self.steps[1:]):
            if b != a2:
                raise GraphError("consecutive walk steps must share a vertex")

    def is_blocked(self, L: Iterable[str]) -> bool:
        L = set(L)
        for (_, _, m_in, v), (_, m_out, _, _) in zip(self.steps, self.steps[1:]):
            collider = m_in == HEAD and m_out == HEAD
            if collider and v not in L:
                return True
            if not collider and v in L:
                return True
        return False


def m_connected(g: DirectedMixedGraph, J, K, L=frozenset()) -> bool:
    """True iff some walk from J to K is unblocked given L.

    Reachability over states (vertex, incoming mark): a state (v, m) may be
    left through an incident edge with mark m' at v when the occurrence of v
    is admissible, i.e. v is a collider (m = m' = head) in L, or a
    non-collider outside L.  Canonical loops never alter admissibility and
    are skipped.
    """
    _check_query(g, J, K, L)
    J, K, L = set(J), set(K), set(L)
    steps = g.steps()
    seen = set()
    frontier = []
    for j in J:
        for (m_at_j, w, m_at_w) in steps[j]:
            state = (w, m_at_w)
            if state not in seen:
                seen.add(state)
                frontier.append(state)
    while frontier:
        v, m_in = frontier.pop()
        if v in K:
            return True
        for (m_at_v, w, m_at_w) in steps[v]:
            collider = m_in == HEAD and m_at_v == HEAD
            if collider != (v in L):
                continue
            state = (w, m_at_w)
            if state not in seen:
                seen.add(state)
                frontier.append(state)
    return False


def m_connected_oracle(g: DirectedMixedGraph, J, K, L=frozenset(),
                       max_len: int | None = None) -> bool:
    """Walk-enumeration cross-check for :func:`m_connected`.

    Enumerates walks of up to ``max_len`` steps (default 2 * |V|, which is
    long enough on canonical ADMGs: an unblocked walk can always be
    shortened below that bound) and reports whether an unblocked one is
    found.  Loop steps are enumerated too.  States already explored with at
    least the remaining budget are pruned; this collapses revisits without
    changing which walks are reachable.
    """
    _check_query(g, J, K, L)
    J, K, L = set(J), set(K), set(L)
    if max_len is None:
        max_len = 2 * len(g.vertices)
    base_steps = g.steps()
    steps = {v: base_steps[v] + ((HEAD, v, HEAD),) if g.canonical else base_steps[v]
             for v in g.vertices}
    best = {}  # (vertex, in-mark) -> largest remaining budget already explored

    def explore(v, m_in, remaining):
        if v in K:
            return True
        if remaining == 0:
            return False
        if best.get((v, m_in), -1) >= remaining:
            return False
        best[(v, m_in)] = remaining
        for (m_at_v, w, m_at_w) in steps[v]:
            collider = m_in == HEAD and m_at_v == HEAD
            if collider != (v in L):
                continue
            if explore(w, m_at_w, remaining - 1):
                return True
        return False

    for j in J:
        for (m_at_j, w, m_at_w) in steps[j]:
            if explore(w, m_at_w, max_len - 1):
                return True
    return False


def district(g: DirectedMixedGraph, v: str) -> frozenset:
    """Vertices joined to ``v`` by bidirected walks, including ``v`` itself."""
    g.require_vertex(v)
    out = {v}
    frontier = [v]
    while frontier:
        u = frontier.pop()
        for w in g.bidirected_adjacent(u):
            if w not in out:
                out.add(w)
                frontier.append(w)
    return frozenset(out)


def _collider_reach(g: DirectedMixedGraph, v: str, first_head_only: bool) -> frozenset:
    """Endpoints of collider-connected walks leaving ``v``.

    With ``first_head_only`` the first edge must carry an arrowhead at
    ``v``, which by walk reversal characterizes the Markov background.
    """
    steps = g.steps()
    reached = set()
    seen = set()
    frontier = []
    for (m_at_v, w, m_at_w) in steps[v]:
        if first_head_only and m_at_v != HEAD:
            continue
        reached.add(w)
        state = (w, m_at_w)
        if state not in seen:
            seen.add(state)
            frontier.append(state)
    while frontier:
        u, m_in = frontier.pop()
        if m_in != HEAD:
            continue  # interior occurrence of u could not be a collider
        for (m_at_u, w, m_at_w) in steps[u]:
            if m_at_u != HEAD:
                continue
            reached.add(w)
            state = (w, m_at_w)
            if state not in seen:
                seen.add(state)
                frontier.append(state)
    reached.discard(v)
    return frozenset(reached)


def markov_boundary(g: DirectedMixedGraph, v: str) -> frozenset:
    """Vertices other than ``v`` reachable from ``v`` by collider-connected walks."""
    g.require_vertex(v)
    return _collider_reach(g, v, first_head_only=False)


def markov_background(g: DirectedMixedGraph, v: str) -> frozenset:
    """Vertices reaching ``v`` by collider-connected walks that end with an
    arrowhead at ``v``; equals the Markov boundary when ``v`` is childless."""
    g.require_vertex(v)
    return _collider_reach(g, v, first_head_only=True)


def ancestral_closure(g: DirectedMixedGraph, S: Iterable[str]) -> frozenset:
    """Smallest superset of S closed under taking parents."""
    out = set(S)
    for v in out:
        g.require_vertex(v)
    frontier = list(out)
    while frontier:
        v = frontier.pop()
        for p in g.parents_of(v):
            if p not in out:
                out.add(p)
                frontier.append(p)
    return frozenset(out)


def arc_connected(g: DirectedMixedGraph, J, K) -> bool:
    """True iff some collider-free walk (an arc) joins J and K."""
    _check_query(g, J, K, frozenset())
    J, K = set(J), set(K)
    steps = g.steps()
    seen = set()
    frontier = []
    for j in J:
        for (m_at_j, w, m_at_w) in steps[j]:
            state = (w, m_at_w)
            if state not in seen:
                seen.add(state)
                frontier.append(state)
    while frontier:
        v, m_in = frontier.pop()
        if v in K:
            return True
        for (m_at_v, w, m_at_w) in steps[v]:
            if m_in == HEAD and m_at_v == HEAD:
                continue  # collider occurrence: not an arc
            state = (w, m_at_w)
            if state not in seen:
                seen.add(state)
                frontier.append(state)
    return False


def parents(g: DirectedMixedGraph, v: str) -> frozenset:
    g.require_vertex(v)
    return g.parents_of(v)


def children(g: DirectedMixedGraph, v: str) -> frozenset:
    g.require_vertex(v)
    return g.children_of(v)


def ancestors(g: DirectedMixedGraph, v: str) -> frozenset:
    """Vertices with a directed walk to ``v``, including ``v`` itself."""
    g.require_vertex(v)
    return ancestral_closure(g, {v})


def descendants(g: DirectedMixedGraph, v: str) -> frozenset:
    """Vertices reachable from ``v`` by directed walks, including ``v`` itself."""
    g.require_vertex(v)
    out = {v}
    frontier = [v]
    while frontier:
        u = frontier.pop()
        for c in g.children_of(u):
            if c not in out:
                out.add(c)
                frontier.append(c)
    return frozenset(out)
