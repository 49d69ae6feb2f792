"""Finite nonparametric equation systems and exact potential outcomes.

A system attaches to each vertex a total lookup table over (parent
assignment, own noise value) and gives the noise vector a joint law that is
unconditionally Markov for the bidirected part of the graph.  Potential
outcomes come from recursive substitution: intervened values replace parent
values on every right-hand side, while each left-hand side keeps its own
equation, so the coordinate of an intervened vertex is its natural response
to the forced parents.

Everything is computed by exhaustive enumeration over the noise support, in
exact rational arithmetic unless the noise table is float.
"""

import itertools
import json
import random
from dataclasses import dataclass
from fractions import Fraction

from .dist_core import (
    DistributionError,
    JointTable,
    Kernel,
    StateSpace,
    fix_dist,
    table_from_json,
    table_to_json,
)
from .graph_core import (
    CondADMG,
    DirectedMixedGraph,
    GraphError,
    parse_graph,
    serialize_graph,
    topological_orders,
)
from .graph_transform import enumerate_bidirected_cliques, fix_graph, is_fixable, swig
from .markov_checks import CheckReport, Violation, check_gm, check_um

__all__ = [
    "EquationSystem",
    "PotentialOutcomeQuery",
    "induced_joint",
    "po_distribution",
    "verify_consistency",
    "schedule_consistency_report",
    "verify_no_direct_effect",
    "verify_swig_markov",
    "verify_fixing_identity",
    "generate_system",
    "system_to_json",
    "system_from_json",
]


def noise_name(vertex: str) -> str:
    return f"E_{vertex}"


@dataclass(frozen=True)
class PotentialOutcomeQuery:
    """An intervention target: vertices and the values they are set to."""

    intervened: tuple
    values: tuple

    @classmethod
    def from_dict(cls, g: DirectedMixedGraph, do: dict) -> "PotentialOutcomeQuery":
        vs = g.sorted_by_order(do)
        return cls(tuple(vs), tuple(do[v] for v in vs))

    def as_dict(self) -> dict:
        return dict(zip(self.intervened, self.values))


class EquationSystem:
    """Graph, outcome space, per-vertex function tables, and a noise joint.

    The noise joint must pass the unconditional Markov check against the
    bidirected component of the graph; construction fails otherwise.
    """

    __slots__ = ("graph", "outcome_space", "noise", "functions",
                 "_topo", "_support", "_schedules")

    def __init__(self, graph: DirectedMixedGraph, outcome_space: StateSpace,
                 functions: dict, noise: JointTable):
        if tuple(outcome_space.names) != tuple(graph.vertices):
            raise DistributionError("outcome space must list the graph vertices in order")
        expected_noise = tuple(noise_name(v) for v in graph.vertices)
        if tuple(noise.space.names) != expected_noise:
            raise DistributionError(
                f"noise variables must be {expected_noise} in order")
        functions = {v: tuple(tuple(int(x) for x in row) for row in functions[v])
                     for v in graph.vertices}
        for v in graph.vertices:
            pa = graph.sorted_by_order(graph.parents_of(v))
            n_pa = 1
            for p in pa:
                n_pa *= outcome_space.cards[outcome_space.position(p)]
            e_card = noise.space.cards[noise.space.position(noise_name(v))]
            card_v = outcome_space.cards[outcome_space.position(v)]
            rows = functions[v]
            if len(rows) != n_pa or any(len(r) != e_card for r in rows):
                raise DistributionError(
                    f"function table for {v} must be {n_pa} x {e_card}")
            if any(x < 0 or x >= card_v for row in rows for x in row):
                raise DistributionError(f"function table for {v} has out-of-range values")
        bidir = DirectedMixedGraph(
            expected_noise,
            (),
            ((noise_name(a), noise_name(b)) for a, b in graph.bidirected),
        )
        um = check_um(bidir, noise)
        if not um.passed:
            raise DistributionError(
                "noise joint is not unconditionally Markov for the bidirected "
                f"component; first violation: {um.violations[0].constraint}")
        object.__setattr__(self, "graph", graph)
        object.__setattr__(self, "outcome_space", outcome_space)
        object.__setattr__(self, "functions", functions)
        object.__setattr__(self, "noise", noise)
        object.__setattr__(self, "_topo", topological_orders(graph, 1)[0])
        support = [(noise.space.assignment(i), p)
                   for i, p in enumerate(noise.probs) if p > 0]
        object.__setattr__(self, "_support", tuple(support))
        object.__setattr__(self, "_schedules", {})

    def __setattr__(self, name, value):
        raise AttributeError("EquationSystem is immutable")

    @property
    def support(self):
        """Noise assignments with positive probability, as (cell, prob) pairs."""
        return self._support

    def f(self, v: str, parent_values: tuple, e: int) -> int:
        pa = self.graph.sorted_by_order(self.graph.parents_of(v))
        idx = 0
        for p, val in zip(pa, parent_values):
            idx = idx * self.outcome_space.cards[self.outcome_space.position(p)] + val
        return self.functions[v][idx][e]

    def schedule(self, intervened: tuple, values: tuple):
        """Potential outcomes V(v_I) per noise support point.

        Returns a tuple with one outcome assignment (over all vertices, in
        vertex order) per entry of :attr:`support`.
        """
        key = (tuple(intervened), tuple(values))
        cached = self._schedules.get(key)
        if cached is not None:
            return cached
        g = self.graph
        do = dict(zip(intervened, values))
        pa_lists = {v: g.sorted_by_order(g.parents_of(v)) for v in g.vertices}
        epos = {v: self.noise.space.position(noise_name(v)) for v in g.vertices}
        out = []
        for cell, _ in self._support:
            vals = {}
            for v in self._topo:
                parent_vals = tuple(do[p] if p in do else vals[p]
                                    for p in pa_lists[v])
                vals[v] = self.f(v, parent_vals, cell[epos[v]])
            out.append(tuple(vals[v] for v in g.vertices))
        result = tuple(out)
        self._schedules[key] = result
        return result


def induced_joint(s: EquationSystem) -> JointTable:
    """Exact pushforward of the noise joint through the equations."""
    return po_distribution(s, {})


def po_distribution(s: EquationSystem, do: dict) -> JointTable:
    """Law of the potential outcome vector under the intervention ``do``.

    Intervened coordinates keep their own equations (their parents are
    forced), so the output is the joint law of the natural responses.
    """
    q = PotentialOutcomeQuery.from_dict(s.graph, do)
    for v, val in q.as_dict().items():
        card = s.outcome_space.cards[s.outcome_space.position(v)]
        if not 0 <= val < card:
            raise DistributionError(f"do({v}={val}) outside cardinality {card}")
    mode = s.noise.mode
    zero = Fraction(0) if mode == "rational" else 0.0
    probs = [zero] * s.outcome_space.size
    outcomes = s.schedule(q.intervened, q.values)
    for (cell, p), outcome in zip(s.support, outcomes):
        probs[s.outcome_space.index(outcome)] += p
    return JointTable(s.outcome_space, probs, mode)


def _interventions(s: EquationSystem):
    """All (intervened, values) pairs in deterministic order."""
    g = s.graph
    for r in range(len(g.vertices) + 1):
        for combo in itertools.combinations(g.vertices, r):
            cards = [s.outcome_space.cards[s.outcome_space.position(v)] for v in combo]
            for values in itertools.product(*(range(c) for c in cards)):
                yield combo, values


def schedule_consistency_report(s: EquationSystem, schedule=None) -> CheckReport:
    """Check the consistency identities on a schedule map.

    ``schedule(intervened, values)`` must return one outcome tuple per noise
    support point; it defaults to the system's own recursive-substitution
    schedule.  Two families are checked at every support point: composing an
    intervention with values the schedule itself produced changes nothing,
    and each coordinate equals its response to an intervention on its
    parents alone.
    """
    if schedule is None:
        schedule = s.schedule
    g = s.graph
    report = CheckReport("consistency", True)
    vpos = {v: i for i, v in enumerate(g.vertices)}
    pa_lists = {v: g.sorted_by_order(g.parents_of(v)) for v in g.vertices}
    n_support = len(s.support)
    for intervened, values in _interventions(s):
        base = schedule(intervened, values)
        do = dict(zip(intervened, values))
        others = [v for v in g.vertices if v not in intervened]
        for r in range(len(others) + 1):
            for extra in itertools.combinations(others, r):
                merged = tuple(g.sorted_by_order(set(intervened) | set(extra)))
                # group support points by the values the schedule itself
                # produces on `extra`; the event being conditioned on picks
                # exactly one value tuple per point
                groups: dict = {}
                for i in range(n_support):
                    key = tuple(base[i][vpos[v]] for v in extra)
                    groups.setdefault(key, []).append(i)
                for evals, idxs in groups.items():
                    edo = dict(zip(extra, evals))
                    mvals = tuple(do[v] if v in do else edo[v] for v in merged)
                    w2 = schedule(merged, mvals)
                    for i in idxs:
                        if w2[i] != base[i]:
                            report.passed = False
                            report.violations.append(Violation(
                                f"V({_do_str(intervened, values)},"
                                f"{_do_str(extra, evals)})"
                                f" = V({_do_str(intervened, values)})",
                                {"noise": dict(zip(s.noise.space.names,
                                                   s.support[i][0])),
                                 "lhs": dict(zip(g.vertices, w2[i])),
                                 "rhs": dict(zip(g.vertices, base[i]))},
                                1.0))
                            if len(report.violations) >= 20:
                                return report
        # recursive form: each coordinate is its response to do(parents)
        for v in g.vertices:
            pa = tuple(pa_lists[v])
            groups = {}
            for i in range(n_support):
                key = tuple(do[p] if p in do else base[i][vpos[p]] for p in pa)
                groups.setdefault(key, []).append(i)
            for pvals, idxs in groups.items():
                w3 = schedule(pa, pvals)
                for i in idxs:
                    if w3[i][vpos[v]] != base[i][vpos[v]]:
                        report.passed = False
                        report.violations.append(Violation(
                            f"{v}({_do_str(intervened, values)}) = "
                            f"{v}({_do_str(pa, pvals)})",
                            {"noise": dict(zip(s.noise.space.names,
                                               s.support[i][0])),
                             "lhs": w3[i][vpos[v]], "rhs": base[i][vpos[v]]},
                            1.0))
                        if len(report.violations) >= 20:
                            return report
    return report


def _do_str(vs, vals) -> str:
    return ",".join(f"{v}={val}" for v, val in zip(vs, vals)) or "-"


def verify_consistency(s: EquationSystem) -> CheckReport:
    """Exhaustive consistency check of the system's own potential outcomes."""
    return schedule_consistency_report(s)


def verify_no_direct_effect(s: EquationSystem, J, K, L) -> CheckReport:
    """No directed path from L to J off K means intervening on L cannot
    change J once K is held: V_J(v_K, v_L) = V_J(v_K) pointwise."""
    g = s.graph
    J, K, L = frozenset(J), frozenset(K), frozenset(L)
    if (J & K) or (J & L) or (K & L):
        raise GraphError("J, K, L must be pairwise disjoint")
    reached = set()
    frontier = [v for v in L]
    while frontier:
        v = frontier.pop()
        for c in g.children_of(v):
            if c in K or c in reached:
                continue
            if c in J:
                raise GraphError(
                    f"directed path from {sorted(L)} to {sorted(J)} avoiding "
                    f"{sorted(K)} exists; precondition fails")
            reached.add(c)
            frontier.append(c)
    report = CheckReport("no-direct-effect", True)
    vpos = {v: i for i, v in enumerate(g.vertices)}
    Ks = g.sorted_by_order(K)
    Ls = g.sorted_by_order(L)
    KLs = g.sorted_by_order(K | L)
    cards = {v: s.outcome_space.cards[s.outcome_space.position(v)] for v in g.vertices}
    for k_vals in itertools.product(*(range(cards[v]) for v in Ks)):
        base = s.schedule(tuple(Ks), k_vals)
        do_k = dict(zip(Ks, k_vals))
        for l_vals in itertools.product(*(range(cards[v]) for v in Ls)):
            merged_vals = tuple(do_k[v] if v in do_k else l_vals[Ls.index(v)]
                                for v in KLs)
            both = s.schedule(tuple(KLs), merged_vals)
            for i in range(len(s.support)):
                if any(both[i][vpos[j]] != base[i][vpos[j]] for j in J):
                    report.passed = False
                    report.violations.append(Violation(
                        f"V_{_fmt(J)}({_do_str(Ks, k_vals)},{_do_str(Ls, l_vals)})"
                        f" = V_{_fmt(J)}({_do_str(Ks, k_vals)})",
                        {"noise": dict(zip(s.noise.space.names, s.support[i][0]))},
                        1.0))
                    if len(report.violations) >= 20:
                        return report
    return report


def _fmt(vs) -> str:
    return "{" + ",".join(sorted(vs)) + "}"


def verify_swig_markov(s: EquationSystem, do: dict, tol: float = 1e-9) -> CheckReport:
    """The law of V(v_I) must be global Markov for the intervention graph."""
    table = po_distribution(s, do)
    report = check_gm(swig(s.graph, set(do)), table, tol)
    report.model = "swig-markov"
    return report


def fixable_permutations(g: DirectedMixedGraph, J) -> list:
    """All orderings of J that are stepwise fixable in ``g``."""
    out = []
    for perm in itertools.permutations(g.sorted_by_order(set(J))):
        c = CondADMG(g)
        ok = True
        for v in perm:
            if not is_fixable(c, v):
                ok = False
                break
            c = fix_graph(c, v)
        if ok:
            out.append(perm)
    return out


def verify_fixing_identity(s: EquationSystem, J, assignment: dict | None = None) -> CheckReport:
    """Fixing J in the observed joint identifies the potential-outcome
    marginal: for each v_J the kernel slice equals the law of V(v_J)
    restricted to the other vertices, exactly, for every fixable
    permutation of J.

    A slice can come out undefined under one fixing order but not another
    (the running conditional hits zero at different stages); those contexts
    carry probability zero, so definedness differences are skipped and
    counted, and order agreement means agreement wherever defined.
    """
    g = s.graph
    J = frozenset(J)
    perms = fixable_permutations(g, J)
    if not perms:
        raise GraphError(f"set {sorted(J)} admits no fixable permutation")
    report = CheckReport("fixing-identity", True)
    joint = induced_joint(s)
    rest = [v for v in g.vertices if v not in J]
    po_cache: dict = {}

    def po_marginal(do: dict):
        key = frozenset(do.items())
        if key not in po_cache:
            po_cache[key] = po_distribution(s, do).marginal(rest)
        return po_cache[key]

    for perm in perms:
        kernel = Kernel.from_table(joint)
        c = CondADMG(g)
        for v in perm:
            kernel = fix_dist(kernel, c, v)
            c = fix_graph(c, v)
        names = kernel.fixed_space.names
        for assign, t in kernel.tables.items():
            do = dict(zip(names, assign))
            if assignment is not None and any(do[v] != assignment[v] for v in do):
                continue
            if t is None:
                report.skipped_slices += 1
                continue
            po = po_marginal(do)
            if t != po:
                report.passed = False
                diffs = [abs(a - b) for a, b in zip(t.probs, po.probs)]
                report.violations.append(Violation(
                    f"fix_{_fmt(J)} along {perm} != potential-outcome marginal",
                    {"slice": do}, float(max(diffs))))
    return report


def generate_system(g: DirectedMixedGraph, seed: int, noise_card: int = 2,
                    construction: str = "clique_latent",
                    outcome_card: int = 2,
                    noise: JointTable | None = None) -> EquationSystem:
    """Seeded random system for ``g``.

    ``clique_latent`` builds the noise by drawing one independent uniform
    latent per bidirected clique and letting each vertex's noise be the
    tuple of its cliques' latents, which makes the unconditional Markov
    requirement hold by construction.  ``user`` takes ``noise`` as given and
    just validates it.  Function tables are drawn uniformly; constant rows
    are allowed and exercise zero-probability handling downstream.
    """
    rng = random.Random(seed)
    names = g.vertices
    outcome_space = StateSpace((v, outcome_card) for v in names)
    if construction == "clique_latent":
        cliques = [tuple(g.sorted_by_order(c.members))
                   for c in enumerate_bidirected_cliques(g)]
        owners = {v: [i for i, c in enumerate(cliques) if v in c] for v in names}
        noise_space = StateSpace(
            (noise_name(v), noise_card ** len(owners[v])) for v in names)
        zero = Fraction(0)
        probs = [zero] * noise_space.size
        total = noise_card ** len(cliques)
        w = Fraction(1, total)
        for combo in itertools.product(range(noise_card), repeat=len(cliques)):
            e = []
            for v in names:
                idx = 0
                for c in owners[v]:
                    idx = idx * noise_card + combo[c]
                e.append(idx)
            probs[noise_space.index(tuple(e))] += w
        noise = JointTable(noise_space, probs, "rational")
    elif construction == "user":
        if noise is None:
            raise DistributionError("construction 'user' requires a noise table")
    else:
        raise DistributionError(f"unknown construction {construction!r}")
    functions = {}
    for v in names:
        pa = g.sorted_by_order(g.parents_of(v))
        n_pa = 1
        for p in pa:
            n_pa *= outcome_space.cards[outcome_space.position(p)]
        e_card = noise.space.cards[noise.space.position(noise_name(v))]
        card_v = outcome_space.cards[outcome_space.position(v)]
        functions[v] = [[rng.randrange(card_v) for _ in range(e_card)]
                        for _ in range(n_pa)]
    return EquationSystem(g, outcome_space, functions, noise)


def system_to_json(s: EquationSystem) -> str:
    doc = {
        "graph": serialize_graph(s.graph),
        "outcome_vars": [{"name": n, "card": c}
                         for n, c in s.outcome_space.variables],
        "noise": json.loads(table_to_json(s.noise)),
        "functions": {v: [list(row) for row in s.functions[v]]
                      for v in s.graph.vertices},
    }
    return json.dumps(doc, indent=2) + "\n"


def system_from_json(text: str) -> EquationSystem:
    try:
        doc = json.loads(text)
        graph = parse_graph(doc["graph"])
        outcome_space = StateSpace((v["name"], v["card"])
                                   for v in doc["outcome_vars"])
        noise = table_from_json(json.dumps(doc["noise"]))
        functions = doc["functions"]
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise DistributionError(f"invalid system document: {exc}") from exc
    return EquationSystem(graph, outcome_space, functions, noise)
